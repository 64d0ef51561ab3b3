import math
from datetime import date

import numpy as np
import pytest

from influence_engine.features import FeatureStore
from influence_engine.hierarchy import (
    ScoreNode,
    child_vector,
    heuristic_weights,
    l2_combine,
    leaf_score,
    load_snapshot,
    node_weights,
    parse_tree,
    save_snapshot,
    score_population,
    score_user,
    tree_to_dict,
)
from influence_engine.registry import FeatureRegistry, NetworkSpec
from influence_engine.training import WeightVector


def flat_registry(networks, n_features=2):
    attrs = tuple(f"a{i}" for i in range(n_features))
    return FeatureRegistry(
        networks={
            n: NetworkSpec(name=n, longlasting_attrs=attrs, dynamic=False)
            for n in networks
        }
    )


def make_store(registry, vectors):
    store = FeatureStore(registry=registry)
    for (user, network), values in vectors.items():
        store.vectors[(user, network)] = np.asarray(values, dtype=float)
    return store


def uniform_model(registry, network, weights):
    return WeightVector(
        network=network,
        weights=np.asarray(weights, dtype=float),
        registry_hash=registry.registry_hash(network),
    )


def leaf(node_id, network, level):
    return {"node_id": node_id, "network": network, "combiner": "supervised-dot"}


class TestLeafScore:
    def test_all_ones_feature_vector_scores_one(self):
        assert leaf_score(np.ones(3), np.array([0.2, 1.0, 0.05])) == 1.0

    def test_all_zeros_scores_zero(self):
        assert leaf_score(np.zeros(3), np.ones(3)) == 0.0

    def test_hand_value(self):
        assert leaf_score(np.array([0.5, 0.5]), np.array([0.4, 0.6])) == 0.5

    def test_zero_weight_sum_scores_zero(self):
        assert leaf_score(np.ones(2), np.zeros(2)) == 0.0

    def test_misalignment_fatal(self):
        with pytest.raises(ValueError):
            leaf_score(np.ones(2), np.ones(3))


class TestL2Combine:
    def test_single_child_identity(self):
        assert math.isclose(l2_combine(np.array([0.37]), np.array([2.5])), 0.37, rel_tol=1e-12)

    def test_hand_value(self):
        value = l2_combine(np.array([0.6, 0.8]), np.array([1.0, 1.0]))
        assert math.isclose(value, 1.0 / math.sqrt(2.0), rel_tol=1e-12)

    def test_all_ones_attains_upper_bound(self):
        value = l2_combine(np.ones(3), np.array([0.5, 1.0, 0.25]))
        assert math.isclose(value, 1.0, rel_tol=1e-12)

    def test_zero_weights_fatal(self):
        with pytest.raises(ValueError):
            l2_combine(np.ones(2), np.zeros(2))

    def test_single_nonzero_weight_passes_child_through(self):
        value = l2_combine(np.array([0.3, 0.9]), np.array([0.0, 2.0]))
        assert math.isclose(value, 0.9, rel_tol=1e-12)


class TestChildVectorAndWeights:
    def tree(self):
        return parse_tree(
            {
                "node_id": "root",
                "combiner": "l2-norm",
                "heuristic_basis": "graph_size",
                "children": [
                    {"node_id": "tw", "network": "tw", "combiner": "supervised-dot"},
                    {"node_id": "fb", "network": "fb", "combiner": "supervised-dot"},
                    {"node_id": "ig", "network": "ig", "combiner": "supervised-dot"},
                ],
            }
        )

    def test_child_vector_assembly(self):
        vec = child_vector(self.tree(), {"tw": 0.6, "fb": 0.8, "ig": 0.2})
        assert np.allclose(vec, [0.6, 0.8, 0.2])

    def test_absent_child_contributes_zero(self):
        vec = child_vector(self.tree(), {"fb": 0.7})
        assert np.allclose(vec, [0.0, 0.7, 0.0])

    def test_equal_graph_sizes_give_equal_weights(self):
        stats = {n: {"graph_size": 1e6} for n in ("tw", "fb", "ig")}
        assert np.allclose(heuristic_weights(self.tree(), stats), [1.0, 1.0, 1.0])

    def test_proportional_to_graph_size(self):
        stats = {
            "tw": {"graph_size": 4e6},
            "fb": {"graph_size": 1e6},
            "ig": {"graph_size": 2e6},
        }
        assert np.allclose(heuristic_weights(self.tree(), stats), [1.0, 0.25, 0.5])

    def test_avg_node_degree_basis(self):
        tree = parse_tree(
            {
                "node_id": "root",
                "combiner": "l2-norm",
                "heuristic_basis": "avg_node_degree",
                "children": [
                    {"node_id": "tw", "network": "tw", "combiner": "supervised-dot"},
                    {"node_id": "fb", "network": "fb", "combiner": "supervised-dot"},
                ],
            }
        )
        stats = {"tw": {"avg_node_degree": 200.0}, "fb": {"avg_node_degree": 50.0}}
        assert np.allclose(heuristic_weights(tree, stats), [1.0, 0.25])

    def test_missing_stat_fatal(self):
        with pytest.raises(ValueError, match="missing"):
            heuristic_weights(self.tree(), {"tw": {"graph_size": 1.0}})

    def test_explicit_weights_bypass_heuristics(self):
        tree = parse_tree(
            {
                "node_id": "root",
                "combiner": "l2-norm",
                "weights": [1.0, 0.5, 0.25],
                "children": [
                    {"node_id": "tw", "network": "tw", "combiner": "supervised-dot"},
                    {"node_id": "fb", "network": "fb", "combiner": "supervised-dot"},
                    {"node_id": "ig", "network": "ig", "combiner": "supervised-dot"},
                ],
            }
        )
        assert np.allclose(node_weights(tree, {}), [1.0, 0.5, 0.25])


class TestTreeParsing:
    def test_root_must_be_named_root(self):
        with pytest.raises(ValueError):
            parse_tree({"node_id": "top", "combiner": "l2-norm",
                        "children": [{"node_id": "tw", "network": "tw"}]})

    def test_leaf_needs_network(self):
        with pytest.raises(ValueError):
            ScoreNode(node_id="x", level=1, combiner="supervised-dot")

    def test_round_trip(self):
        data = {
            "node_id": "root",
            "combiner": "l2-norm",
            "heuristic_basis": "graph_size",
            "children": [
                {"node_id": "tw", "combiner": "supervised-dot", "network": "tw"},
                {
                    "node_id": "lt",
                    "combiner": "l2-norm",
                    "weights": [1.0, 0.5],
                    "children": [
                        {"node_id": "lt-c1", "combiner": "supervised-dot", "network": "c1"},
                        {"node_id": "lt-c2", "combiner": "supervised-dot", "network": "c2"},
                    ],
                },
            ],
        }
        tree = parse_tree(data)
        assert tree_to_dict(tree) == data
        assert [n.level for n in tree.walk()] == [0, 1, 1, 2, 2]
        assert tree.leaf_networks() == ["tw", "c1", "c2"]


class TestScoreTree:
    def single_chain(self):
        # root -> mid -> leaf, all single-child
        return parse_tree(
            {
                "node_id": "root",
                "combiner": "l2-norm",
                "weights": [1.0],
                "children": [
                    {
                        "node_id": "mid",
                        "combiner": "l2-norm",
                        "weights": [3.0],
                        "children": [
                            {"node_id": "tw", "combiner": "supervised-dot", "network": "tw"}
                        ],
                    }
                ],
            }
        )

    def test_single_network_identity_chain(self):
        registry = flat_registry(["tw"])
        store = make_store(registry, {("u", "tw"): [0.8, 0.4]})
        models = {"tw": uniform_model(registry, "tw", [1.0, 1.0])}
        entry = score_user("u", self.single_chain(), store, models, {})
        expected_leaf = (0.8 + 0.4) / 2.0
        assert math.isclose(entry.raw_root, expected_leaf, rel_tol=1e-12)
        assert math.isclose(entry.overall, 100.0 * expected_leaf, rel_tol=1e-12)

    def two_network_tree(self, third=False):
        children = [
            {"node_id": "tw", "combiner": "supervised-dot", "network": "tw"},
            {"node_id": "fb", "combiner": "supervised-dot", "network": "fb"},
        ]
        if third:
            children.append({"node_id": "ig", "combiner": "supervised-dot", "network": "ig"})
        return parse_tree(
            {
                "node_id": "root",
                "combiner": "l2-norm",
                "weights": [1.0] * len(children),
                "children": children,
            }
        )

    def setup_two_networks(self, third=False):
        networks = ["tw", "fb"] + (["ig"] if third else [])
        registry = flat_registry(networks)
        store = make_store(
            registry,
            {("u", "tw"): [0.6, 0.6], ("u", "fb"): [0.8, 0.8]}
            | ({("u", "ig"): [0.0, 0.0]} if third else {}),
        )
        models = {n: uniform_model(registry, n, [1.0, 1.0]) for n in networks}
        return registry, store, models

    def test_two_network_hand_value(self):
        _, store, models = self.setup_two_networks()
        entry = score_user("u", self.two_network_tree(), store, models, {})
        assert math.isclose(entry.overall, 100.0 * math.sqrt(0.5), rel_tol=1e-9)
        assert abs(entry.overall - 70.711) < 1e-2

    def test_zero_activity_third_network_dilutes(self):
        _, store, models = self.setup_two_networks(third=True)
        entry = score_user("u", self.two_network_tree(third=True), store, models, {})
        assert math.isclose(entry.overall, 100.0 * math.sqrt(1.0 / 3.0), rel_tol=1e-9)
        assert abs(entry.overall - 57.735) < 1e-2

    def test_user_on_no_network_is_unscored(self):
        registry, store, models = self.setup_two_networks()
        assert score_user("ghost", self.two_network_tree(), store, models, {}) is None
        snapshot = score_population(
            self.two_network_tree(), store, models, {}, as_of=date(2023, 11, 14)
        )
        assert set(snapshot.entries) == {"u"}

    def test_child_order_invariance(self):
        registry = flat_registry(["tw", "fb"])
        store = make_store(registry, {("u", "tw"): [0.6, 0.2], ("u", "fb"): [0.9, 0.1]})
        models = {n: uniform_model(registry, n, [1.0, 0.5]) for n in ("tw", "fb")}
        forward = parse_tree(
            {"node_id": "root", "combiner": "l2-norm", "weights": [1.0, 0.25],
             "children": [
                 {"node_id": "tw", "combiner": "supervised-dot", "network": "tw"},
                 {"node_id": "fb", "combiner": "supervised-dot", "network": "fb"},
             ]}
        )
        backward = parse_tree(
            {"node_id": "root", "combiner": "l2-norm", "weights": [0.25, 1.0],
             "children": [
                 {"node_id": "fb", "combiner": "supervised-dot", "network": "fb"},
                 {"node_id": "tw", "combiner": "supervised-dot", "network": "tw"},
             ]}
        )
        a = score_user("u", forward, store, models, {})
        b = score_user("u", backward, store, models, {})
        assert math.isclose(a.overall, b.overall, rel_tol=1e-12)

    def test_monotonicity_in_single_feature(self):
        registry = flat_registry(["tw", "fb"], n_features=3)
        rng = np.random.default_rng(12)
        tree = parse_tree(
            {"node_id": "root", "combiner": "l2-norm", "weights": [1.0, 0.7],
             "children": [
                 {"node_id": "tw", "combiner": "supervised-dot", "network": "tw"},
                 {"node_id": "fb", "combiner": "supervised-dot", "network": "fb"},
             ]}
        )
        for _ in range(200):
            base = {
                ("u", "tw"): rng.random(3),
                ("u", "fb"): rng.random(3),
            }
            models = {
                n: uniform_model(registry, n, rng.random(3)) for n in ("tw", "fb")
            }
            before = score_user("u", tree, make_store(registry, base), models, {})
            network = ("tw", "fb")[int(rng.integers(2))]
            idx = int(rng.integers(3))
            bumped = {k: v.copy() for k, v in base.items()}
            bumped[("u", network)][idx] = min(1.0, bumped[("u", network)][idx] + 0.2)
            after = score_user("u", tree, make_store(registry, bumped), models, {})
            assert after.overall >= before.overall - 1e-12
            assert 0.0 <= after.raw_root <= 1.0
            assert 0.0 <= after.overall <= 100.0


class TestSnapshotIO:
    def test_round_trip(self, tmp_path):
        registry = flat_registry(["tw"])
        store = make_store(registry, {("u1", "tw"): [0.5, 0.25], ("u2", "tw"): [1.0, 0.0]})
        models = {"tw": uniform_model(registry, "tw", [2.0, 1.0])}
        tree = parse_tree(
            {"node_id": "root", "combiner": "l2-norm", "weights": [1.0],
             "children": [{"node_id": "tw", "combiner": "supervised-dot", "network": "tw"}]}
        )
        snapshot = score_population(tree, store, models, {}, as_of=date(2023, 11, 14))
        path = tmp_path / "snapshot.txt"
        save_snapshot(snapshot, path)
        loaded = load_snapshot(path)
        assert loaded.as_of == snapshot.as_of
        assert loaded.entries == snapshot.entries
        assert loaded.prior_scores() == {u: e.overall for u, e in snapshot.entries.items()}

    def test_missing_header_rejected(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("u1\t50.0\t0.5\ttw=0.5\n")
        with pytest.raises(ValueError):
            load_snapshot(path)
