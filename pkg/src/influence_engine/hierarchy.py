"""Hierarchical score assembly over the network/community tree.

Leaves score a user via the learned non-negative dot product; internal
levels fold child scores into a new feature vector and combine them,
typically with the weight-normalized L2 combiner. The root score scaled
by 100 is the final influence score.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Mapping

import numpy as np

from . import lineio
from .features import FeatureStore
from .training import WeightVector

COMBINER_SUPERVISED = "supervised-dot"
COMBINER_L2 = "l2-norm"


@dataclass(frozen=True)
class ScoreNode:
    node_id: str
    level: int
    combiner: str
    children: tuple["ScoreNode", ...] = ()
    network: str | None = None  # leaves only
    heuristic_basis: str | None = None  # internal nodes with derived weights
    explicit_weights: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.combiner not in (COMBINER_SUPERVISED, COMBINER_L2):
            raise ValueError(f"unknown combiner {self.combiner!r}")
        if self.is_leaf:
            if not self.network:
                raise ValueError(f"leaf node {self.node_id!r} needs a network")
        else:
            for child in self.children:
                if child.level != self.level + 1:
                    raise ValueError(
                        f"child {child.node_id!r} level {child.level} != {self.level + 1}"
                    )
            if self.explicit_weights is not None and len(self.explicit_weights) != len(self.children):
                raise ValueError("explicit weights length must match children count")

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def leaf_networks(self) -> list[str]:
        if self.is_leaf:
            return [self.network]
        out = []
        for child in self.children:
            out.extend(child.leaf_networks())
        return out

    def walk(self):
        yield self
        for child in self.children:
            yield from child.walk()


def parse_tree(data: dict, level: int = 0) -> ScoreNode:
    children = tuple(parse_tree(c, level + 1) for c in data.get("children", ()))
    node = ScoreNode(
        node_id=data["node_id"],
        level=level,
        combiner=data.get("combiner", COMBINER_L2 if children else COMBINER_SUPERVISED),
        children=children,
        network=data.get("network"),
        heuristic_basis=data.get("heuristic_basis"),
        explicit_weights=tuple(data["weights"]) if "weights" in data else None,
    )
    if level == 0 and node.node_id != "root":
        raise ValueError('top-level node must have node_id "root"')
    return node


def load_tree(path: str | Path) -> ScoreNode:
    return parse_tree(json.loads(Path(path).read_text()))


def tree_to_dict(node: ScoreNode) -> dict:
    out: dict = {"node_id": node.node_id, "combiner": node.combiner}
    if node.network:
        out["network"] = node.network
    if node.heuristic_basis:
        out["heuristic_basis"] = node.heuristic_basis
    if node.explicit_weights is not None:
        out["weights"] = list(node.explicit_weights)
    if node.children:
        out["children"] = [tree_to_dict(c) for c in node.children]
    return out


def save_tree(node: ScoreNode, path: str | Path) -> None:
    Path(path).write_text(json.dumps(tree_to_dict(node), indent=2) + "\n")


# -- combiners -------------------------------------------------------------

def leaf_score(f: np.ndarray, w: np.ndarray) -> float:
    """Weight-sum-normalized dot product, in [0,1] for f in [0,1]^n, w >= 0."""
    if f.shape != w.shape:
        raise ValueError("feature and weight vectors are misaligned")
    total = float(np.sum(w))
    if total == 0.0:
        return 0.0
    return float(f @ w) / total


def l2_combine(f: np.ndarray, w: np.ndarray) -> float:
    """||f * w||_2 / ||w||_2 with * element-wise; in [0,1] for f in [0,1]^n."""
    if f.shape != w.shape:
        raise ValueError("feature and weight vectors are misaligned")
    denom = float(np.linalg.norm(w))
    if denom == 0.0:
        raise ValueError("combiner weights must not be all zero")
    return float(np.linalg.norm(f * w)) / denom


def child_vector(node: ScoreNode, child_scores: Mapping[str, float]) -> np.ndarray:
    """Child scores in child order; users absent from a child contribute 0."""
    return np.array([child_scores.get(c.node_id, 0.0) for c in node.children])


def heuristic_weights(node: ScoreNode, stats: Mapping[str, Mapping[str, float]]) -> np.ndarray:
    """Per-child weights proportional to a graph statistic, max-normalized.

    ``stats`` maps network name -> {graph_size, avg_node_degree}; an internal
    child contributes the sum over its descendant leaf networks.
    """
    basis = node.heuristic_basis or "graph_size"
    values = []
    for child in node.children:
        total = 0.0
        for network in child.leaf_networks():
            net_stats = stats.get(network)
            if net_stats is None or basis not in net_stats:
                raise ValueError(f"missing {basis!r} statistic for network {network!r}")
            total += net_stats[basis]
        values.append(total)
    top = max(values)
    if top <= 0:
        raise ValueError(f"heuristic basis {basis!r} is zero for every child of {node.node_id!r}")
    return np.array(values) / top


def node_weights(
    node: ScoreNode, stats: Mapping[str, Mapping[str, float]]
) -> np.ndarray:
    if node.explicit_weights is not None:
        return np.asarray(node.explicit_weights, dtype=float)
    return heuristic_weights(node, stats)


# -- evaluation ------------------------------------------------------------

@dataclass(frozen=True)
class ScoreEntry:
    overall: float  # [0,100]
    raw_root: float  # [0,1]
    node_scores: tuple[tuple[str, float], ...]


@dataclass
class ScoreSnapshot:
    as_of: date
    entries: dict[str, ScoreEntry] = field(default_factory=dict)

    def overall(self, user: str) -> float | None:
        entry = self.entries.get(user)
        return entry.overall if entry else None

    def prior_scores(self) -> dict[str, float]:
        return {user: entry.overall for user, entry in self.entries.items()}


def score_user(
    user: str,
    tree: ScoreNode,
    store: FeatureStore,
    models: Mapping[str, WeightVector],
    stats: Mapping[str, Mapping[str, float]],
) -> ScoreEntry | None:
    """Bottom-up evaluation for one user; None when the user is on no leaf."""
    node_scores: dict[str, float] = {}

    def visit(node: ScoreNode) -> float | None:
        if node.is_leaf:
            f = store.get(user, node.network)
            if f is None:
                return None
            model = models.get(node.network)
            if model is None:
                raise ValueError(f"no trained model for leaf network {node.network!r}")
            score = leaf_score(f, model.weights)
            node_scores[node.node_id] = score
            return score

        present = False
        for child in node.children:
            if visit(child) is not None:
                present = True
        if not present:
            return None
        f = child_vector(node, node_scores)
        w = node_weights(node, stats)
        if node.combiner == COMBINER_SUPERVISED:
            score = leaf_score(f, w)
        else:
            score = l2_combine(f, w)
        node_scores[node.node_id] = score
        return score

    raw = visit(tree)
    if raw is None:
        return None
    return ScoreEntry(
        overall=100.0 * raw,
        raw_root=raw,
        node_scores=tuple(sorted(node_scores.items())),
    )


def score_population(
    tree: ScoreNode,
    store: FeatureStore,
    models: Mapping[str, WeightVector],
    stats: Mapping[str, Mapping[str, float]],
    as_of: date,
) -> ScoreSnapshot:
    snapshot = ScoreSnapshot(as_of=as_of)
    for user in store.users():
        entry = score_user(user, tree, store, models, stats)
        if entry is not None:
            snapshot.entries[user] = entry
    return snapshot


# -- snapshot files --------------------------------------------------------

def save_snapshot(snapshot: ScoreSnapshot, path: str | Path) -> None:
    lines = [f"as_of={snapshot.as_of.isoformat()}"]
    for user in sorted(snapshot.entries):
        entry = snapshot.entries[user]
        nodes = " ".join(f"{nid}={repr(s)}" for nid, s in entry.node_scores)
        lines.append(f"{user}\t{repr(entry.overall)}\t{repr(entry.raw_root)}\t{nodes}")
    lineio.write_lines(path, lines)


def load_snapshot(path: str | Path) -> ScoreSnapshot:
    lines = list(lineio.read_lines(path))
    if not lines or not lines[0].startswith("as_of="):
        raise ValueError(f"snapshot file {path} is missing its as_of header")
    snapshot = ScoreSnapshot(as_of=date.fromisoformat(lines[0].split("=", 1)[1]))
    for line in lines[1:]:
        user, overall, raw, nodes = line.split("\t")
        node_scores = tuple(
            (token.split("=", 1)[0], float(token.split("=", 1)[1]))
            for token in nodes.split(" ")
            if token
        )
        snapshot.entries[user] = ScoreEntry(
            overall=float(overall), raw_root=float(raw), node_scores=node_scores
        )
    return snapshot
