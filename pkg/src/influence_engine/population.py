"""Synthetic population with known latent influence, plus the
perk-campaign spread simulator used to validate score quality.

Every user carries a latent influence level L drawn log-normally; audience
size and reaction volume both grow with L, so a correct pipeline must
recover the L ordering from the event log alone.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np
from scipy import stats as scipy_stats

from . import lineio
from .events import (
    MAX_WINDOW_DAYS,
    SECONDS_PER_DAY,
    GraphEdge,
    InteractionEvent,
    PairwiseLabel,
    ProfileSnapshot,
    TimeWindow,
    UserId,
)
from .hierarchy import ScoreSnapshot, save_tree, parse_tree
from .registry import FeatureRegistry, NetworkSpec


@dataclass(frozen=True)
class PopulationParams:
    n_users: int = 1000
    networks: tuple[str, ...] = ("tw", "fb", "ig")
    lognormal_mu: float = 2.5
    lognormal_sigma: float = 1.0
    mean_reactions_per_user: float = 50.0
    membership_prob: float = 0.85
    mean_audience: float = 30.0
    max_audience: int = 200
    edges_per_user: int = 10
    label_pairs: int = 2000
    label_flip_rate: float = 0.0
    label_margin_gate: float = 0.3  # min |ln La - ln Lb| for a judgment to exist
    reference_time: int = 1_700_000_000

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "PopulationParams":
        data = dict(data)
        data["networks"] = tuple(data["networks"])
        return cls(**data)


@dataclass
class SyntheticPopulation:
    params: PopulationParams
    seed: int
    users: tuple[str, ...]
    latent: dict[str, float]
    audiences: dict[str, tuple[str, ...]]
    memberships: dict[str, tuple[str, ...]]


def desk_registry(networks: tuple[str, ...]) -> FeatureRegistry:
    """Compact registry for desk-scale synthetic runs."""
    specs = {
        name: NetworkSpec(
            name=name,
            content_types=("message", "photo"),
            actions=("comment", "like", "reshare"),
            longlasting_attrs=("followers", "friends"),
        )
        for name in networks
    }
    return FeatureRegistry(networks=specs)


def desk_tree(networks: tuple[str, ...]) -> dict:
    return {
        "node_id": "root",
        "combiner": "l2-norm",
        "heuristic_basis": "graph_size",
        "children": [
            {"node_id": n, "combiner": "supervised-dot", "network": n} for n in networks
        ],
    }


def generate_population(params: PopulationParams, seed: int) -> SyntheticPopulation:
    rng = np.random.default_rng(seed)
    n = params.n_users
    users = tuple(f"u{i:05d}" for i in range(n))
    latent_values = rng.lognormal(params.lognormal_mu, params.lognormal_sigma, n)
    latent = {u: float(v) for u, v in zip(users, latent_values)}
    mean_latent = float(np.mean(latent_values))

    audiences = {}
    memberships = {}
    indices = np.arange(n)
    for i, u in enumerate(users):
        size = int(round(params.mean_audience * latent[u] / mean_latent))
        size = max(1, min(size, params.max_audience, n - 1))
        others = np.concatenate([indices[:i], indices[i + 1:]])
        chosen = rng.choice(others, size=size, replace=False)
        audiences[u] = tuple(users[j] for j in sorted(chosen))
        member = tuple(
            net for net in params.networks if rng.random() < params.membership_prob
        )
        if not member:
            member = (params.networks[int(rng.integers(len(params.networks)))],)
        memberships[u] = member

    return SyntheticPopulation(
        params=params,
        seed=seed,
        users=users,
        latent=latent,
        audiences=audiences,
        memberships=memberships,
    )


def generate_events(pop: SyntheticPopulation) -> list[InteractionEvent]:
    params = pop.params
    rng = np.random.default_rng((pop.seed, 1))
    mean_latent = float(np.mean([pop.latent[u] for u in pop.users]))
    window_seconds = MAX_WINDOW_DAYS * SECONDS_PER_DAY
    registry = desk_registry(params.networks)
    events = []
    for u in pop.users:
        rate = params.mean_reactions_per_user * pop.latent[u] / mean_latent
        count = int(rng.poisson(rate))
        audience = pop.audiences[u]
        nets = pop.memberships[u]
        for _ in range(count):
            network = nets[int(rng.integers(len(nets)))]
            spec = registry.networks[network]
            events.append(
                InteractionEvent(
                    actor=UserId(audience[int(rng.integers(len(audience)))]),
                    author=UserId(u),
                    network=network,
                    content_type=spec.content_types[int(rng.integers(len(spec.content_types)))],
                    action=spec.actions[int(rng.integers(len(spec.actions)))],
                    timestamp=int(params.reference_time - 1 - rng.integers(window_seconds)),
                )
            )
    return events


def generate_profiles(pop: SyntheticPopulation) -> list[ProfileSnapshot]:
    rng = np.random.default_rng((pop.seed, 2))
    as_of = TimeWindow(pop.params.reference_time, MAX_WINDOW_DAYS).reference_date()
    profiles = []
    for u in pop.users:
        followers = float(len(pop.audiences[u]))
        for network in pop.memberships[u]:
            profiles.append(
                ProfileSnapshot(
                    user=UserId(u),
                    network=network,
                    as_of=as_of,
                    numeric_attrs=(
                        ("followers", followers),
                        # uncorrelated noise signal the model should down-weight
                        ("friends", float(rng.integers(10, 500))),
                    ),
                )
            )
    return profiles


def generate_edges(pop: SyntheticPopulation) -> list[GraphEdge]:
    edges = []
    member_sets = {u: set(pop.memberships[u]) for u in pop.users}
    for u in pop.users:
        for network in pop.memberships[u]:
            emitted = 0
            for follower in pop.audiences[u]:
                if emitted >= pop.params.edges_per_user:
                    break
                if network in member_sets[follower]:
                    edges.append(GraphEdge(src=UserId(follower), dst=UserId(u), network=network))
                    emitted += 1
    return edges


def generate_labels(pop: SyntheticPopulation) -> list[PairwiseLabel]:
    params = pop.params
    rng = np.random.default_rng((pop.seed, 3))
    by_network: dict[str, list[str]] = {net: [] for net in params.networks}
    for u in pop.users:
        for net in pop.memberships[u]:
            by_network[net].append(u)

    labels = []
    attempts = 0
    max_attempts = params.label_pairs * 50
    while len(labels) < params.label_pairs and attempts < max_attempts:
        attempts += 1
        network = params.networks[int(rng.integers(len(params.networks)))]
        members = by_network[network]
        if len(members) < 2:
            continue
        i, j = rng.choice(len(members), size=2, replace=False)
        a, b = members[int(i)], members[int(j)]
        la, lb = pop.latent[a], pop.latent[b]
        if abs(math.log(la) - math.log(lb)) < params.label_margin_gate:
            continue
        winner_is_a = la > lb
        if rng.random() < params.label_flip_rate:
            winner_is_a = not winner_is_a
        va, vb = (5, 1) if winner_is_a else (1, 5)
        labels.append(
            PairwiseLabel(network=network, user_a=UserId(a), user_b=UserId(b), votes_a=va, votes_b=vb)
        )
    return labels


def write_dataset(pop: SyntheticPopulation, directory: str | Path) -> Path:
    """Materialize the full desk-scale input set in one directory."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    lineio.write_lines(directory / "events.txt", (lineio.encode_event(e) for e in generate_events(pop)))
    lineio.write_lines(directory / "profiles.txt", (lineio.encode_profile(p) for p in generate_profiles(pop)))
    lineio.write_lines(directory / "edges.txt", (lineio.encode_edge(e) for e in generate_edges(pop)))
    lineio.write_lines(directory / "labels.txt", (lineio.encode_label(l) for l in generate_labels(pop)))
    lineio.write_lines(
        directory / "latent.txt",
        (f"{u}\t{repr(pop.latent[u])}" for u in pop.users),
    )
    desk_registry(pop.params.networks).save(directory / "registry.json")
    save_tree(parse_tree(desk_tree(pop.params.networks)), directory / "tree.json")
    (directory / "population.json").write_text(
        json.dumps({"seed": pop.seed, "params": pop.params.to_dict()}, indent=2) + "\n"
    )
    return directory


def load_latent(path: str | Path) -> dict[str, float]:
    out = {}
    for line in lineio.read_lines(path):
        user, value = line.split("\t")
        out[user] = float(value)
    return out


# -- perk-campaign spread simulation ---------------------------------------

@dataclass(frozen=True)
class CampaignParams:
    score_range: tuple[float, float] = (10.0, 80.0)
    bin_width: float = 10.0
    post_prob: float = 0.25
    logistic_slope: float = 1.5
    logistic_center: float | None = None  # defaults to the latent log-mean


@dataclass(frozen=True)
class CampaignBin:
    lo: float
    hi: float
    targeted: int
    posts: int
    mean_reactions: float | None  # None when the bin holds no posts

    @property
    def log_mean(self) -> float | None:
        if self.mean_reactions is None or self.mean_reactions <= 0:
            return None
        return math.log(self.mean_reactions)


@dataclass
class CampaignResult:
    records: tuple[tuple[str, float, bool, int], ...]  # (user, score, posted, reactions)
    bins: tuple[CampaignBin, ...]
    monotone_fraction: float
    slope: float
    p_one_sided: float

    def report_lines(self) -> list[str]:
        lines = [
            "campaign\t"
            f"targeted={len(self.records)}"
            f"\tposts={sum(1 for r in self.records if r[2])}"
            f"\treactions={sum(r[3] for r in self.records)}"
            f"\tmonotone_fraction={self.monotone_fraction:.4f}"
            f"\tslope={self.slope:.6f}\tp_one_sided={self.p_one_sided:.3e}"
        ]
        for b in self.bins:
            mean = "absent" if b.mean_reactions is None else f"{b.mean_reactions:.4f}"
            log_mean = "absent" if b.log_mean is None else f"{b.log_mean:.4f}"
            lines.append(
                f"bin\tlo={b.lo:g}\thi={b.hi:g}\ttargeted={b.targeted}"
                f"\tposts={b.posts}\tmean_reactions={mean}\tlog_mean={log_mean}"
            )
        return lines


def run_campaign(
    pop: SyntheticPopulation,
    scores: ScoreSnapshot | Mapping[str, float],
    params: CampaignParams,
    seed: int,
) -> CampaignResult:
    """Target scored users with a perk and count simulated audience reactions.

    Each audience member of a posting user reacts independently with a
    logistic-in-log-latent probability, so mean reactions grow roughly
    exponentially with latent influence.
    """
    score_map = scores.prior_scores() if isinstance(scores, ScoreSnapshot) else dict(scores)
    lo, hi = params.score_range
    center = params.logistic_center
    if center is None:
        center = float(np.mean([math.log(v) for v in pop.latent.values()]))

    records = []
    for idx, u in enumerate(pop.users):
        score = score_map.get(u)
        if score is None or not lo <= score <= hi:
            continue
        rng = np.random.default_rng((seed, idx))  # per-user stream: order-independent
        posted = bool(rng.random() < params.post_prob)
        reactions = 0
        if posted:
            p = 1.0 / (1.0 + math.exp(-params.logistic_slope * (math.log(pop.latent[u]) - center)))
            reactions = int(rng.binomial(len(pop.audiences[u]), p))
        records.append((u, float(score), posted, reactions))

    bins = []
    edge = lo
    while edge < hi:
        top = min(edge + params.bin_width, hi)
        targeted = [r for r in records if edge <= r[1] < top or (top == hi and r[1] == hi)]
        posts = [r for r in targeted if r[2]]
        mean = float(np.mean([r[3] for r in posts])) if posts else None
        bins.append(CampaignBin(lo=edge, hi=top, targeted=len(targeted), posts=len(posts), mean_reactions=mean))
        edge = top

    present = [b for b in bins if b.mean_reactions is not None]
    adjacent = list(zip(present, present[1:]))
    if adjacent:
        good = sum(1 for a, b in adjacent if b.mean_reactions >= a.mean_reactions)
        monotone_fraction = good / len(adjacent)
    else:
        monotone_fraction = 1.0

    loggable = [b for b in present if b.log_mean is not None]
    if len(loggable) >= 3:
        xs = [(b.lo + b.hi) / 2 for b in loggable]
        ys = [b.log_mean for b in loggable]
        fit = scipy_stats.linregress(xs, ys)
        slope = float(fit.slope)
        p_one_sided = float(fit.pvalue / 2 if slope > 0 else 1 - fit.pvalue / 2)
    else:
        slope, p_one_sided = 0.0, 1.0

    return CampaignResult(
        records=tuple(records),
        bins=tuple(bins),
        monotone_fraction=monotone_fraction,
        slope=slope,
        p_one_sided=p_one_sided,
    )
