"""Feature generation: tuple-aggregated dynamic counts, long-lasting
profile/graph signals, and global-max log normalization.

Dynamic aggregation is a commutative, associative fold keyed by
(author, feature key): shards merge by addition, so any author-disjoint
partitioning produces the identical table.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from . import lineio
from .events import SECONDS_PER_DAY, InteractionEvent, MAX_WINDOW_DAYS
from .graph import (
    degree_stats,
    edges_by_network,
    inlink_outlink_ratio,
    pagerank,
)
from .ingest import IngestBatch, partition_by_author
from .registry import FeatureKey, FeatureRegistry

COHORT_ALL = "all"
COHORT_HIGHER = "higher"
COHORT_PEERS = "peers"


@dataclass(frozen=True)
class CohortContext:
    """Audience comparator built from the previous run's score snapshot.

    With no prior scores (bootstrap run) only the ``all`` cohort fires.
    """

    prior_scores: Mapping[str, float] = field(default_factory=dict)
    peer_band: float = 5.0

    def __post_init__(self):
        if self.peer_band <= 0:
            raise ValueError("peer_band must be > 0")


def conditional_emit(
    event: InteractionEvent, cohorts: CohortContext, reference_time: int
) -> list[tuple[str, int]]:
    """Expand one event into (cohort, day-index) emissions.

    ``all`` always fires; ``higher``/``peers`` need prior scores for both
    the actor and the author.
    """
    day_index = int((reference_time - event.timestamp) // SECONDS_PER_DAY)
    out = [(COHORT_ALL, day_index)]
    actor_score = cohorts.prior_scores.get(event.actor.profile_id)
    author_score = cohorts.prior_scores.get(event.author.profile_id)
    if actor_score is None or author_score is None:
        return out
    # higher and peers are disjoint: within the band is a peer, above it is higher
    if actor_score - author_score > cohorts.peer_band:
        out.append((COHORT_HIGHER, day_index))
    elif abs(actor_score - author_score) <= cohorts.peer_band:
        out.append((COHORT_PEERS, day_index))
    return out


def multiday_sketch(
    day_counts: Mapping[int, int], windows: tuple[int, ...]
) -> dict[int, int]:
    """Expand per-day buckets into trailing-window counts via prefix sums."""
    max_window = max(windows)
    prefix = [0] * (max_window + 1)
    for day, count in day_counts.items():
        if not 0 <= day < max_window:
            raise ValueError(f"day index {day} outside [0, {max_window})")
        prefix[day + 1] += count
    for i in range(1, len(prefix)):
        prefix[i] += prefix[i - 1]
    return {w: prefix[w] for w in windows}


@dataclass
class RawFeatureTable:
    """Sparse (user, feature key) -> non-negative raw value."""

    values: dict[tuple[str, FeatureKey], float] = field(default_factory=dict)

    def add(self, user: str, key: FeatureKey, value: float) -> None:
        if value < 0:
            raise ValueError("feature values must be >= 0")
        cell = (user, key)
        self.values[cell] = self.values.get(cell, 0.0) + value

    def merge(self, other: "RawFeatureTable") -> None:
        for cell, value in other.values.items():
            self.values[cell] = self.values.get(cell, 0.0) + value

    def get(self, user: str, key: FeatureKey) -> float:
        return self.values.get((user, key), 0.0)

    def users_by_network(self) -> dict[str, set[str]]:
        out: dict[str, set[str]] = defaultdict(set)
        for (user, key), _ in self.values.items():
            out[key.network].add(user)
        return out


def _aggregate_shard(
    batch: IngestBatch, cohorts: CohortContext, registry: FeatureRegistry
) -> RawFeatureTable:
    day_buckets: dict[tuple[str, str, str, str, str], Counter] = defaultdict(Counter)
    for author, events in batch.events_by_author.items():
        for event in events:
            if not registry.networks[event.network].dynamic:
                continue
            for cohort, day in conditional_emit(event, cohorts, batch.reference_time):
                day_buckets[(author, event.network, event.content_type, event.action, cohort)][day] += 1

    table = RawFeatureTable()
    for (author, network, content, action, cohort), days in day_buckets.items():
        for window, count in multiday_sketch(days, registry.windows).items():
            if count > 0:
                key = FeatureKey.dynamic(network, content, action, cohort, window)
                table.add(author, key, float(count))
    return table


def aggregate_dynamic(
    batch: IngestBatch,
    cohorts: CohortContext,
    registry: FeatureRegistry,
    shards: int = 1,
) -> RawFeatureTable:
    """Single pass over events, then window expansion; O(event count)."""
    table = RawFeatureTable()
    for shard in partition_by_author(batch, shards):
        table.merge(_aggregate_shard(shard, cohorts, registry))
    return table


def aggregate_longlasting(batch: IngestBatch, registry: FeatureRegistry) -> tuple[RawFeatureTable, int]:
    """Profile and graph signals; returns (table, skipped attr count).

    Categorical attributes are mapped to 1-based ordinal ranks; unknown
    category values map to 0. PageRank and the inlink/outlink ratio are
    derived from the edge set for networks that register those attrs.
    """
    table = RawFeatureTable()
    skipped = 0
    for (user, network), profile in batch.profiles.items():
        registered = registry.networks[network].longlasting_attrs
        for name, value in profile.numeric_attrs:
            if name in registered:
                table.add(user, FeatureKey.longlasting(network, name), value)
            else:
                skipped += 1
        for name, category in profile.categorical_attrs:
            if name in registered:
                table.add(user, FeatureKey.longlasting(network, name), registry.ordinal_value(name, category))
            else:
                skipped += 1

    for network, pairs in sorted(edges_by_network(batch.edges).items()):
        registered = registry.networks[network].longlasting_attrs
        if "pagerank" in registered and pairs:
            result = pagerank(pairs)
            key = FeatureKey.longlasting(network, "pagerank")
            for user, score in result.scores.items():
                table.add(user, key, score)
        if "inlink_outlink_ratio" in registered and pairs:
            indeg, outdeg = degree_stats(pairs)
            key = FeatureKey.longlasting(network, "inlink_outlink_ratio")
            for user, ratio in inlink_outlink_ratio(indeg, outdeg).items():
                table.add(user, key, ratio)
        if "inlinks" in registered and pairs:
            indeg, _ = degree_stats(pairs)
            key = FeatureKey.longlasting(network, "inlinks")
            for user, deg in indeg.items():
                table.add(user, key, float(deg))
    return table, skipped


def compute_global_maxima(table: RawFeatureTable) -> dict[FeatureKey, float]:
    maxima: dict[FeatureKey, float] = {}
    for (_, key), value in table.values.items():
        if value > maxima.get(key, 0.0):
            maxima[key] = value
    return maxima


def normalize(raw: float, maximum: float) -> float:
    """Log normalization against the population maximum: ln(1+x)/ln(1+max).

    Raw feature distributions are heavy-tailed; the log keeps the top of
    the range from swamping everything else while landing in [0,1].
    """
    if raw < 0:
        raise ValueError("raw value must be >= 0")
    if raw > maximum:
        raise ValueError(f"raw value {raw} exceeds recorded maximum {maximum}; stale maxima")
    if maximum == 0:
        return 0.0
    return math.log1p(raw) / math.log1p(maximum)


@dataclass
class FeatureStore:
    """Dense normalized vectors per (user, network), aligned to the frozen
    per-network key ordering."""

    registry: FeatureRegistry
    vectors: dict[tuple[str, str], np.ndarray] = field(default_factory=dict)

    def get(self, user: str, network: str) -> np.ndarray | None:
        return self.vectors.get((user, network))

    def networks_of(self, user: str) -> list[str]:
        return sorted(n for (u, n) in self.vectors if u == user)

    def users(self) -> list[str]:
        return sorted({u for (u, _) in self.vectors})


def build_store(
    table: RawFeatureTable,
    maxima: Mapping[FeatureKey, float],
    registry: FeatureRegistry,
) -> FeatureStore:
    """Normalize the raw table into dense per-(user, network) vectors.

    A user gets a vector for a network iff the raw table holds at least one
    entry for them there (event activity, profile, or graph presence).
    """
    key_index: dict[str, dict[FeatureKey, int]] = {}
    sizes: dict[str, int] = {}
    for network in registry.networks:
        keys = registry.keys_for(network)
        key_index[network] = {k: i for i, k in enumerate(keys)}
        sizes[network] = len(keys)

    store = FeatureStore(registry=registry)
    for (user, key), raw in table.values.items():
        idx = key_index[key.network].get(key)
        if idx is None:
            continue
        cell = (user, key.network)
        vec = store.vectors.get(cell)
        if vec is None:
            vec = np.zeros(sizes[key.network])
            store.vectors[cell] = vec
        vec[idx] = normalize(raw, maxima.get(key, 0.0))
    return store


# -- dumps -----------------------------------------------------------------

def dump_table(table: RawFeatureTable, path: str | Path) -> None:
    lines = [
        f"{user}\t{key.canonical()}\t{repr(value)}"
        for (user, key), value in sorted(
            table.values.items(), key=lambda cell: (cell[0][0], cell[0][1].canonical())
        )
    ]
    lineio.write_lines(path, lines)


def load_table(path: str | Path) -> RawFeatureTable:
    table = RawFeatureTable()
    for line in lineio.read_lines(path):
        user, key, value = line.split("\t")
        table.add(user, FeatureKey.parse(key), float(value))
    return table


def dump_maxima(maxima: Mapping[FeatureKey, float], path: str | Path) -> None:
    lines = [
        f"{key.canonical()}\t{repr(value)}"
        for key, value in sorted(maxima.items(), key=lambda kv: kv[0].canonical())
    ]
    lineio.write_lines(path, lines)


def load_maxima(path: str | Path) -> dict[FeatureKey, float]:
    out = {}
    for line in lineio.read_lines(path):
        key, value = line.split("\t")
        out[FeatureKey.parse(key)] = float(value)
    return out
