"""Batch loading: validation, trailing-window filtering, dedup, sharding."""

from __future__ import annotations

import zlib
from collections import Counter
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import lineio
from .events import (
    MAX_WINDOW_DAYS,
    GraphEdge,
    InteractionEvent,
    PairwiseLabel,
    ProfileSnapshot,
    Rejection,
    TimeWindow,
    validate_event,
)
from .registry import FeatureRegistry


@dataclass(frozen=True)
class InputPaths:
    events: Path
    profiles: Path
    edges: Path
    labels: Path

    @classmethod
    def in_dir(cls, directory: str | Path) -> "InputPaths":
        d = Path(directory)
        return cls(
            events=d / "events.txt",
            profiles=d / "profiles.txt",
            edges=d / "edges.txt",
            labels=d / "labels.txt",
        )


@dataclass
class LoadReport:
    accepted_events: int = 0
    expired_events: int = 0
    duplicate_events: int = 0
    malformed_lines: int = 0
    rejected: Counter = field(default_factory=Counter)
    profiles: int = 0
    stale_profiles: int = 0
    edges: int = 0
    labels: int = 0

    def summary_line(self) -> str:
        parts = [
            f"accepted={self.accepted_events}",
            f"expired={self.expired_events}",
            f"duplicates={self.duplicate_events}",
            f"malformed={self.malformed_lines}",
            f"profiles={self.profiles}",
            f"stale_profiles={self.stale_profiles}",
            f"edges={self.edges}",
            f"labels={self.labels}",
        ]
        parts += [f"rejected.{reason}={n}" for reason, n in sorted(self.rejected.items())]
        return "load_report\t" + "\t".join(parts)


@dataclass(frozen=True)
class IngestBatch:
    """Validated, deduplicated, window-filtered inputs for one scoring run."""

    events_by_author: dict[str, tuple[InteractionEvent, ...]]
    profiles: dict[tuple[str, str], ProfileSnapshot]  # (profile_id, network)
    edges: tuple[GraphEdge, ...]
    labels: tuple[PairwiseLabel, ...]
    reference_time: int

    @property
    def window(self) -> TimeWindow:
        return TimeWindow(self.reference_time, MAX_WINDOW_DAYS)

    def event_count(self) -> int:
        return sum(len(v) for v in self.events_by_author.values())

    def authors(self) -> list[str]:
        return sorted(self.events_by_author)


def load_batch(
    paths: InputPaths, reference_time: int, registry: FeatureRegistry
) -> tuple[IngestBatch, LoadReport]:
    """Read all input files into one immutable batch.

    Unreadable files are fatal; malformed lines are counted and skipped so a
    single dirty record cannot kill a run.
    """
    report = LoadReport()
    window = TimeWindow(reference_time, MAX_WINDOW_DAYS)
    ref_date = window.reference_date()

    events_by_author: dict[str, list[InteractionEvent]] = {}
    seen: set[tuple] = set()
    for line in lineio.read_lines(paths.events):
        try:
            raw = lineio.decode_event(line)
        except (ValueError, KeyError):
            report.malformed_lines += 1
            continue
        checked = validate_event(raw, registry)
        if isinstance(checked, Rejection):
            report.rejected[checked.reason] += 1
            continue
        if not window.contains(checked.timestamp):
            report.expired_events += 1
            continue
        key = checked.dedup_key()
        if key in seen:
            report.duplicate_events += 1
            continue
        seen.add(key)
        events_by_author.setdefault(checked.author.profile_id, []).append(checked)
        report.accepted_events += 1

    profiles: dict[tuple[str, str], ProfileSnapshot] = {}
    for line in lineio.read_lines(paths.profiles):
        try:
            profile = lineio.decode_profile(line)
        except (ValueError, KeyError):
            report.malformed_lines += 1
            continue
        if profile.network not in registry.networks or profile.as_of > ref_date:
            report.stale_profiles += 1
            continue
        key = (profile.user.profile_id, profile.network)
        current = profiles.get(key)
        if current is None or profile.as_of > current.as_of:
            profiles[key] = profile
    report.profiles = len(profiles)

    edges = []
    for line in lineio.read_lines(paths.edges):
        try:
            edge = lineio.decode_edge(line)
        except (ValueError, KeyError):
            report.malformed_lines += 1
            continue
        if edge.network not in registry.networks:
            report.rejected["unknown-network"] += 1
            continue
        edges.append(edge)
    report.edges = len(edges)

    labels = []
    for line in lineio.read_lines(paths.labels):
        try:
            label = lineio.decode_label(line)
        except (ValueError, KeyError):
            report.malformed_lines += 1
            continue
        if label.network not in registry.networks:
            report.rejected["unknown-network"] += 1
            continue
        labels.append(label)
    report.labels = len(labels)

    batch = IngestBatch(
        events_by_author={a: tuple(evs) for a, evs in events_by_author.items()},
        profiles=profiles,
        edges=tuple(edges),
        labels=tuple(labels),
        reference_time=reference_time,
    )
    return batch, report


def shard_of(profile_id: str, shards: int) -> int:
    # crc32 rather than hash(): stable across processes and runs
    return zlib.crc32(profile_id.encode()) % shards


def partition_by_author(batch: IngestBatch, shards: int) -> list[IngestBatch]:
    """Split the batch into author-disjoint sub-batches.

    Profiles, edges, and labels are shared by reference; only the event
    groups are partitioned. The union of shard events equals the batch.
    """
    if shards < 1:
        raise ValueError("shards must be >= 1")
    if shards == 1:
        return [batch]
    groups: list[dict[str, tuple[InteractionEvent, ...]]] = [{} for _ in range(shards)]
    for author, events in batch.events_by_author.items():
        groups[shard_of(author, shards)][author] = events
    return [replace(batch, events_by_author=g) for g in groups]
