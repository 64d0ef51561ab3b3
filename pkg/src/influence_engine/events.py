"""Normalized data model shared by every stage of the scoring pipeline."""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date, datetime, timezone

SECONDS_PER_DAY = 86400

# Trailing-window lengths (days) available for dynamic feature aggregation.
WINDOW_DAYS = (3, 7, 14, 21, 30, 60, 90)

MAX_WINDOW_DAYS = WINDOW_DAYS[-1]


@dataclass(frozen=True)
class UserId:
    """Canonical cross-network identity.

    Equality and hashing are on ``profile_id`` only; ``network_ids`` is
    descriptive metadata (one account per network at most).
    """

    profile_id: str
    network_ids: tuple[tuple[str, str], ...] = field(default=(), compare=False)

    def __post_init__(self):
        if not self.profile_id:
            raise ValueError("profile_id must be non-empty")
        networks = [n for n, _ in self.network_ids]
        if len(networks) != len(set(networks)):
            raise ValueError("duplicate network in network_ids")


@dataclass(frozen=True)
class InteractionEvent:
    """One reaction: ``actor`` reacted to content authored by ``author``."""

    actor: UserId
    author: UserId
    network: str
    content_type: str
    action: str
    timestamp: int  # seconds since epoch, UTC

    def dedup_key(self) -> tuple:
        return (
            self.actor.profile_id,
            self.author.profile_id,
            self.network,
            self.content_type,
            self.action,
            self.timestamp,
        )


@dataclass(frozen=True)
class ProfileSnapshot:
    user: UserId
    network: str
    as_of: date
    numeric_attrs: tuple[tuple[str, float], ...] = ()
    categorical_attrs: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        for name, value in self.numeric_attrs:
            if value < 0:
                raise ValueError(f"numeric attr {name!r} must be >= 0")


@dataclass(frozen=True)
class GraphEdge:
    src: UserId
    dst: UserId
    network: str

    def __post_init__(self):
        if self.src.profile_id == self.dst.profile_id:
            raise ValueError("self-loops are not allowed")


@dataclass(frozen=True)
class PairwiseLabel:
    """One human judgment comparing two users on one network."""

    network: str
    user_a: UserId
    user_b: UserId
    votes_a: int
    votes_b: int

    def __post_init__(self):
        if self.user_a.profile_id == self.user_b.profile_id:
            raise ValueError("label must compare two distinct users")
        if self.votes_a < 0 or self.votes_b < 0:
            raise ValueError("vote counts must be >= 0")


@dataclass(frozen=True)
class TimeWindow:
    """Half-open trailing window [reference_time - span, reference_time)."""

    reference_time: int
    span_days: int

    def __post_init__(self):
        if self.span_days not in WINDOW_DAYS:
            raise ValueError(f"span_days must be one of {WINDOW_DAYS}")

    @property
    def start(self) -> int:
        return self.reference_time - self.span_days * SECONDS_PER_DAY

    def contains(self, timestamp: int) -> bool:
        # an event exactly span_days old is already outside the window
        return self.start < timestamp < self.reference_time

    def reference_date(self) -> date:
        return datetime.fromtimestamp(self.reference_time, tz=timezone.utc).date()


@dataclass(frozen=True)
class Rejection:
    """A rejected record with a machine-readable reason code."""

    reason: str
    detail: str = ""


REJECT_UNKNOWN_NETWORK = "unknown-network"
REJECT_UNKNOWN_ACTION = "unknown-action"
REJECT_UNKNOWN_CONTENT = "unknown-content"
REJECT_SELF_REACTION = "self-reaction"
REJECT_BAD_TIMESTAMP = "bad-timestamp"


def validate_event(raw: InteractionEvent, registry) -> InteractionEvent | Rejection:
    """Check one event against the dimension registry.

    Rejections are values, never exceptions: a dirty log line must not be
    able to abort a batch.
    """
    if raw.actor.profile_id == raw.author.profile_id:
        return Rejection(REJECT_SELF_REACTION, raw.actor.profile_id)
    if raw.timestamp <= 0:
        return Rejection(REJECT_BAD_TIMESTAMP, str(raw.timestamp))
    spec = registry.networks.get(raw.network)
    if spec is None:
        return Rejection(REJECT_UNKNOWN_NETWORK, raw.network)
    if raw.content_type not in spec.content_types:
        return Rejection(REJECT_UNKNOWN_CONTENT, f"{raw.network}:{raw.content_type}")
    if raw.action not in spec.actions:
        return Rejection(REJECT_UNKNOWN_ACTION, f"{raw.network}:{raw.action}")
    return raw
