"""Line-oriented text codecs for every record type.

One record per line, tab-separated ``key=value`` tokens, values
percent-encoded so that arbitrary strings round-trip bit-exactly.
Numeric attribute values use ``repr(float)`` which round-trips exactly.
"""

from __future__ import annotations

from datetime import date
from pathlib import Path
from typing import Iterable, Iterator
from urllib.parse import quote, unquote

from .events import GraphEdge, InteractionEvent, PairwiseLabel, ProfileSnapshot, UserId


def _enc(value: str) -> str:
    return quote(value, safe="")


def _fields(line: str) -> dict[str, str]:
    out = {}
    for token in line.rstrip("\n").split("\t"):
        key, sep, value = token.partition("=")
        if not sep or not key:
            raise ValueError(f"malformed token {token!r}")
        out[key] = unquote(value)
    return out


def _num(value: float) -> str:
    return repr(float(value))


# -- events ----------------------------------------------------------------

def encode_event(event: InteractionEvent) -> str:
    return "\t".join(
        [
            f"actor={_enc(event.actor.profile_id)}",
            f"author={_enc(event.author.profile_id)}",
            f"network={_enc(event.network)}",
            f"content_type={_enc(event.content_type)}",
            f"action={_enc(event.action)}",
            f"timestamp={event.timestamp}",
        ]
    )


def decode_event(line: str) -> InteractionEvent:
    f = _fields(line)
    return InteractionEvent(
        actor=UserId(f["actor"]),
        author=UserId(f["author"]),
        network=f["network"],
        content_type=f["content_type"],
        action=f["action"],
        timestamp=int(f["timestamp"]),
    )


# -- profiles --------------------------------------------------------------

def encode_profile(profile: ProfileSnapshot) -> str:
    tokens = [
        f"user={_enc(profile.user.profile_id)}",
        f"network={_enc(profile.network)}",
        f"as_of={profile.as_of.isoformat()}",
    ]
    tokens += [f"n:{_enc(k)}={_num(v)}" for k, v in profile.numeric_attrs]
    tokens += [f"c:{_enc(k)}={_enc(v)}" for k, v in profile.categorical_attrs]
    return "\t".join(tokens)


def decode_profile(line: str) -> ProfileSnapshot:
    numeric = []
    categorical = []
    plain = {}
    for token in line.rstrip("\n").split("\t"):
        key, sep, value = token.partition("=")
        if not sep or not key:
            raise ValueError(f"malformed token {token!r}")
        if key.startswith("n:"):
            numeric.append((unquote(key[2:]), float(value)))
        elif key.startswith("c:"):
            categorical.append((unquote(key[2:]), unquote(value)))
        else:
            plain[key] = unquote(value)
    return ProfileSnapshot(
        user=UserId(plain["user"]),
        network=plain["network"],
        as_of=date.fromisoformat(plain["as_of"]),
        numeric_attrs=tuple(numeric),
        categorical_attrs=tuple(categorical),
    )


# -- graph edges -----------------------------------------------------------

def encode_edge(edge: GraphEdge) -> str:
    return "\t".join(
        [
            f"from={_enc(edge.src.profile_id)}",
            f"to={_enc(edge.dst.profile_id)}",
            f"network={_enc(edge.network)}",
        ]
    )


def decode_edge(line: str) -> GraphEdge:
    f = _fields(line)
    return GraphEdge(src=UserId(f["from"]), dst=UserId(f["to"]), network=f["network"])


# -- pairwise labels -------------------------------------------------------

def encode_label(label: PairwiseLabel) -> str:
    return "\t".join(
        [
            f"network={_enc(label.network)}",
            f"user_a={_enc(label.user_a.profile_id)}",
            f"user_b={_enc(label.user_b.profile_id)}",
            f"votes_a={label.votes_a}",
            f"votes_b={label.votes_b}",
        ]
    )


def decode_label(line: str) -> PairwiseLabel:
    f = _fields(line)
    return PairwiseLabel(
        network=f["network"],
        user_a=UserId(f["user_a"]),
        user_b=UserId(f["user_b"]),
        votes_a=int(f["votes_a"]),
        votes_b=int(f["votes_b"]),
    )


# -- files -----------------------------------------------------------------

def write_lines(path: str | Path, lines: Iterable[str]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="\n") as fh:
        for line in lines:
            fh.write(line)
            fh.write("\n")


def read_lines(path: str | Path) -> Iterator[str]:
    with Path(path).open("r") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line:
                yield line
