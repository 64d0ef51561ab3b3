"""Run-time registry of networks, dimensions, and the frozen feature space.

The registry is the single source of truth for which feature keys exist for
each network; every feature vector, weight vector, and model file is aligned
to the key ordering frozen here.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .events import WINDOW_DAYS

KIND_DYNAMIC = "dyn"
KIND_LONGLASTING = "ll"

DEFAULT_COHORTS = ("all", "higher", "peers")
DEFAULT_PEER_BAND = 5.0


@dataclass(frozen=True, order=True)
class FeatureKey:
    """Canonical identity of one aggregated feature.

    Canonical string forms:
      dyn/<network>/<content>/<action>/<cohort>/<window>d
      ll/<network>/<attr>
    """

    kind: str
    network: str
    content_type: str = ""
    action: str = ""
    cohort: str = ""
    window_days: int = 0
    attr_name: str = ""

    def canonical(self) -> str:
        if self.kind == KIND_DYNAMIC:
            return (
                f"dyn/{self.network}/{self.content_type}/{self.action}"
                f"/{self.cohort}/{self.window_days}d"
            )
        return f"ll/{self.network}/{self.attr_name}"

    @classmethod
    def dynamic(cls, network, content_type, action, cohort, window_days) -> "FeatureKey":
        return cls(
            kind=KIND_DYNAMIC,
            network=network,
            content_type=content_type,
            action=action,
            cohort=cohort,
            window_days=window_days,
        )

    @classmethod
    def longlasting(cls, network, attr_name) -> "FeatureKey":
        return cls(kind=KIND_LONGLASTING, network=network, attr_name=attr_name)

    @classmethod
    def parse(cls, text: str) -> "FeatureKey":
        parts = text.split("/")
        if parts[0] == KIND_DYNAMIC and len(parts) == 6 and parts[5].endswith("d"):
            return cls.dynamic(parts[1], parts[2], parts[3], parts[4], int(parts[5][:-1]))
        if parts[0] == KIND_LONGLASTING and len(parts) == 3:
            return cls.longlasting(parts[1], parts[2])
        raise ValueError(f"unparseable feature key: {text!r}")


@dataclass(frozen=True)
class NetworkSpec:
    name: str
    content_types: tuple[str, ...] = ()
    actions: tuple[str, ...] = ()
    longlasting_attrs: tuple[str, ...] = ()
    dynamic: bool = True


@dataclass(frozen=True)
class FeatureRegistry:
    networks: dict[str, NetworkSpec]
    cohorts: tuple[str, ...] = DEFAULT_COHORTS
    windows: tuple[int, ...] = WINDOW_DAYS
    ordinal_maps: dict[str, tuple[str, ...]] = field(default_factory=dict)
    peer_band: float = DEFAULT_PEER_BAND

    def __post_init__(self):
        for name, spec in self.networks.items():
            if name != name.lower():
                raise ValueError(f"network names are lowercase: {name!r}")
            if name != spec.name:
                raise ValueError(f"network key {name!r} != spec name {spec.name!r}")
        for w in self.windows:
            if w not in WINDOW_DAYS:
                raise ValueError(f"window {w} not in supported set {WINDOW_DAYS}")

    # -- feature space -----------------------------------------------------

    def dynamic_keys(self, network: str) -> list[FeatureKey]:
        spec = self.networks[network]
        if not spec.dynamic:
            return []
        return [
            FeatureKey.dynamic(network, c, a, coh, w)
            for c in spec.content_types
            for a in spec.actions
            for coh in self.cohorts
            for w in self.windows
        ]

    def longlasting_keys(self, network: str) -> list[FeatureKey]:
        spec = self.networks[network]
        return [FeatureKey.longlasting(network, attr) for attr in spec.longlasting_attrs]

    def keys_for(self, network: str) -> tuple[FeatureKey, ...]:
        """Frozen total ordering of the network's feature space."""
        keys = self.dynamic_keys(network) + self.longlasting_keys(network)
        return tuple(sorted(keys, key=FeatureKey.canonical))

    def dynamic_key_count(self, network: str) -> int:
        spec = self.networks[network]
        if not spec.dynamic:
            return 0
        return (
            len(spec.content_types)
            * len(spec.actions)
            * len(self.cohorts)
            * len(self.windows)
        )

    def registry_hash(self, network: str) -> str:
        payload = "\n".join(k.canonical() for k in self.keys_for(network))
        return hashlib.sha256(payload.encode()).hexdigest()[:16]

    def scorable_networks(self) -> list[str]:
        """Networks that carry dynamic features (leaf candidates)."""
        return sorted(n for n, s in self.networks.items() if s.dynamic)

    def ordinal_value(self, attr_name: str, category: str) -> float:
        """Ordinal rank of a categorical value: 1-based position, unknown -> 0."""
        ordered = self.ordinal_maps.get(attr_name, ())
        try:
            return float(ordered.index(category) + 1)
        except ValueError:
            return 0.0

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "cohorts": list(self.cohorts),
            "windows": list(self.windows),
            "peer_band": self.peer_band,
            "ordinal_maps": {k: list(v) for k, v in sorted(self.ordinal_maps.items())},
            "networks": {
                name: {
                    "content_types": list(spec.content_types),
                    "actions": list(spec.actions),
                    "longlasting_attrs": list(spec.longlasting_attrs),
                    "dynamic": spec.dynamic,
                }
                for name, spec in sorted(self.networks.items())
            },
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def from_dict(cls, data: dict) -> "FeatureRegistry":
        networks = {
            name.lower(): NetworkSpec(
                name=name.lower(),
                content_types=tuple(nd.get("content_types", ())),
                actions=tuple(nd.get("actions", ())),
                longlasting_attrs=tuple(nd.get("longlasting_attrs", ())),
                dynamic=bool(nd.get("dynamic", True)),
            )
            for name, nd in data["networks"].items()
        }
        return cls(
            networks=networks,
            cohorts=tuple(data.get("cohorts", DEFAULT_COHORTS)),
            windows=tuple(data.get("windows", WINDOW_DAYS)),
            ordinal_maps={k: tuple(v) for k, v in data.get("ordinal_maps", {}).items()},
            peer_band=float(data.get("peer_band", DEFAULT_PEER_BAND)),
        )

    @classmethod
    def load(cls, path: str | Path) -> "FeatureRegistry":
        return cls.from_dict(json.loads(Path(path).read_text()))


def default_registry() -> FeatureRegistry:
    """Registry mirroring the shipped multi-network configuration.

    Wikipedia (wk) carries only graph and profile signals, never dynamic
    interaction features.
    """
    content = ("message", "photo", "video")
    actions = ("comment", "reply", "like", "mention", "reshare", "view")
    social = {}
    degree_attrs = {
        "tw": ("followers", "friends"),
        "fb": ("fans", "friends"),
        "li": ("connections",),
        "gp": ("followers",),
        "fs": ("friends",),
        "ig": ("followers",),
        "yt": ("subscribers",),
        "lt": ("community_badge", "posts"),
    }
    for name in ("tw", "fb", "li", "gp", "fs", "ig", "yt", "lt"):
        social[name] = NetworkSpec(
            name=name,
            content_types=content,
            actions=actions,
            longlasting_attrs=degree_attrs[name],
            dynamic=True,
        )
    social["wk"] = NetworkSpec(
        name="wk",
        longlasting_attrs=("inlinks", "pagerank", "inlink_outlink_ratio"),
        dynamic=False,
    )
    return FeatureRegistry(
        networks=social,
        ordinal_maps={
            "community_badge": ("member", "contributor", "expert", "moderator"),
        },
    )
