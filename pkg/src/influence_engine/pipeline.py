"""Pipeline orchestration: stage execution, persistence, and manifests.

Stages communicate only through files in the output directory, so any
stage can be re-run in isolation and reproduces its outputs bit-exactly
from the upstream artifacts.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import features as feat
from . import lineio
from .evaluation import (
    load_reference,
    ndcg,
    order_by_external_scores,
    rank_correlation,
)
from .features import CohortContext, FeatureStore
from .graph import edges_by_network, graph_summary
from .hierarchy import (
    ScoreSnapshot,
    load_snapshot,
    load_tree,
    save_snapshot,
    score_population,
)
from .ingest import InputPaths, load_batch
from .population import (
    CampaignParams,
    PopulationParams,
    generate_population,
    load_latent,
    run_campaign,
)
from .registry import FeatureKey, FeatureRegistry
from .training import load_model, preprocess_labels, save_model, train_network

STAGES = ("ingest", "features", "train", "score", "evaluate", "simulate")


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: str):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass(frozen=True)
class RunConfig:
    input_dir: Path
    registry_path: Path
    tree_path: Path
    reference_time: int
    seed: int = 0
    shards: int = 1
    prior_snapshot: Path | None = None
    holdout_fraction: float = 0.2
    nnls_tol: float = 1e-10
    latent_path: Path | None = None
    reference_rankings: tuple[Path, ...] = ()
    population_path: Path | None = None
    campaign: CampaignParams = field(default_factory=CampaignParams)

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        base = Path(path).parent
        data = json.loads(Path(path).read_text())

        def resolve(key):
            return (base / data[key]).resolve() if data.get(key) else None

        campaign = data.get("campaign", {})
        if "score_range" in campaign:
            campaign["score_range"] = tuple(campaign["score_range"])
        return cls(
            input_dir=resolve("input_dir"),
            registry_path=resolve("registry"),
            tree_path=resolve("tree"),
            reference_time=int(data["reference_time"]),
            seed=int(data.get("seed", 0)),
            shards=int(data.get("shards", 1)),
            prior_snapshot=resolve("prior_snapshot"),
            holdout_fraction=float(data.get("holdout_fraction", 0.2)),
            nnls_tol=float(data.get("nnls_tol", 1e-10)),
            latent_path=resolve("latent"),
            reference_rankings=tuple(
                (base / p).resolve() for p in data.get("reference_rankings", ())
            ),
            population_path=resolve("population"),
            campaign=CampaignParams(**campaign),
        )

    def config_digest(self) -> str:
        payload = json.dumps(
            {
                "input_dir": str(self.input_dir),
                "registry": str(self.registry_path),
                "tree": str(self.tree_path),
                "reference_time": self.reference_time,
                "seed": self.seed,
                "shards": self.shards,
                "prior_snapshot": str(self.prior_snapshot),
                "holdout_fraction": self.holdout_fraction,
                "nnls_tol": self.nnls_tol,
                "latent": str(self.latent_path),
                "reference_rankings": [str(p) for p in self.reference_rankings],
                "population": str(self.population_path),
                "campaign": repr(self.campaign),
            },
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode()).hexdigest()


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _load_registry(cfg: RunConfig) -> FeatureRegistry:
    return FeatureRegistry.load(cfg.registry_path)


def _normalized_path(out: Path) -> Path:
    return out / "features" / "normalized_features.txt"


def load_store(path: Path, registry: FeatureRegistry) -> FeatureStore:
    import numpy as np

    key_index: dict[str, dict] = {}
    sizes: dict[str, int] = {}
    store = FeatureStore(registry=registry)
    for line in lineio.read_lines(path):
        user, key_text, value = line.split("\t")
        key = FeatureKey.parse(key_text)
        network = key.network
        if network not in key_index:
            keys = registry.keys_for(network)
            key_index[network] = {k: i for i, k in enumerate(keys)}
            sizes[network] = len(keys)
        cell = (user, network)
        vec = store.vectors.get(cell)
        if vec is None:
            vec = np.zeros(sizes[network])
            store.vectors[cell] = vec
        vec[key_index[network][key]] = float(value)
    return store


# -- stages ----------------------------------------------------------------

def stage_ingest(cfg: RunConfig, out: Path) -> dict[str, int]:
    registry = _load_registry(cfg)
    batch, report = load_batch(
        InputPaths.in_dir(cfg.input_dir), cfg.reference_time, registry
    )
    dest = out / "ingest"
    event_lines = sorted(
        lineio.encode_event(e)
        for events in batch.events_by_author.values()
        for e in events
    )
    lineio.write_lines(dest / "events.txt", event_lines)
    lineio.write_lines(
        dest / "profiles.txt",
        sorted(lineio.encode_profile(p) for p in batch.profiles.values()),
    )
    lineio.write_lines(dest / "edges.txt", sorted(lineio.encode_edge(e) for e in batch.edges))
    lineio.write_lines(dest / "labels.txt", sorted(lineio.encode_label(l) for l in batch.labels))
    lineio.write_lines(dest / "load_report.txt", [report.summary_line()])
    print(report.summary_line())
    return {
        "accepted_events": report.accepted_events,
        "profiles": report.profiles,
        "edges": report.edges,
        "labels": report.labels,
    }


def _reload_batch(cfg: RunConfig, out: Path):
    registry = _load_registry(cfg)
    batch, _ = load_batch(InputPaths.in_dir(out / "ingest"), cfg.reference_time, registry)
    return batch, registry


def stage_features(cfg: RunConfig, out: Path) -> dict[str, int]:
    batch, registry = _reload_batch(cfg, out)
    prior = {}
    if cfg.prior_snapshot is not None:
        prior = load_snapshot(cfg.prior_snapshot).prior_scores()
    cohorts = CohortContext(prior_scores=prior, peer_band=registry.peer_band)

    table = feat.aggregate_dynamic(batch, cohorts, registry, shards=cfg.shards)
    longlasting, _ = feat.aggregate_longlasting(batch, registry)
    table.merge(longlasting)
    maxima = feat.compute_global_maxima(table)

    dest = out / "features"
    feat.dump_table(table, dest / "raw_features.txt")
    feat.dump_maxima(maxima, dest / "maxima.txt")

    lines = []
    for (user, key), raw in sorted(
        table.values.items(), key=lambda cell: (cell[0][0], cell[0][1].canonical())
    ):
        lines.append(f"{user}\t{key.canonical()}\t{repr(feat.normalize(raw, maxima[key]))}")
    lineio.write_lines(_normalized_path(out), lines)
    return {"raw_cells": len(table.values), "feature_keys": len(maxima)}


def stage_train(cfg: RunConfig, out: Path) -> dict[str, int]:
    batch, registry = _reload_batch(cfg, out)
    store = load_store(_normalized_path(out), registry)
    pairs = preprocess_labels(batch.labels)

    models_dir = out / "models"
    report_lines = []
    trained = 0
    for network in registry.scorable_networks():
        net_pairs = [p for p in pairs if p.network == network]
        if not net_pairs:
            report_lines.append(f"model\tnetwork={network}\tskipped=no-pairs")
            continue
        w, report = train_network(
            net_pairs,
            store,
            registry,
            network,
            holdout_fraction=cfg.holdout_fraction,
            seed=cfg.seed,
            tol=cfg.nnls_tol,
        )
        save_model(w, registry, models_dir / f"{network}.model")
        report_lines.append(report.summary_line())
        trained += 1
    lineio.write_lines(out / "model_report.txt", report_lines)
    for line in report_lines:
        print(line)
    return {"clean_pairs": len(pairs), "models": trained}


def stage_score(cfg: RunConfig, out: Path) -> dict[str, int]:
    batch, registry = _reload_batch(cfg, out)
    store = load_store(_normalized_path(out), registry)
    tree = load_tree(cfg.tree_path)

    models = {}
    for node in tree.walk():
        if node.is_leaf and node.network not in models:
            model_path = out / "models" / f"{node.network}.model"
            if not model_path.exists():
                raise StageError("score", f"missing model file {model_path}")
            models[node.network] = load_model(model_path, registry)

    stats = {
        network: graph_summary(pairs)
        for network, pairs in edges_by_network(batch.edges).items()
    }
    snapshot = score_population(
        tree, store, models, stats, as_of=batch.window.reference_date()
    )
    save_snapshot(snapshot, out / "snapshot.txt")
    return {"scored_users": len(snapshot.entries)}


def stage_evaluate(cfg: RunConfig, out: Path) -> dict[str, int]:
    snapshot = load_snapshot(out / "snapshot.txt")
    lines = []
    checks = 0
    if cfg.latent_path is not None:
        rho = rank_correlation(snapshot.prior_scores(), load_latent(cfg.latent_path))
        lines.append(f"latent_spearman\trho={repr(rho)}")
        checks += 1
    for path in cfg.reference_rankings:
        reference = load_reference(path)
        p = len(reference.ordered_entities)
        evaluated = order_by_external_scores(reference)
        value = ndcg(reference, evaluated, p)
        lines.append(f"ndcg\treference={reference.name}\tp={p}\tvalue={repr(value)}")
        checks += 1
    lineio.write_lines(out / "eval_report.txt", lines)
    for line in lines:
        print(line)
    return {"evaluations": checks}


def stage_simulate(cfg: RunConfig, out: Path) -> dict[str, int]:
    if cfg.population_path is None:
        raise StageError("simulate", "config has no population descriptor")
    data = json.loads(Path(cfg.population_path).read_text())
    pop = generate_population(PopulationParams.from_dict(data["params"]), data["seed"])
    snapshot = load_snapshot(out / "snapshot.txt")
    result = run_campaign(pop, snapshot, cfg.campaign, cfg.seed)
    lineio.write_lines(out / "campaign_report.txt", result.report_lines())
    for line in result.report_lines():
        print(line)
    return {"targeted": len(result.records)}


_STAGE_FUNCS = {
    "ingest": stage_ingest,
    "features": stage_features,
    "train": stage_train,
    "score": stage_score,
    "evaluate": stage_evaluate,
    "simulate": stage_simulate,
}


def stages_for_mode(cfg: RunConfig, mode: str) -> list[str]:
    if mode == "all":
        stages = ["ingest", "features", "train", "score"]
        if cfg.latent_path is not None or cfg.reference_rankings:
            stages.append("evaluate")
        if cfg.population_path is not None:
            stages.append("simulate")
        return stages
    if mode not in STAGES:
        raise ValueError(f"unknown mode {mode!r}")
    return [mode]


def run_pipeline(cfg: RunConfig, out: str | Path, mode: str = "all") -> Path:
    """Execute the requested stages and write a deterministic manifest.

    Wall-clock timings go to a separate file so the manifest is a pure
    function of inputs, config, and seed.
    """
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    counts: dict[str, dict[str, int]] = {}
    timings = []
    for stage in stages_for_mode(cfg, mode):
        started = time.monotonic()
        try:
            counts[stage] = _STAGE_FUNCS[stage](cfg, out)
        except StageError:
            raise
        except Exception as exc:  # noqa: BLE001 - rewrap with the stage name
            raise StageError(stage, str(exc)) from exc
        timings.append(f"{stage}\t{time.monotonic() - started:.3f}s")
    lineio.write_lines(out / "timings.txt", timings)
    write_manifest(cfg, out, counts)
    return out / "manifest.txt"


def write_manifest(cfg: RunConfig, out: Path, counts: dict[str, dict[str, int]]) -> None:
    lines = [f"config_hash={cfg.config_digest()}"]
    for name in ("events.txt", "profiles.txt", "edges.txt", "labels.txt"):
        path = cfg.input_dir / name
        if path.exists():
            lines.append(f"input.{name}.sha256={_sha256(path)}")
    for stage in STAGES:
        for key, value in sorted(counts.get(stage, {}).items()):
            lines.append(f"stage.{stage}.{key}={value}")
    for path in sorted(out.rglob("*")):
        if path.is_file() and path.name not in ("manifest.txt", "timings.txt"):
            rel = path.relative_to(out).as_posix()
            lines.append(f"output.{rel}.sha256={_sha256(path)}")
    lineio.write_lines(out / "manifest.txt", lines)


def rank_cohort(snapshot: ScoreSnapshot, users: list[str]) -> list[tuple[str, float | None]]:
    """Descending score order, id tie-break; unknown users trail unscored."""
    scored = []
    unknown = []
    for user in users:
        score = snapshot.overall(user)
        if score is None:
            unknown.append(user)
        else:
            scored.append((user, score))
    scored.sort(key=lambda us: (-us[1], us[0]))
    return scored + [(u, None) for u in sorted(unknown)]
