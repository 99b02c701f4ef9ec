"""End-to-end mining run: model, traces, projection, clustering, tree, formulas."""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from . import boxtree, clustering, spatial, traces
from .errors import ConfigError, StrelMinerError
from .formula import Formula
from .monitor import Monitor
from .parser import parse
from .plotting import scatter_svg
from .pstrel import PstrelTemplate, project_all

ARTIFACTS = ("model.geojson", "projections.csv", "clusters.csv", "silhouette.json",
             "tree.json", "formulas.txt", "scatter.svg", "report.json")
_STRATEGY_KEYS = {"full": (), "delta": ("delta",), "mst": (), "enhanced_msg": ("alpha",)}


@dataclass
class PipelineConfig:
    """Validated run configuration; relative paths resolve against ``base_dir``."""

    output: Path
    template: PstrelTemplate
    model: dict
    locations: Path | None = None
    traces: Path | None = None
    generator: dict | None = None
    time_unit: str = "min"
    clean_threshold: float = 0.15
    k: int | None = None
    k_range: tuple[int, int] = (2, 6)
    normalize: bool = True
    tree_N: int = 10
    tree_K: int = 5
    acc_threshold: float = 0.90
    seed: int = 0
    raw: dict = field(default_factory=dict, repr=False)

    @classmethod
    def from_json(cls, path) -> "PipelineConfig":
        path = Path(path)
        try:
            with open(path, encoding="utf-8") as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        return cls.from_dict(raw, path.parent)

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any], base_dir=".") -> "PipelineConfig":
        base = Path(base_dir)

        def rel(p):
            return None if p is None else (base / p if not os.path.isabs(p) else Path(p))

        if ("traces" in raw) == ("generator" in raw):
            raise ConfigError("config needs exactly one of 'traces' and 'generator'")
        if "traces" in raw and "locations" not in raw:
            raise ConfigError("'traces' requires a 'locations' file")
        for key in ("template", "model", "output"):
            if key not in raw:
                raise ConfigError(f"config is missing {key!r}")

        model = dict(raw["model"])
        strategy = model.get("strategy")
        if strategy not in _STRATEGY_KEYS:
            raise ConfigError(f"unknown model strategy {strategy!r}")
        for key in _STRATEGY_KEYS[strategy]:
            if key not in model:
                raise ConfigError(f"model strategy {strategy!r} requires {key!r}")

        tpl_raw = raw["template"]
        if isinstance(tpl_raw, str):
            template = PstrelTemplate.from_json(rel(tpl_raw))
        else:
            template = PstrelTemplate.from_dict(tpl_raw)

        clus = raw.get("clustering", {})
        tree = raw.get("tree", {})
        k_range = (int(clus.get("k_min", 2)), int(clus.get("k_max", 6)))
        cfg = cls(
            output=rel(raw["output"]),
            template=template,
            model=model,
            locations=rel(raw.get("locations")),
            traces=rel(raw.get("traces")),
            generator=raw.get("generator"),
            time_unit=raw.get("time_unit", "min"),
            clean_threshold=float(raw.get("clean_threshold", 0.15)),
            k=None if clus.get("k") is None else int(clus["k"]),
            k_range=k_range,
            normalize=bool(clus.get("normalize", True)),
            tree_N=int(tree.get("N", 10)),
            tree_K=int(tree.get("K", 5)),
            acc_threshold=float(tree.get("acc_threshold", 0.90)),
            seed=int(raw.get("seed", 0)),
            raw=dict(raw),
        )
        if cfg.k is not None and cfg.k < 1:
            raise ConfigError("clustering.k must be >= 1")
        if not 2 <= k_range[0] <= k_range[1]:
            raise ConfigError("clustering range needs 2 <= k_min <= k_max")
        if cfg.tree_N < 1 or cfg.tree_K < 2:
            raise ConfigError("tree.N must be >= 1 and tree.K >= 2")
        return cfg

    def stage_seeds(self) -> dict[str, int]:
        """Independent per-stage seeds derived from the single config seed."""
        gen, cv = np.random.SeedSequence(self.seed).generate_state(2)
        return {"generator": int(gen), "cv": int(cv)}


def _load_inputs(cfg: PipelineConfig, seeds):
    if cfg.generator is not None:
        gen = dict(cfg.generator)
        kind = gen.pop("type", "food_court")
        if kind != "food_court":
            raise ConfigError(f"unknown generator type {kind!r}")
        seed = int(gen.pop("seed", seeds["generator"]))
        try:
            fc = traces.FoodCourtConfig(**gen)
        except TypeError as exc:
            raise ConfigError(f"generator: {exc}") from None
        return traces.generate_food_court(fc, seed)
    locs = spatial.read_locations_csv(cfg.locations)
    return locs, traces.load_traces(cfg.traces, locs, cfg.time_unit)


class _Stages:
    def __init__(self):
        self.timings: dict[str, float] = {}
        self.current = None

    def __call__(self, name):
        self.current = name
        return self

    def __enter__(self):
        self._t = time.perf_counter()

    def __exit__(self, *exc):
        self.timings[self.current] = time.perf_counter() - self._t
        return False


def run(cfg: PipelineConfig) -> dict:
    """Execute every stage and write the artifacts; returns the report dict.

    On failure a ``FAILED`` file naming the stage and cause is written next to
    whatever artifacts were already produced, and the error is re-raised.
    """
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    failed = out / "FAILED"
    if failed.exists():
        failed.unlink()
    stage = _Stages()
    t_start = time.perf_counter()
    report: dict[str, Any] = {"seed": cfg.seed}
    try:
        seeds = cfg.stage_seeds()
        with stage("ingest"):
            locs, trace = _load_inputs(cfg, seeds)
            trace, dropped = traces.clean(trace, cfg.clean_threshold)
            kept = set(trace.location_ids)
            locs = [loc for loc in locs if loc.id in kept]
            if not locs:
                raise ConfigError("no locations left after cleaning")
        report["dropped_locations"] = list(dropped)

        with stage("model"):
            params = {k: v for k, v in cfg.model.items() if k != "strategy"}
            model = spatial.build_model(locs, cfg.model["strategy"], **params)
        report["n_locations"] = len(model)
        report["n_edges"] = len(model.undirected_edges())
        report["isolated_locations"] = spatial.isolated_nodes(model)[1]

        with stage("project"):
            template = cfg.template.resolve_bounds(model, trace)
            proj = project_all(template, model, trace)
            proj.write_csv(out / "projections.csv", model.ids)
        report["template"] = template.to_dict()
        report["unprojectable_locations"] = sorted(proj.failures)
        ids = [i for i in model.ids if i in proj.valuations]
        X = proj.matrix(ids)
        if len(ids) == 0:
            raise ConfigError("no location could be projected; widen the parameter bounds")

        with stage("cluster"):
            n = len(ids)
            if cfg.k is not None:
                k = min(cfg.k, n)
                scores = {}
                if 2 <= k:
                    Xn = clustering._prepare(X, cfg.normalize)
                    lab = clustering.cut(clustering.linkage(Xn), n, k)
                    scores = {k: clustering.silhouette(Xn, lab) if len(set(lab)) > 1 else 0.0}
            elif n >= 2:
                kmax = min(cfg.k_range[1], n)
                kmin = min(cfg.k_range[0], kmax)
                k, scores = clustering.choose_k(X, kmin, kmax, cfg.normalize)
            else:
                k, scores = 1, {}
            assignment = clustering.ahc_complete(X, k, cfg.normalize, ids)
            clustering.write_clusters_csv(out / "clusters.csv", assignment)
            clustering.write_silhouette_json(out / "silhouette.json", scores, k, cfg.k is not None)
        report["numC"] = int(k)

        with stage("tree"):
            labels = assignment.labels
            K = min(cfg.tree_K, n)
            pruned = None
            if K >= 2:
                pruned = boxtree.prune_search(X, labels, cfg.tree_N, K, cfg.acc_threshold,
                                              seeds["cv"])
            tree = pruned.tree if pruned is not None and pruned.tree is not None else \
                boxtree.fit_tree(X, labels)
            boxtree.write_tree_json(out / "tree.json", tree, template.names)
        report["tree"] = {
            "pruned": pruned is not None and pruned.tree is not None,
            "depth": tree.depth,
            "cv_accuracy": {} if pruned is None else {str(d): a for d, a in pruned.cv_accuracy.items()},
            "training_accuracy": float((tree.predict(X) == labels).mean()),
        }

        with stage("formulas"):
            formulas = boxtree.cluster_formulas(tree, template)
            boxtree.write_formula_report(out / "formulas.txt", formulas, template)
            member = np.zeros(len(ids), dtype=int)
            for lab, cf in formulas.items():
                member[cf.contains(X)] = lab
        report["boxes_per_cluster"] = {str(lab): formulas[lab].n_boxes if lab in formulas else 0
                                       for lab in range(1, k + 1)}
        report["box_label_agreement"] = float((member == labels).mean())

        with stage("export"):
            spatial.write_geojson(out / "model.geojson", model, assignment.as_dict())
            bounds = [(p.lo, p.hi) for p in template.params]
            svg = scatter_svg(X, labels, template.names, bounds,
                              {lab: cf.boxes for lab, cf in formulas.items()},
                              title=f"{len(ids)} locations, {k} clusters")
            (out / "scatter.svg").write_text(svg, encoding="utf-8")

        report["timings_s"] = dict(stage.timings)
        report["wall_time_s"] = time.perf_counter() - t_start
        with open(out / "report.json", "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2)
        return report
    except (StrelMinerError, OSError) as exc:
        failed.write_text(f"stage: {stage.current}\nerror: {type(exc).__name__}: {exc}\n",
                          encoding="utf-8")
        raise


def monitor(model: spatial.SpatialModel, trace: traces.SpatioTemporalTrace,
            formula: Formula | str, locations: Sequence[str] | None = None,
            time: float | None = None) -> list[dict]:
    """Robustness and satisfaction of one formula per location at one time."""
    f = parse(formula) if isinstance(formula, str) else formula
    mon = Monitor(model, trace)
    ids = list(model.ids) if locations is None else list(locations)
    idx = [model.index_of(i) for i in ids]
    tix = 0 if time is None else mon.trace.time_index(time)
    rho = mon.evaluate(f, idx, [tix])[:, 0]
    sat = mon.evaluate(f, idx, [tix], boolean=True)[:, 0] > 0
    return [{"location_id": i, "time": float(mon.trace.times[tix]), "robustness": float(r),
             "satisfied": bool(s)} for i, r, s in zip(ids, rho, sat)]
