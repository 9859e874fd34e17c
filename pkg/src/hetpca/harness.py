"""Monte Carlo sweeps pairing empirical PCA metrics with asymptotic predictions."""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields, replace
from dataclasses import field as dc_field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from threadpoolctl import threadpool_limits

from hetpca.asymptotics import predict_component, predict_overall
from hetpca.datagen import (
    SEED_SCHEME_VERSION,
    DatasetSpec,
    derive_seed,
    generate,
    prediction_profile,
)
from hetpca.errors import DomainError, HypothesisViolation
from hetpca.pca_metrics import EmpiricalMetrics, evaluate
from hetpca.spectrum import NoiseProfile, SpectrumParams

__all__ = [
    "SweepConfig",
    "SweepPoint",
    "TrialSummary",
    "CSV_HEADER",
    "SWEEP_KINDS",
    "sweep_points",
    "predictions_for",
    "run_sweep",
    "write_csv",
    "format_csv",
    "quartiles",
]

SWEEP_KINDS = ("p2-sweep", "c-theta-grid", "sigma-grid", "added-data")
CSV_HEADER = [
    "sweep_kind", "point_index", "axis1", "axis2", "component", "metric",
    "asymptotic", "mean", "q25", "q75", "trials", "n", "d", "seed_scheme_version",
]
# (empirical metric, prediction attribute); the "_other" limits are zero
COMPONENT_METRICS = (
    ("subspace_sq_cos", "subspace_recovery"),
    ("subspace_sq_cos_other", None),
    ("coeff_sq_cos", "coefficient_recovery"),
    ("coeff_sq_cos_other", None),
    ("mixed_real", "mixed_recovery"),
    ("mixed_imag_abs", None),
    ("amplitude_ratio", "amplitude_sq_ratio"),
)
DATASET_METRICS = ("overall_subspace", "mse")


@dataclass(frozen=True)
class Axis:
    start: float
    stop: float
    count: int

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)


@dataclass
class SweepConfig:
    sweep_kind: str = "p2-sweep"
    n: int | None = 1000
    d: int = 100
    c: float | None = None
    amplitudes: list[float] = dc_field(default_factory=lambda: [1.0, 0.8])
    variances: list[float] = dc_field(default_factory=lambda: [0.1, 3.25])
    proportions: list[float] | None = None
    field: str = "real"
    coeff_dist: str = "gaussian"
    noise_dist: str = "gaussian"
    assignment: str = "deterministic"
    axis1: Axis = dc_field(default_factory=lambda: Axis(0.0, 1.0, 11))
    axis2: Axis | None = None
    trials: int = 10
    master_seed: int = 0

    def __post_init__(self):
        if isinstance(self.axis1, (list, tuple, dict)):
            self.axis1 = _axis(self.axis1)
        if isinstance(self.axis2, (list, tuple, dict)):
            self.axis2 = _axis(self.axis2)
        self.validate()

    def validate(self) -> None:
        if self.sweep_kind not in SWEEP_KINDS:
            raise DomainError(f"unknown sweep kind {self.sweep_kind!r}; pick one of {SWEEP_KINDS}")
        if self.trials < 1:
            raise DomainError("trials must be >= 1")
        for ax in (self.axis1, self.axis2):
            if ax is not None and ax.count < 1:
                raise DomainError("axis counts must be >= 1")
        if self.sweep_kind in ("c-theta-grid", "sigma-grid") and self.axis2 is None:
            raise DomainError(f"{self.sweep_kind} needs two axes")
        if self.sweep_kind in ("p2-sweep", "sigma-grid", "added-data") and len(self.variances) != 2:
            raise DomainError(f"{self.sweep_kind} needs exactly two noise variances")
        if self.sweep_kind == "sigma-grid" and (self.proportions is None or len(self.proportions) != 2):
            raise DomainError("sigma-grid needs two proportions")
        if self.sweep_kind == "added-data" and self.c is None:
            raise DomainError("added-data needs the base ratio c")
        if not 0 <= int(self.master_seed) < 2**64:
            raise DomainError("master_seed must fit in an unsigned 64-bit integer")

    @classmethod
    def from_dict(cls, d: dict) -> SweepConfig:
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise DomainError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_json(cls, path: str | Path) -> SweepConfig:
        return cls.from_dict(json.loads(Path(path).read_text()))


def _axis(a) -> Axis:
    if isinstance(a, dict):
        return Axis(float(a["start"]), float(a["stop"]), int(a["count"]))
    start, stop, count = a
    return Axis(float(start), float(stop), int(count))


@dataclass(frozen=True)
class SweepPoint:
    index: int
    axis1: float
    axis2: float | None
    c: float
    amplitudes: tuple[float, ...]
    noise: NoiseProfile
    n: int
    d: int


def _profile(variances: Sequence[float], proportions: Sequence[float]) -> NoiseProfile:
    # levels with zero weight are dropped so endpoints of a p2 sweep are valid profiles
    keep = [(v, p) for v, p in zip(variances, proportions) if p > 0]
    return NoiseProfile([v for v, _ in keep], [p for _, p in keep])


def sweep_points(cfg: SweepConfig) -> list[SweepPoint]:
    """Expand a config into its grid; axis1 varies slowest."""
    a1 = cfg.axis1.values()
    a2 = cfg.axis2.values() if cfg.axis2 is not None else [None]
    pts = []
    for x in a1:
        for y in a2:
            amps = tuple(cfg.amplitudes)
            n, d = cfg.n, cfg.d
            if cfg.sweep_kind == "p2-sweep":
                noise = _profile(cfg.variances, [1.0 - x, x])
                c = n / d
            elif cfg.sweep_kind == "sigma-grid":
                noise = NoiseProfile([x, y], cfg.proportions)
                c = n / d
            elif cfg.sweep_kind == "c-theta-grid":
                c = float(x)
                amps = (float(y),)
                noise = NoiseProfile(cfg.variances, cfg.proportions)
                n = max(1, round(c * d))
            else:  # added-data
                c1 = float(cfg.c)
                c = c1 + float(x)
                noise = _profile(cfg.variances, [c1 / c, x / c])
                n = max(1, round(c * d))
            pts.append(SweepPoint(len(pts), float(x), None if y is None else float(y), c, amps, noise, n, d))
    return pts


def _spec(cfg: SweepConfig, pt: SweepPoint, seed: int) -> DatasetSpec:
    return DatasetSpec(
        n=pt.n, d=pt.d, amplitudes=pt.amplitudes, noise=pt.noise, field=cfg.field,
        coeff_dist=cfg.coeff_dist, noise_dist=cfg.noise_dist, assignment=cfg.assignment, seed=seed,
    )


def predictions_for(c: float, amplitudes: Sequence[float], noise: NoiseProfile) -> dict[tuple[int, str], float]:
    """Asymptotic value of every CSV metric, keyed by (component, metric); component 0 is dataset-level."""
    out: dict[tuple[int, str], float] = {}
    preds = [predict_component(SpectrumParams(c, a**2, noise)) for a in amplitudes]
    for i, pr in enumerate(preds, start=1):
        for metric, attr in COMPONENT_METRICS:
            out[(i, metric)] = 0.0 if attr is None else float(getattr(pr, attr))
    out[(0, "overall_subspace")] = math.fsum(pr.subspace_recovery for pr in preds) / len(preds)
    try:
        out[(0, "mse")] = predict_overall(c, [a**2 for a in amplitudes], noise).mse
    except HypothesisViolation:
        out[(0, "mse")] = math.nan
    return out


@dataclass(frozen=True)
class TrialSummary:
    sweep_kind: str
    point_index: int
    axis1: float
    axis2: float | None
    component: int
    metric: str
    asymptotic: float
    mean: float
    q25: float
    q75: float
    trials: int
    n: int
    d: int
    sd: float = math.nan  # sample standard deviation across trials; not written to CSV


def quartiles(values: Iterable[float]) -> tuple[float, float, float]:
    """Mean and inclusive linear-interpolation quartiles."""
    x = np.asarray(list(values), dtype=float)
    q25, q75 = np.quantile(x, [0.25, 0.75], method="linear")
    return float(np.mean(x)), float(q25), float(q75)


def _trial(cfg: SweepConfig, pt: SweepPoint, t: int) -> EmpiricalMetrics:
    ds = generate(_spec(cfg, pt, derive_seed(cfg.master_seed, pt.index, t)))
    return evaluate(ds)


def run_sweep(cfg: SweepConfig, threads: int = 1, progress=None) -> list[TrialSummary]:
    """Run every (point, trial) pair and aggregate per point, component and metric.

    BLAS is pinned to one thread for the duration so results do not depend on
    the worker count.
    """
    cfg.validate()
    pts = sweep_points(cfg)
    tasks = [(pt, t) for pt in pts for t in range(cfg.trials)]
    with threadpool_limits(limits=1):
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as ex:
                results = list(ex.map(lambda a: _trial(cfg, *a), tasks))
        else:
            results = []
            for a in tasks:
                results.append(_trial(cfg, *a))
                if progress is not None:
                    progress(len(results), len(tasks))
    by_point: dict[int, list[EmpiricalMetrics]] = {pt.index: [] for pt in pts}
    for (pt, _), m in zip(tasks, results):
        by_point[pt.index].append(m)

    rows: list[TrialSummary] = []
    for pt in pts:
        ms = by_point[pt.index]
        pred_profile = prediction_profile(_spec(cfg, pt, 0))
        pred = predictions_for(pt.c, pt.amplitudes, pred_profile)
        k = len(pt.amplitudes)
        for i in range(1, k + 1):
            for metric, _ in COMPONENT_METRICS:
                vals = [getattr(m, metric)[i - 1] for m in ms]
                rows.append(_row(cfg, pt, i, metric, pred[(i, metric)], vals))
        for metric in DATASET_METRICS:
            rows.append(_row(cfg, pt, 0, metric, pred[(0, metric)], [getattr(m, metric) for m in ms]))
    return rows


def _row(cfg, pt, comp, metric, asym, vals) -> TrialSummary:
    mean, q25, q75 = quartiles(vals)
    sd = float(np.std(vals, ddof=1)) if len(vals) > 1 else math.nan
    return TrialSummary(cfg.sweep_kind, pt.index, pt.axis1, pt.axis2, comp, metric, asym, mean, q25, q75, len(vals), pt.n, pt.d, sd)


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format(float(x), ".17g")


def format_csv(rows: Sequence[TrialSummary]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow([
            r.sweep_kind, r.point_index, _fmt(r.axis1), _fmt(r.axis2), r.component, r.metric,
            _fmt(r.asymptotic), _fmt(r.mean), _fmt(r.q25), _fmt(r.q75), r.trials, r.n, r.d,
            SEED_SCHEME_VERSION,
        ])
    return buf.getvalue()


def write_csv(rows: Sequence[TrialSummary], path: str | Path) -> None:
    Path(path).write_text(format_csv(rows))


def with_overrides(cfg: SweepConfig, **kw) -> SweepConfig:
    """Copy of ``cfg`` with the non-None keyword values applied."""
    return replace(cfg, **{k: v for k, v in kw.items() if v is not None})
