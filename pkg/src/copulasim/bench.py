"""Patch-size timing sweeps for CSIM and runtime-model fitting."""
from __future__ import annotations

import csv
import statistics
import time
from dataclasses import dataclass

import numpy as np

from .copula import csim_score
from .errors import InsufficientData
from .image import as_image, check_patch_size, validate_pair

BENCH_COLUMNS = ("patch_size", "width", "height", "reps", "median_time_s", "score")

# candidate runtime models t(P) = c * f(P) + d
MODELS = {
    "log": np.log,
    "linear": lambda p: p,
    "inverse_square": lambda p: 1.0 / (p * p),
}


@dataclass(frozen=True)
class BenchRecord:
    patch_size: int
    width: int
    height: int
    repetitions: int
    median_time: float
    score: float
    times: tuple = ()


def patch_sweep_timing(a, b, sizes, reps=5, workers=None) -> list[BenchRecord]:
    """Time :func:`csim_score` once per patch size in ``sizes``.

    Each size gets one untimed warm-up run, then ``reps`` timed runs; the
    median is reported. Timed runs are interleaved round-robin over sizes so
    transient machine load does not bias a single size. Decoding is never
    timed, only the metric.

    Raises
    ------
    PatchTooLarge
        If a size does not fit the images (checked before any timing).
    ValueError
        If ``reps < 3``.
    """
    a, b = as_image(a), as_image(b)
    validate_pair(a, b)
    if reps < 3:
        raise ValueError("need at least 3 repetitions")
    sizes = [check_patch_size(a, p) for p in sizes]
    scores = [csim_score(a, b, p, workers) for p in sizes]
    times = [[] for _ in sizes]
    for _ in range(reps):
        for i, p in enumerate(sizes):
            t0 = time.perf_counter()
            s = csim_score(a, b, p, workers)
            times[i].append(time.perf_counter() - t0)
            if s != scores[i]:
                raise RuntimeError(f"non-deterministic score at patch size {p}")
    return [BenchRecord(p, a.width, a.height, reps, max(statistics.median(t), 1e-9),
                        s, tuple(t)) for p, s, t in zip(sizes, scores, times)]


@dataclass(frozen=True)
class ModelFit:
    name: str
    slope: float
    intercept: float
    rss: float


@dataclass(frozen=True)
class FitReport:
    fits: dict
    best: str | None
    indistinguishable: bool

    def summary(self) -> str:
        lines = [f"{f.name:>15s}: t = {f.slope:.4g} * f(P) + {f.intercept:.4g}   "
                 f"rss={f.rss:.3g}" for f in self.fits.values()]
        tail = "indistinguishable" if self.indistinguishable else f"best: {self.best}"
        return "\n".join(lines + [tail])


def fit_complexity_trend(records, rel_tol=1e-9) -> FitReport:
    """Least-squares fit of median time against each model in :data:`MODELS`.

    Needs at least four records whose patch sizes span a factor of 8. When
    the timings are flat (relative spread below ``rel_tol``) every model
    collapses onto its intercept and the report is flagged
    ``indistinguishable`` with no best model.
    """
    records = list(records)
    if len(records) < 4:
        raise InsufficientData(f"need >= 4 records, got {len(records)}")
    p = np.array([r.patch_size for r in records], dtype=np.float64)
    t = np.array([r.median_time for r in records], dtype=np.float64)
    if p.max() < 8 * p.min():
        raise InsufficientData("patch sizes must span at least a factor of 8")

    fits = {}
    for name, f in MODELS.items():
        design = np.column_stack([f(p), np.ones_like(p)])
        (slope, intercept), *_ = np.linalg.lstsq(design, t, rcond=None)
        rss = float(np.sum((design @ [slope, intercept] - t) ** 2))
        fits[name] = ModelFit(name, float(slope), float(intercept), rss)

    spread = float(np.ptp(t))
    if spread <= rel_tol * max(float(np.abs(t).max()), 1e-300):
        return FitReport(fits, None, True)
    best = min(fits.values(), key=lambda f: f.rss)
    return FitReport(fits, best.name, False)


def is_monotone_non_increasing(times, max_inversions=1, tolerance=0.05) -> bool:
    """True if each step is non-increasing, allowing ``max_inversions`` steps
    that rise by at most ``tolerance`` (relative)."""
    inversions = 0
    for prev, cur in zip(times, times[1:]):
        if cur <= prev:
            continue
        if cur > prev * (1 + tolerance):
            return False
        inversions += 1
    return inversions <= max_inversions


def write_bench_csv(path, records, meta=None):
    with open(path, "w", newline="") as fh:
        for key, value in (meta or {}).items():
            fh.write(f"# {key}: {value}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(BENCH_COLUMNS)
        for r in records:
            w.writerow([r.patch_size, r.width, r.height, r.repetitions,
                        f"{r.median_time:.6f}", f"{r.score:.6f}"])

