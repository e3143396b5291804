"""Experiment drivers: distortion sweeps, video series, CSIQ-style datasets.

Every driver returns plain :class:`MetricRecord` lists so results can be
aggregated, correlated and written to CSV or JSON in one format.
"""
from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import os
import re
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image as PILImage
from scipy import ndimage

from ._version import __version__
from .copula import DEFAULT_PATCH_SIZE, csim_score
from .distort import add_gaussian_noise, adjust_contrast, gaussian_blur
from .errors import (
    DimensionMismatch,
    EmptyRecords,
    EmptySequence,
    InsufficientData,
    LayoutNotRecognized,
)
from .image import Image, as_image, covers_exactly, load_image, save_image, validate_pair
from .reference import FsimConfig, IssmConfig, SsimConfig, fsim, issm, ssim

log = logging.getLogger(__name__)

METRICS = ("CSIM", "SSIM", "FSIM", "ISSM")
CSIQ_DISTORTIONS = ("awgn", "blur", "contrast", "fnoise", "jpeg", "jpeg2000")
IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".bmp")
CSV_COLUMNS = ("image_id", "distortion", "level", "metric", "score", "wall_time_s")


@dataclass(frozen=True)
class MetricRecord:
    image_id: str
    distortion: str
    level: float
    metric: str
    score: float
    wall_time: float = 0.0

    def sort_key(self):
        return (self.image_id, self.distortion, self.level, self.metric)


@dataclass
class MetricSuite:
    """Which metrics to run and with which parameters."""

    metrics: tuple = METRICS
    patch_size: int = DEFAULT_PATCH_SIZE
    ssim: SsimConfig = field(default_factory=SsimConfig)
    fsim: FsimConfig = field(default_factory=FsimConfig)
    issm: IssmConfig = field(default_factory=IssmConfig)

    def __post_init__(self):
        self.metrics = normalize_metrics(self.metrics)

    def evaluate(self, reference, distorted) -> dict:
        """Return ``{metric: (score, seconds)}`` in canonical metric order."""
        out = {}
        for name in self.metrics:
            t0 = time.perf_counter()
            if name == "CSIM":
                score = csim_score(reference, distorted, self.patch_size)
            elif name == "SSIM":
                score = ssim(reference, distorted, self.ssim)
            elif name == "FSIM":
                score = fsim(reference, distorted, self.fsim)
            else:
                score = issm(reference, distorted, self.issm)
            out[name] = (float(score), time.perf_counter() - t0)
        return out

    def config_dict(self) -> dict:
        return {
            "metrics": list(self.metrics),
            "patch_size": self.patch_size,
            "ssim": asdict(self.ssim),
            "fsim": asdict(self.fsim),
            "issm": asdict(self.issm),
        }


def normalize_metrics(metrics) -> tuple:
    """Upper-case, validate and order metric names as CSIM, SSIM, FSIM, ISSM."""
    if isinstance(metrics, str):
        metrics = [m for m in metrics.split(",") if m.strip()]
    names = {m.strip().upper() for m in metrics}
    if "ALL" in names:
        return METRICS
    unknown = names - set(METRICS)
    if unknown:
        raise ValueError(f"unknown metrics: {', '.join(sorted(unknown))}")
    if not names:
        raise ValueError("no metrics selected")
    return tuple(m for m in METRICS if m in names)


def _records(image_id, distortion, level, results):
    return [MetricRecord(image_id, distortion, float(level), name, score, secs)
            for name, (score, secs) in results.items()]


def _run_jobs(fn, jobs, workers):
    if not workers or workers <= 1:
        return [fn(job) for job in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


def sorted_records(records):
    return sorted(records, key=MetricRecord.sort_key)


def _warn_partial_cover(img: Image, suite: "MetricSuite", what: str):
    if "CSIM" in suite.metrics and not covers_exactly(img, suite.patch_size):
        warnings.warn(
            f"{what}: {img.width}x{img.height} is not a multiple of patch size "
            f"{suite.patch_size}; trailing border pixels are ignored by CSIM",
            stacklevel=3)


# ------------------------------------------------------------------ sweeps

def grid_label(blur_sigma: float) -> str:
    """Distortion label of a noise-then-blur grid cell at ``blur_sigma``."""
    return f"noise+blur@{blur_sigma:g}"


def sweep_eval(img, blur_sigmas, noise_sigmas, noise_mean=5.0, metrics=METRICS,
               seed=0, suite: MetricSuite | None = None, image_id="image",
               workers=None) -> list[MetricRecord]:
    """Score ``img`` against blurred, noised and noised-then-blurred copies.

    Produces three record families:

    * ``distortion="blur"``, ``level`` = blur sigma;
    * ``distortion="noise"``, ``level`` = noise sigma (mean ``noise_mean``);
    * ``distortion="noise+blur@<b>"``, ``level`` = noise sigma, for every blur
      sigma ``b`` (noise is applied first, then blur).

    Noise uses the same ``seed`` at every level, so levels differ only in
    amplitude.
    """
    img = as_image(img)
    blur_sigmas, noise_sigmas = list(blur_sigmas), list(noise_sigmas)
    if not blur_sigmas or not noise_sigmas:
        raise ValueError("blur_sigmas and noise_sigmas must be non-empty")
    suite = suite or MetricSuite(metrics)
    _warn_partial_cover(img, suite, image_id)

    noisy = {s: add_gaussian_noise(img, noise_mean, s, seed) for s in noise_sigmas}
    jobs = [("blur", b, lambda b=b: gaussian_blur(img, b)) for b in blur_sigmas]
    jobs += [("noise", s, lambda s=s: noisy[s]) for s in noise_sigmas]
    jobs += [(grid_label(b), s, lambda b=b, s=s: gaussian_blur(noisy[s], b))
             for b in blur_sigmas for s in noise_sigmas]

    def run(job):
        name, level, make = job
        return _records(image_id, name, level, suite.evaluate(img, make()))

    out = []
    for recs in _run_jobs(run, jobs, workers):
        out.extend(recs)
    return sorted_records(out)


# ------------------------------------------------------------------- video

@dataclass
class VideoSeries:
    """Per-frame scores of every frame against frame ``reference_index``."""

    frame_index: list
    scores: dict
    reference_index: int = 0
    resize: tuple | None = None
    resize_kernel: str = "bilinear"

    def to_records(self, video_id="video") -> list[MetricRecord]:
        out = []
        for name, series in self.scores.items():
            for i, s in zip(self.frame_index, series):
                out.append(MetricRecord(video_id, "frame", float(i), name, float(s)))
        return sorted_records(out)


def resize_bilinear(img, size) -> Image:
    """Bilinear resize to ``size = (width, height)``."""
    img = as_image(img)
    w, h = (int(v) for v in size)
    if (img.width, img.height) == (w, h):
        return img
    px = img.pixels[:, :, 0] if img.channels == 1 else img.pixels
    out = np.asarray(PILImage.fromarray(px).resize((w, h), PILImage.BILINEAR))
    return as_image(out)


def _natural_key(name: str):
    return [int(t) if t.isdigit() else t.lower() for t in re.split(r"(\d+)", name)]


def load_frames(directory) -> list[Image]:
    """Load every image file in ``directory``, ordered by embedded frame number."""
    d = Path(directory)
    files = sorted((p for p in d.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES),
                   key=lambda p: _natural_key(p.name))
    return [load_image(p) for p in files]


def video_eval(frames, metrics=METRICS, resize_to=None,
               patch_size=DEFAULT_PATCH_SIZE, suite: MetricSuite | None = None,
               workers=None) -> VideoSeries:
    """Compare every frame of a sequence with its first frame.

    ``frames`` is an iterable of images or a directory of numbered frames.
    ``resize_to=(width, height)`` resizes every frame bilinearly first.

    Raises
    ------
    EmptySequence
        If fewer than two frames are supplied.
    DimensionMismatch
        If frame sizes differ after resizing.
    """
    if isinstance(frames, (str, os.PathLike)):
        frames = load_frames(frames)
    frames = [as_image(f) for f in frames]
    if len(frames) < 2:
        raise EmptySequence(f"need at least 2 frames, got {len(frames)}")
    if resize_to is not None:
        frames = [resize_bilinear(f, resize_to) for f in frames]
    ref = frames[0]
    for f in frames[1:]:
        validate_pair(ref, f)
    suite = suite or MetricSuite(metrics, patch_size)
    _warn_partial_cover(ref, suite, "video")

    results = _run_jobs(lambda f: suite.evaluate(ref, f), frames, workers)
    scores = {name: np.array([r[name][0] for r in results]) for name in suite.metrics}
    return VideoSeries(list(range(len(frames))), scores, 0,
                       tuple(resize_to) if resize_to is not None else None)


# ----------------------------------------------------------------- dataset

_LEVEL_RE = re.compile(r"(\d+)$")


def _image_files(directory: Path):
    return sorted(p for p in directory.iterdir()
                  if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES)


def find_csiq_pairs(root):
    """Match distorted files to their originals in a CSIQ-style tree.

    Originals live in ``src_imgs/``; distorted files in per-distortion
    folders named like ``awgn`` or ``jpeg2000`` (case-insensitive), either
    directly under ``root`` or under ``root/dst_imgs``. Distorted names carry
    the original's stem and a numeric level suffix, e.g.
    ``1600.AWGN.3.png``.

    Returns a list of ``(image_id, distortion, level, original_path,
    distorted_path)`` sorted by ``(image_id, distortion, level)``.
    """
    root = Path(root)
    src = next((p for p in root.iterdir() if p.is_dir() and p.name.lower() == "src_imgs"),
               None) if root.is_dir() else None
    if src is None:
        raise LayoutNotRecognized(f"{root}: no src_imgs/ directory")
    originals = {p.stem.lower(): p for p in _image_files(src)}

    containers = [root]
    containers += [p for p in root.iterdir() if p.is_dir() and p.name.lower() == "dst_imgs"]
    folders = {}
    for c in containers:
        for p in c.iterdir():
            if p.is_dir() and p.name.lower() in CSIQ_DISTORTIONS:
                folders.setdefault(p.name.lower(), p)
    for name in CSIQ_DISTORTIONS:
        if name not in folders:
            warnings.warn(f"{root}: distortion folder '{name}' not found", stacklevel=2)

    # longest original stem first so "a_b" wins over "a"
    stems = sorted(originals, key=len, reverse=True)
    pairs = []
    for name, folder in sorted(folders.items()):
        for f in _image_files(folder):
            low = f.stem.lower()
            stem = next((o for o in stems
                         if low.startswith(o) and low[len(o):len(o) + 1] in "._-"
                         and len(low) > len(o)), None)
            m = _LEVEL_RE.search(low)
            if stem is None or m is None or len(low) - len(m.group(1)) <= len(stem):
                warnings.warn(f"skipping unrecognised file {f}", stacklevel=2)
                continue
            pairs.append((originals[stem].stem, name, float(m.group(1)),
                          originals[stem], f))
    if not pairs:
        raise LayoutNotRecognized(f"{root}: no original/distorted pairs found")
    pairs.sort(key=lambda t: t[:3])
    return pairs


def dataset_eval(root, metrics=METRICS, patch_size=DEFAULT_PATCH_SIZE,
                 suite: MetricSuite | None = None, workers=None) -> list[MetricRecord]:
    """One record per (original, distorted, metric) triple found under ``root``.

    Raises
    ------
    LayoutNotRecognized
        If no pair could be matched.
    """
    suite = suite or MetricSuite(metrics, patch_size)
    pairs = find_csiq_pairs(root)
    cache = {}

    def original(path):
        if path not in cache:
            cache[path] = load_image(path)
        return cache[path]

    def run(pair):
        image_id, name, level, ref_path, dst_path = pair
        ref, dst = original(ref_path), load_image(dst_path)
        try:
            validate_pair(ref, dst)
        except DimensionMismatch as exc:
            warnings.warn(f"skipping {dst_path}: {exc}", stacklevel=2)
            return []
        return _records(image_id, name, level, suite.evaluate(ref, dst))

    for path in {p[3] for p in pairs}:
        original(path)
    out = []
    for recs in _run_jobs(run, pairs, workers):
        out.extend(recs)
    return sorted_records(out)


def make_mini_csiq(root, n_originals=3, distortions=("awgn", "blur"), levels=(1, 2),
                   size=(64, 64), seed=0):
    """Write a small synthetic dataset in CSIQ layout and return ``root``.

    Originals are smooth random textures; ``awgn``, ``blur`` and ``contrast``
    folders are generated with the distortion functions, level ``k`` being
    progressively stronger.
    """
    root = Path(root)
    (root / "src_imgs").mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    w, h = size
    makers = {
        "awgn": lambda im, k, s: add_gaussian_noise(im, 0.0, 5.0 * k, s),
        "blur": lambda im, k, s: gaussian_blur(im, 0.75 * k),
        "contrast": lambda im, k, s: adjust_contrast(im, 1.0 - 0.2 * k),
    }
    for name in distortions:
        if name not in makers:
            raise ValueError(f"cannot synthesise distortion {name!r}")
        (root / name).mkdir(exist_ok=True)
    for i in range(n_originals):
        img = textured_image(h, w, 3, seed=int(rng.integers(1 << 31)))
        stem = f"img{i:02d}"
        save_image(img, root / "src_imgs" / f"{stem}.png")
        for name in distortions:
            for k in levels:
                out = makers[name](img, k, seed + 1000 * i + k)
                save_image(out, root / name / f"{stem}.{name.upper()}.{k}.png")
    return root


def textured_image(height, width, channels=3, seed=0, smooth=1.5) -> Image:
    """Seeded smooth random texture spanning roughly the full 8-bit range."""
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(height, width, channels))
    x = ndimage.gaussian_filter(x, sigma=(smooth, smooth, 0), mode="wrap")
    x = (x - x.mean()) / (x.std() + 1e-12)
    return Image(np.clip(np.rint(128 + 45 * x), 0, 255).astype(np.uint8))


# ------------------------------------------------------------- aggregation

@dataclass(frozen=True)
class AggregateCell:
    mean: float
    count: int


def aggregate_by_distortion(records) -> dict:
    """Mean score per ``(metric, distortion)`` with the number of records."""
    records = list(records)
    if not records:
        raise EmptyRecords("no records to aggregate")
    groups = {}
    for r in records:
        groups.setdefault((r.metric, r.distortion), []).append(r.score)
    return {key: AggregateCell(math.fsum(v) / len(v), len(v))
            for key, v in sorted(groups.items())}


@dataclass(frozen=True)
class CorrelationMatrix:
    metrics: tuple
    coefficients: np.ndarray

    def __getitem__(self, pair):
        i, j = (self.metrics.index(m) for m in pair)
        return float(self.coefficients[i, j])


def correlation_matrix(records) -> CorrelationMatrix:
    """Pearson correlation between metrics over aligned observations.

    Observations are aligned on ``(image_id, distortion, level)``; only keys
    scored by every metric are used. A metric with zero variance is reported
    as uncorrelated (0.0) with the others.

    Raises
    ------
    InsufficientData
        If fewer than two aligned observations or fewer than two metrics.
    """
    table = {}
    for r in records:
        table.setdefault((r.image_id, r.distortion, r.level), {})[r.metric] = r.score
    names = tuple(m for m in METRICS if any(m in row for row in table.values()))
    extra = sorted({m for row in table.values() for m in row} - set(names))
    names += tuple(extra)
    rows = [row for _, row in sorted(table.items()) if all(m in row for m in names)]
    if len(names) < 2 or len(rows) < 2:
        raise InsufficientData(
            f"need >= 2 metrics and >= 2 aligned observations, got {len(names)} and {len(rows)}")
    x = np.array([[row[m] for m in names] for row in rows])
    dev = x - x.mean(axis=0)
    norm = np.sqrt((dev * dev).sum(axis=0))
    k = len(names)
    coef = np.eye(k)
    for i in range(k):
        for j in range(i + 1, k):
            if norm[i] == 0 or norm[j] == 0:
                warnings.warn(f"{names[i]} or {names[j]} is constant; correlation set to 0",
                              stacklevel=2)
                r = 0.0
            else:
                r = float(np.dot(dev[:, i], dev[:, j]) / (norm[i] * norm[j]))
                r = min(1.0, max(-1.0, r))
            coef[i, j] = coef[j, i] = r
    return CorrelationMatrix(names, coef)


# ------------------------------------------------------------------ output

def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def metadata_header(seed=None, patch_size=None, config=None, **extra) -> dict:
    meta = {"tool": "copulasim", "version": __version__}
    if seed is not None:
        meta["seed"] = seed
    if patch_size is not None:
        meta["patch_size"] = patch_size
    if config is not None:
        meta["config_hash"] = config_hash(config)
    meta.update(extra)
    return meta


def _write_meta(fh, meta):
    for key, value in meta.items():
        fh.write(f"# {key}: {value}\n")


def write_records_csv(path, records, meta=None):
    """Write records in ``image_id,distortion,level,metric,score,wall_time_s``
    order, preceded by ``# key: value`` metadata lines."""
    with open(path, "w", newline="") as fh:
        _write_meta(fh, meta or {})
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in sorted_records(records):
            w.writerow([r.image_id, r.distortion, f"{r.level:g}", r.metric,
                        f"{r.score:.6f}", f"{r.wall_time:.6f}"])


def read_records_csv(path) -> list[MetricRecord]:
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    out = []
    for row in csv.DictReader(lines):
        out.append(MetricRecord(row["image_id"], row["distortion"], float(row["level"]),
                                row["metric"], float(row["score"]),
                                float(row["wall_time_s"])))
    return out


def write_records_json(path, records, meta=None):
    """JSON mirror of :func:`write_records_csv`."""
    rows = [{"image_id": r.image_id, "distortion": r.distortion, "level": r.level,
             "metric": r.metric, "score": round(r.score, 6),
             "wall_time_s": round(r.wall_time, 6)} for r in sorted_records(records)]
    with open(path, "w") as fh:
        json.dump({"metadata": meta or {}, "records": rows}, fh, indent=2, sort_keys=True)
        fh.write("\n")
