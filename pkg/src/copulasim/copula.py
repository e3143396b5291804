"""Copula-based similarity (CSIM).

Each patch channel is reduced to the ranks of its intensities, the ranks are
scaled to ``(0, 1]`` and pushed through the standard normal quantile
function. Two images are compared by the Euclidean distance between the
resulting normal-score vectors.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import EmptyInput, LengthMismatch
from .image import Image, as_image, check_patch_size, validate_pair
from .quantile import standard_normal_ppf

DEFAULT_PATCH_SIZE = 8

# pixels per work unit when streaming patches through the pipeline
_CHUNK_PIXELS = 1 << 18


def compute_ranks(values) -> np.ndarray:
    """Ranks ``1..N`` of a 1-D sequence, ties broken by position.

    Rank ``i`` is one plus the number of elements ``j`` with
    ``(values[j], j) < (values[i], i)``, so the output is always a
    permutation of ``1..N`` kept in input order.

    >>> compute_ranks([10, 30, 20, 20])
    array([1, 4, 2, 3])
    """
    x = np.asarray(values)
    if x.ndim != 1:
        x = x.reshape(-1)
    if x.size == 0:
        raise EmptyInput("cannot rank an empty sequence")
    order = np.argsort(x, kind="stable")
    ranks = np.empty(x.size, dtype=np.int64)
    ranks[order] = np.arange(1, x.size + 1)
    return ranks


def normalize_ranks(ranks) -> np.ndarray:
    """Scale ranks ``1..N`` onto ``(0, 1]`` by dividing by ``N``."""
    r = np.asarray(ranks, dtype=np.float64)
    return r / r.size


def clamp_bounds(n: int) -> tuple[float, float]:
    """Clamp interval ``[1/(2N), 1 - 1/(2N)]`` applied before the quantile."""
    lo = 1.0 / (2.0 * n)
    return lo, 1.0 - lo


@lru_cache(maxsize=64)
def _score_table(n: int) -> np.ndarray:
    u = np.arange(1, n + 1, dtype=np.float64) / n
    lo, hi = clamp_bounds(n)
    table = standard_normal_ppf(np.clip(u, lo, hi))
    table.setflags(write=False)
    return table


def rank_scores(n: int) -> np.ndarray:
    """Normal scores assigned to ranks ``1..n`` (read-only, cached)."""
    if n < 1:
        raise EmptyInput("n must be >= 1")
    return _score_table(int(n))


def _copula_rows(x: np.ndarray) -> np.ndarray:
    """Normal scores for every row of ``x`` (shape ``(B, N)``)."""
    n = x.shape[1]
    order = np.argsort(x, axis=1, kind="stable")
    out = np.empty(x.shape, dtype=np.float64)
    np.put_along_axis(out, order, np.broadcast_to(_score_table(n), x.shape), axis=1)
    return out


@dataclass(frozen=True, eq=False)
class CopulaVector:
    """Normal scores of one patch, channel-major then pixel-raster order."""

    values: np.ndarray
    patch_size: int
    channels: int

    def __len__(self):
        return self.values.size

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)


@dataclass(frozen=True, eq=False)
class ImageCopula:
    """Concatenated patch copulas of a whole image.

    ``values`` has shape ``(n_patches, channels * patch_size**2)`` with rows in
    patch-grid raster order.
    """

    values: np.ndarray
    patch_size: int
    channels: int
    grid_rows: int
    grid_cols: int

    @property
    def n_patches(self) -> int:
        return self.values.shape[0]

    @property
    def total_len(self) -> int:
        return self.values.size

    @property
    def vector(self) -> np.ndarray:
        return self.values.reshape(-1)

    @property
    def patch_copulas(self) -> list[CopulaVector]:
        return [CopulaVector(row, self.patch_size, self.channels)
                for row in self.values]

    def __len__(self):
        return self.total_len

    def __getitem__(self, index) -> CopulaVector:
        return CopulaVector(self.values[index], self.patch_size, self.channels)

    def __array__(self, dtype=None, copy=None):
        v = self.vector
        return v if dtype is None else v.astype(dtype)


def patch_copula(patch) -> CopulaVector:
    """Copula vector of a single ``P x P`` (or ``P x P x C``) patch."""
    x = np.asarray(patch)
    if x.ndim == 2:
        x = x[:, :, None]
    if x.ndim != 3 or x.shape[0] != x.shape[1]:
        raise ValueError(f"patch must be P x P or P x P x C, got shape {x.shape}")
    if x.size == 0:
        raise EmptyInput("empty patch")
    p, _, c = x.shape
    rows = x.transpose(2, 0, 1).reshape(c, p * p)
    return CopulaVector(_copula_rows(rows).reshape(-1), p, c)


def _strips(img: Image, p: int):
    """Yield ``(B, N)`` row blocks (channel rows of whole patch rows)."""
    rows, cols = img.height // p, img.width // p
    c = img.channels
    step = max(1, _CHUNK_PIXELS // (p * p * cols * c))
    for r0 in range(0, rows, step):
        r1 = min(rows, r0 + step)
        block = img.pixels[r0 * p:r1 * p, :cols * p]
        block = block.reshape(r1 - r0, p, cols, p, c).transpose(0, 2, 4, 1, 3)
        yield r0, r1, block.reshape((r1 - r0) * cols * c, p * p)


def _map_strips(fn, jobs, workers):
    if workers is None or workers <= 1:
        return [fn(job) for job in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


def image_copula(img, patch_size=DEFAULT_PATCH_SIZE, workers=None) -> ImageCopula:
    """Copula vectors for every patch of ``img``.

    Raises
    ------
    InvalidPatchSize, PatchTooLarge
        Propagated from the patch tiling checks.
    """
    img = as_image(img)
    p = check_patch_size(img, patch_size)
    rows, cols = img.height // p, img.width // p
    parts = _map_strips(_copula_rows, [blk for _, _, blk in _strips(img, p)], workers)
    values = np.concatenate(parts).reshape(rows * cols, img.channels * p * p)
    return ImageCopula(values, p, img.channels, rows, cols)


def copula_distance(c1, c2) -> float:
    """Euclidean distance between two copula vectors of equal length."""
    v1 = np.asarray(c1, dtype=np.float64).reshape(-1)
    v2 = np.asarray(c2, dtype=np.float64).reshape(-1)
    if v1.size != v2.size:
        raise LengthMismatch(f"copula lengths differ: {v1.size} vs {v2.size}")
    diff = v1 - v2
    return math.sqrt(float(np.dot(diff, diff)))


def patch_sq_distances(a, b, patch_size=DEFAULT_PATCH_SIZE, workers=None) -> np.ndarray:
    """Squared copula distance of every patch pair, shape ``(rows, cols)``."""
    a, b = as_image(a), as_image(b)
    validate_pair(a, b)
    p = check_patch_size(a, patch_size)
    rows, cols = a.height // p, a.width // p
    c = a.channels
    jobs = list(zip(_strips(a, p), _strips(b, p)))

    def run(job):
        (_, _, xa), (_, _, xb) = job
        diff = _copula_rows(xa) - _copula_rows(xb)
        return np.einsum("ij,ij->i", diff, diff).reshape(-1, c).sum(axis=1)

    return np.concatenate(_map_strips(run, jobs, workers)).reshape(rows, cols)


def csim_score(a, b, patch_size=DEFAULT_PATCH_SIZE, workers=None) -> float:
    """Global CSIM score in ``[0, 1]``.

    The distance between the two image copulas is normalised by the square
    root of the full vector length, ``n_patches * channels * P**2``.

    Raises
    ------
    DimensionMismatch
        If the images differ in shape.
    PatchTooLarge, InvalidPatchSize
        If ``patch_size`` does not fit the images.
    """
    sq = patch_sq_distances(a, b, patch_size, workers)
    a = as_image(a)
    length = sq.size * a.channels * patch_size * patch_size
    d = math.sqrt(float(sq.sum()))
    return max(0.0, 1.0 - d / math.sqrt(length))


@dataclass(frozen=True, eq=False)
class SimilarityMap:
    scores: np.ndarray
    patch_size: int

    @property
    def grid_rows(self) -> int:
        return self.scores.shape[0]

    @property
    def grid_cols(self) -> int:
        return self.scores.shape[1]

    @property
    def shape(self):
        return self.scores.shape

    def __array__(self, dtype=None, copy=None):
        return self.scores if dtype is None else self.scores.astype(dtype)


def csim_map(a, b, patch_size=DEFAULT_PATCH_SIZE, workers=None) -> SimilarityMap:
    """Per-patch CSIM scores on the patch grid.

    Each cell is ``max(0, 1 - d / sqrt(C * P**2))`` with ``d`` the copula
    distance of that patch pair.
    """
    sq = patch_sq_distances(a, b, patch_size, workers)
    c = as_image(a).channels
    scores = np.maximum(0.0, 1.0 - np.sqrt(sq) / math.sqrt(c * patch_size * patch_size))
    return SimilarityMap(scores, int(patch_size))
