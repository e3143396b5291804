"""Seeded synthetic distortions: noise, blur, contrast and regional damage."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import InvalidKernel, RectOutOfBounds
from .image import Image, as_image

SHUTTER_LENGTH = 15


def _to_uint8(x: np.ndarray) -> Image:
    return Image(np.clip(np.rint(x), 0, 255).astype(np.uint8))


def _rng(seed) -> np.random.Generator:
    # Philox is counter-based: sample k is a pure function of (seed, k)
    return np.random.Generator(np.random.Philox(int(seed) & 0xFFFFFFFFFFFFFFFF))


def add_gaussian_noise(img, mean=0.0, sigma=0.0, seed=0) -> Image:
    """Add i.i.d. Normal(mean, sigma) noise per pixel and channel.

    Noise is added in floating point, then rounded and clipped to
    ``[0, 255]``. Samples are drawn in raster order from a Philox stream, so
    a pixel's noise depends only on ``seed`` and its flat index.
    """
    img = as_image(img)
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    x = img.pixels.astype(np.float64)
    if sigma == 0:
        return _to_uint8(x + mean)
    noise = _rng(seed).normal(mean, sigma, size=x.shape)
    return _to_uint8(x + noise)


def gaussian_kernel(sigma: float, size=None) -> np.ndarray:
    """Normalised 1-D Gaussian. ``size=None`` picks ``2*ceil(3*sigma) + 1``."""
    if size is None:
        size = 2 * math.ceil(3 * sigma) + 1
    if int(size) != size or size < 1 or size % 2 == 0:
        raise InvalidKernel(f"kernel size must be a positive odd integer, got {size}")
    size = int(size)
    x = np.arange(size, dtype=np.float64) - size // 2
    w = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return w / w.sum()


def _separable(img: Image, kx: np.ndarray, ky: np.ndarray | None) -> np.ndarray:
    x = img.pixels.astype(np.float64)
    out = ndimage.correlate1d(x, kx, axis=1, mode="nearest")
    if ky is not None:
        out = ndimage.correlate1d(out, ky, axis=0, mode="nearest")
    return out


def gaussian_blur(img, sigma=1.0, kernel="auto") -> Image:
    """Separable Gaussian blur with edge replication.

    ``kernel`` is ``"auto"`` (size ``2*ceil(3*sigma) + 1``) or an odd integer.
    ``sigma == 0`` returns the input unchanged.
    """
    img = as_image(img)
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    size = None if kernel in (None, "auto") else kernel
    if size is not None and (int(size) != size or size < 1 or size % 2 == 0):
        raise InvalidKernel(f"kernel size must be a positive odd integer, got {size}")
    if sigma == 0:
        return img
    k = gaussian_kernel(sigma, size)
    return _to_uint8(_separable(img, k, k))


def motion_blur(img, length=SHUTTER_LENGTH) -> Image:
    """Horizontal box blur of ``length`` pixels (camera-shutter smear)."""
    img = as_image(img)
    if length < 1:
        raise InvalidKernel("motion blur length must be >= 1")
    k = np.full(int(length), 1.0 / length)
    return _to_uint8(_separable(img, k, None))


def adjust_contrast(img, factor) -> Image:
    """Scale intensities about mid-gray 128 by ``factor``."""
    img = as_image(img)
    if factor <= 0:
        raise ValueError("contrast factor must be > 0")
    x = img.pixels.astype(np.float64)
    return _to_uint8((x - 128.0) * factor + 128.0)


@dataclass(frozen=True)
class DistortionSpec:
    """A serialisable description of one distortion.

    ``kind`` is one of ``gaussian_noise``, ``gaussian_blur``, ``motion_blur``,
    ``contrast`` or ``regional``. For ``regional``, ``params`` holds
    ``rect=(x, y, w, h)`` and ``inner`` another spec.
    """

    kind: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    KINDS = ("gaussian_noise", "gaussian_blur", "motion_blur", "contrast", "regional")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown distortion kind {self.kind!r}")
        if self.params.get("sigma", 0) < 0:
            raise ValueError("sigma must be >= 0")
        if self.kind == "contrast" and self.params.get("factor", 1.0) <= 0:
            raise ValueError("contrast factor must be > 0")

    def apply(self, img) -> Image:
        p = self.params
        if self.kind == "gaussian_noise":
            return add_gaussian_noise(img, p.get("mean", 0.0), p.get("sigma", 0.0), self.seed)
        if self.kind == "gaussian_blur":
            return gaussian_blur(img, p.get("sigma", 1.0), p.get("kernel", "auto"))
        if self.kind == "motion_blur":
            return motion_blur(img, p.get("length", SHUTTER_LENGTH))
        if self.kind == "contrast":
            return adjust_contrast(img, p.get("factor", 1.0))
        return regional_distort(img, p["rect"], p.get("inner") or shutter_blur())


def shutter_blur(length=SHUTTER_LENGTH) -> DistortionSpec:
    """Default inner distortion for :func:`regional_distort`."""
    return DistortionSpec("motion_blur", {"length": length})


def regional_distort(img, rect, inner: DistortionSpec | None = None) -> Image:
    """Apply ``inner`` only inside ``rect = (x, y, w, h)``.

    The inner distortion sees the whole image (so blur kernels can read
    neighbouring pixels) but only pixels inside the rectangle are written.
    """
    img = as_image(img)
    x, y, w, h = (int(v) for v in rect)
    if w <= 0 or h <= 0 or x < 0 or y < 0 or x + w > img.width or y + h > img.height:
        raise RectOutOfBounds(
            f"rect {(x, y, w, h)} outside {img.width}x{img.height} image")
    inner = inner or shutter_blur()
    damaged = inner.apply(img)
    out = img.pixels.copy()
    out[y:y + h, x:x + w] = damaged.pixels[y:y + h, x:x + w]
    return Image(out)
