"""Image container, decoding and non-overlapping patch tiling."""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
from PIL import Image as PILImage
from PIL import UnidentifiedImageError

from .errors import (
    CorruptData,
    DimensionMismatch,
    InvalidImage,
    InvalidPatchSize,
    PatchTooLarge,
    UnsupportedFormat,
)

SUPPORTED_FORMATS = frozenset({"PNG", "JPEG", "BMP"})

# ITU-R BT.601 luma weights
_LUMA = np.array([0.299, 0.587, 0.114])


@dataclass(frozen=True, eq=False)
class Image:
    """An 8-bit raster with 1 or 3 channels.

    ``pixels`` is a read-only ``uint8`` array of shape ``(height, width,
    channels)``. Use :func:`as_image` to build one from a plain array.
    """

    pixels: np.ndarray

    def __post_init__(self):
        px = self.pixels
        if not isinstance(px, np.ndarray) or px.dtype != np.uint8:
            raise InvalidImage("pixels must be a uint8 ndarray")
        if px.ndim != 3 or px.shape[2] not in (1, 3):
            raise InvalidImage(
                f"pixels must have shape (H, W, 1|3), got {px.shape}")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise InvalidImage(f"empty image of shape {px.shape}")
        if px.flags.writeable:
            px = px.copy()
            px.setflags(write=False)
            object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def channels(self) -> int:
        return self.pixels.shape[2]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.pixels.shape

    @property
    def data(self) -> np.ndarray:
        """Flat row-major, channel-interleaved intensities."""
        return self.pixels.reshape(-1)

    def __eq__(self, other):
        if not isinstance(other, Image):
            return NotImplemented
        return (self.shape == other.shape
                and np.array_equal(self.pixels, other.pixels))

    __hash__ = None

    def __repr__(self):
        return (f"Image(width={self.width}, height={self.height}, "
                f"channels={self.channels})")

    def __array__(self, dtype=None, copy=None):
        return self.pixels if dtype is None else self.pixels.astype(dtype)


def as_image(obj) -> Image:
    """Coerce an :class:`Image` or an integer array into an :class:`Image`.

    2-D arrays are treated as single-channel. Integer arrays of other dtypes
    are accepted if every value lies in ``[0, 255]``.
    """
    if isinstance(obj, Image):
        return obj
    arr = np.asarray(obj)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.dtype != np.uint8:
        if arr.dtype.kind not in "iub":
            raise InvalidImage(f"expected integer pixels, got dtype {arr.dtype}")
        if arr.size and (arr.min() < 0 or arr.max() > 255):
            raise InvalidImage("intensities must lie in [0, 255]")
        arr = arr.astype(np.uint8)
    return Image(arr)


def _shape_str(img: Image) -> str:
    return f"{img.width}x{img.height}x{img.channels}"


def load_image(path) -> Image:
    """Decode a PNG, JPEG or BMP file.

    16-bit sources are rescaled to 8 bits and alpha channels are dropped.

    Raises
    ------
    FileNotFoundError
        If ``path`` does not exist.
    UnsupportedFormat
        If the file is not a decodable PNG/JPEG/BMP.
    CorruptData
        If the file is recognised but cannot be fully decoded.
    """
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise FileNotFoundError(path)
    try:
        with PILImage.open(path) as im:
            if im.format not in SUPPORTED_FORMATS:
                raise UnsupportedFormat(f"{path}: format {im.format} not supported")
            im.load()
            return _from_pil(im, path)
    except UnidentifiedImageError as exc:
        raise UnsupportedFormat(f"{path}: {exc}") from exc
    except (OSError, SyntaxError, ValueError) as exc:
        if isinstance(exc, FileNotFoundError):
            raise
        raise CorruptData(f"{path}: {exc}") from exc


def _from_pil(im, path="<image>") -> Image:
    mode = im.mode
    if mode in ("I;16", "I;16B", "I;16L", "I;16N", "I"):
        arr = np.asarray(im).astype(np.float64)
        if mode == "I" and arr.max(initial=0) <= 255:
            scaled = arr
        else:
            scaled = np.rint(np.clip(arr, 0, 65535) / 257.0)
        return Image(scaled.astype(np.uint8)[:, :, None])
    if mode in ("1", "L", "LA", "La"):
        arr = np.asarray(im.convert("L"))
        return Image(arr[:, :, None])
    if mode == "F":
        raise UnsupportedFormat(f"{path}: floating-point images not supported")
    if mode == "P":
        im = im.convert("RGBA")
    arr = np.asarray(im.convert("RGB"))
    return Image(arr)


def save_image(img, path) -> None:
    """Write an image as PNG (or whatever format ``path``'s suffix selects)."""
    img = as_image(img)
    px = img.pixels[:, :, 0] if img.channels == 1 else img.pixels
    PILImage.fromarray(np.ascontiguousarray(px)).save(os.fspath(path))


def to_grayscale(img) -> Image:
    """BT.601 luma conversion, rounded to the nearest integer.

    Single-channel input is returned unchanged.
    """
    img = as_image(img)
    if img.channels == 1:
        return img
    luma = np.rint(img.pixels.astype(np.float64) @ _LUMA)
    return Image(np.clip(luma, 0, 255).astype(np.uint8)[:, :, None])


@dataclass(frozen=True, eq=False)
class PatchGrid:
    """Non-overlapping ``P x P`` tiling in row-major patch order.

    ``patches`` has shape ``(grid_rows * grid_cols, P, P, channels)``;
    patch ``(r, c)`` is at index ``r * grid_cols + c`` and covers rows
    ``[r*P, r*P + P)`` and columns ``[c*P, c*P + P)``.
    """

    patch_size: int
    grid_rows: int
    grid_cols: int
    patches: np.ndarray

    @property
    def n_patches(self) -> int:
        return self.grid_rows * self.grid_cols

    @property
    def channels(self) -> int:
        return self.patches.shape[3]

    def __len__(self):
        return self.n_patches

    def __getitem__(self, index):
        return self.patches[index]


def check_patch_size(img: Image, patch_size) -> int:
    if isinstance(patch_size, bool) or int(patch_size) != patch_size:
        raise InvalidPatchSize(f"patch size must be an integer, got {patch_size!r}")
    patch_size = int(patch_size)
    if patch_size < 1:
        raise InvalidPatchSize(f"patch size must be >= 1, got {patch_size}")
    if patch_size > min(img.width, img.height):
        raise PatchTooLarge(
            f"patch size {patch_size} exceeds image {img.width}x{img.height}")
    return patch_size


def patch_view(img: Image, patch_size: int) -> np.ndarray:
    """Copy of the covered area as ``(rows, cols, P, P, C)``."""
    p = patch_size
    rows, cols = img.height // p, img.width // p
    px = img.pixels[:rows * p, :cols * p]
    return px.reshape(rows, p, cols, p, img.channels).transpose(0, 2, 1, 3, 4).copy()


def extract_patches(img, patch_size) -> PatchGrid:
    """Tile ``img`` into non-overlapping square patches.

    Trailing rows and columns that do not fill a whole patch are dropped.

    Raises
    ------
    InvalidPatchSize
        If ``patch_size < 1``.
    PatchTooLarge
        If ``patch_size`` exceeds the width or the height.
    """
    img = as_image(img)
    p = check_patch_size(img, patch_size)
    blocks = patch_view(img, p)
    rows, cols = blocks.shape[:2]
    patches = blocks.reshape(rows * cols, p, p, img.channels)
    patches.setflags(write=False)
    return PatchGrid(p, rows, cols, patches)


def covers_exactly(img, patch_size) -> bool:
    """True when ``patch_size`` divides both image dimensions."""
    img = as_image(img)
    return img.width % patch_size == 0 and img.height % patch_size == 0


def validate_pair(a, b) -> None:
    """Raise :class:`DimensionMismatch` unless ``a`` and ``b`` share a shape."""
    a, b = as_image(a), as_image(b)
    if a.shape != b.shape:
        raise DimensionMismatch(
            f"image shapes differ: {_shape_str(a)} vs {_shape_str(b)}")
