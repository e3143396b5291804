"""Baseline full-reference metrics: SSIM, FSIM (luminance only) and ISSM."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import DegenerateWeight, DimensionMismatch
from .image import as_image, to_grayscale, validate_pair


def _gray_float(img) -> np.ndarray:
    return to_grayscale(img).pixels[:, :, 0].astype(np.float64)


def _gray_pair(a, b):
    validate_pair(a, b)
    return _gray_float(a), _gray_float(b)


# --------------------------------------------------------------------- SSIM

@dataclass(frozen=True)
class SsimConfig:
    """SSIM parameters.

    ``c1``/``c2`` default to ``(0.01 L)**2`` and ``(0.03 L)**2`` for dynamic
    range ``L``. ``window`` is ``"gaussian"`` (mean of the local map) or
    ``"global"`` (one evaluation on whole-image statistics).
    """

    c1: float | None = None
    c2: float | None = None
    window: str = "gaussian"
    window_size: int = 11
    sigma: float = 1.5
    dynamic_range: float = 255.0

    def __post_init__(self):
        if self.c1 is None:
            object.__setattr__(self, "c1", (0.01 * self.dynamic_range) ** 2)
        if self.c2 is None:
            object.__setattr__(self, "c2", (0.03 * self.dynamic_range) ** 2)
        if not (self.c1 > 0 and self.c2 > 0):
            raise ValueError("SSIM constants must be positive")
        if self.window not in ("gaussian", "global"):
            raise ValueError(f"unknown SSIM window {self.window!r}")
        if self.window_size < 1 or self.window_size % 2 == 0:
            raise ValueError("SSIM window size must be a positive odd integer")
        if self.sigma <= 0:
            raise ValueError("SSIM sigma must be positive")


def gaussian_window(size: int, sigma: float) -> np.ndarray:
    """Normalised 1-D Gaussian of odd length ``size``."""
    x = np.arange(size, dtype=np.float64) - size // 2
    w = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return w / w.sum()


def _valid_filter(x, w):
    r = w.size // 2
    out = ndimage.correlate1d(x, w, axis=0, mode="reflect")
    out = ndimage.correlate1d(out, w, axis=1, mode="reflect")
    return out[r:x.shape[0] - r, r:x.shape[1] - r]


def _effective_window(shape, size):
    size = min(size, shape[0], shape[1])
    return size if size % 2 else size - 1


def ssim_map(a, b, cfg: SsimConfig | None = None) -> np.ndarray:
    """Local SSIM over every fully-contained Gaussian window.

    The window shrinks to the largest odd size that fits small images.
    """
    cfg = cfg or SsimConfig()
    x, y = _gray_pair(a, b)
    size = _effective_window(x.shape, cfg.window_size)
    w = gaussian_window(size, cfg.sigma)
    mx, my = _valid_filter(x, w), _valid_filter(y, w)
    sxx = _valid_filter(x * x, w) - mx * mx
    syy = _valid_filter(y * y, w) - my * my
    sxy = _valid_filter(x * y, w) - mx * my
    num = (2 * mx * my + cfg.c1) * (2 * sxy + cfg.c2)
    den = (mx * mx + my * my + cfg.c1) * (sxx + syy + cfg.c2)
    return num / den


def ssim(a, b, cfg: SsimConfig | None = None) -> float:
    """Structural similarity of two images after luma conversion.

    Not clamped; strongly anti-correlated inputs can score below zero.
    """
    cfg = cfg or SsimConfig()
    if cfg.window == "gaussian":
        return float(ssim_map(a, b, cfg).mean())
    x, y = _gray_pair(a, b)
    mx, my = x.mean(), y.mean()
    dx, dy = x - mx, y - my
    vx, vy, cxy = (dx * dx).mean(), (dy * dy).mean(), (dx * dy).mean()
    num = (2 * mx * my + cfg.c1) * (2 * cxy + cfg.c2)
    den = (mx * mx + my * my + cfg.c1) * (vx + vy + cfg.c2)
    return float(num / den)


# --------------------------------------------------------------------- FSIM

@dataclass(frozen=True)
class FsimConfig:
    """FSIM and phase congruency parameters.

    The log-Gabor bank follows Kovesi's phase congruency: ``scales`` radial
    bands starting at ``min_wavelength`` pixels and growing by ``mult``,
    ``orientations`` angular lobes. ``noise_k`` sets the noise threshold in
    standard deviations above the estimated noise energy; ``cut_off`` and
    ``gain`` shape the sigmoid that down-weights pixels where only a narrow
    range of scales responds.
    """

    t1: float = 0.85
    t2: float = 160.0
    epsilon: float = 1e-4
    scales: int = 4
    orientations: int = 4
    min_wavelength: float = 6.0
    mult: float = 2.0
    sigma_on_f: float = 0.55
    d_theta_on_sigma: float = 1.2
    noise_k: float = 2.0
    cut_off: float = 0.5
    gain: float = 10.0
    downsample: bool = True

    def __post_init__(self):
        if not (self.t1 > 0 and self.t2 > 0 and self.epsilon > 0):
            raise ValueError("T1, T2 and epsilon must be positive")
        if self.scales < 1 or self.orientations < 1:
            raise ValueError("need at least one scale and one orientation")


def _log_gabor_bank(shape, cfg: FsimConfig):
    rows, cols = shape
    u = np.fft.fftfreq(cols)
    v = np.fft.fftfreq(rows)
    fx, fy = np.meshgrid(u, v)
    radius = np.hypot(fx, fy)
    radius[0, 0] = 1.0
    theta = np.arctan2(-fy, fx)
    lowpass = 1.0 / (1.0 + (radius / 0.45) ** 30)

    radial = []
    log_sigma = 2.0 * math.log(cfg.sigma_on_f) ** 2
    for s in range(cfg.scales):
        f0 = 1.0 / (cfg.min_wavelength * cfg.mult ** s)
        lg = np.exp(-np.log(radius / f0) ** 2 / log_sigma) * lowpass
        lg[0, 0] = 0.0
        radial.append(lg)

    theta_sigma = math.pi / cfg.orientations / cfg.d_theta_on_sigma
    sin_t, cos_t = np.sin(theta), np.cos(theta)
    angular = []
    for o in range(cfg.orientations):
        angle = o * math.pi / cfg.orientations
        ds = sin_t * math.cos(angle) - cos_t * math.sin(angle)
        dc = cos_t * math.cos(angle) + sin_t * math.sin(angle)
        dtheta = np.abs(np.arctan2(ds, dc))
        angular.append(np.exp(-dtheta ** 2 / (2 * theta_sigma ** 2)))
    return radial, angular


def phase_congruency(gray, cfg: FsimConfig | None = None) -> np.ndarray:
    """Phase congruency map in ``[0, 1]`` of a single-channel image.

    For each orientation the local energy is the magnitude of the summed
    complex log-Gabor responses over scales. Energies are noise-compensated,
    weighted by how widely the response spreads over scales, and divided by
    the summed response amplitudes plus ``epsilon``.
    """
    cfg = cfg or FsimConfig()
    x = np.asarray(gray, dtype=np.float64)
    if x.ndim == 3:
        if x.shape[2] != 1:
            raise DimensionMismatch("phase congruency needs a single-channel image")
        x = x[:, :, 0]
    spectrum = np.fft.fft2(x)
    radial, angular = _log_gabor_bank(x.shape, cfg)

    energy_total = np.zeros(x.shape)
    amplitude_total = np.zeros(x.shape)
    for spread in angular:
        sum_eo = np.zeros(x.shape, dtype=np.complex128)
        sum_an = np.zeros(x.shape)
        max_an = np.zeros(x.shape)
        tau = None
        for s, lg in enumerate(radial):
            eo = np.fft.ifft2(spectrum * (lg * spread))
            an = np.abs(eo)
            if s == 0:
                # Rayleigh-distributed noise amplitude at the finest scale
                tau = np.median(an) / math.sqrt(math.log(4.0))
            sum_eo += eo
            sum_an += an
            np.maximum(max_an, an, out=max_an)
        energy = np.abs(sum_eo)
        total_tau = tau * (1 - (1 / cfg.mult) ** cfg.scales) / (1 - 1 / cfg.mult)
        noise_mean = total_tau * math.sqrt(math.pi / 2)
        noise_sigma = total_tau * math.sqrt((4 - math.pi) / 2)
        threshold = noise_mean + cfg.noise_k * noise_sigma
        if cfg.scales > 1:
            width = (sum_an / (max_an + cfg.epsilon) - 1.0) / (cfg.scales - 1)
            weight = 1.0 / (1.0 + np.exp(cfg.gain * (cfg.cut_off - width)))
        else:
            weight = 1.0
        energy_total += weight * np.maximum(energy - threshold, 0.0)
        amplitude_total += sum_an
    return energy_total / (amplitude_total + cfg.epsilon)


def gradient_magnitude(gray) -> np.ndarray:
    """Sobel gradient magnitude with edge-replicated borders."""
    x = np.asarray(gray, dtype=np.float64)
    if x.ndim == 3:
        if x.shape[2] != 1:
            raise DimensionMismatch("gradient magnitude needs a single-channel image")
        x = x[:, :, 0]
    gx = ndimage.sobel(x, axis=1, mode="nearest")
    gy = ndimage.sobel(x, axis=0, mode="nearest")
    return np.hypot(gx, gy)


def _downsample(x, factor):
    if factor <= 1:
        return x
    k = np.full(factor, 1.0 / factor)
    y = ndimage.correlate1d(x, k, axis=0, mode="reflect")
    y = ndimage.correlate1d(y, k, axis=1, mode="reflect")
    return y[::factor, ::factor]


def fsim_components(a, b, cfg: FsimConfig | None = None):
    """Return ``(s_pc, s_gm, pc_max)`` maps used by :func:`fsim`."""
    cfg = cfg or FsimConfig()
    x, y = _gray_pair(a, b)
    if cfg.downsample:
        factor = max(1, round(min(x.shape) / 256))
        x, y = _downsample(x, factor), _downsample(y, factor)
    pc1, pc2 = phase_congruency(x, cfg), phase_congruency(y, cfg)
    gm1, gm2 = gradient_magnitude(x), gradient_magnitude(y)
    s_pc = (2 * pc1 * pc2 + cfg.t1) / (pc1 * pc1 + pc2 * pc2 + cfg.t1)
    s_gm = (2 * gm1 * gm2 + cfg.t2) / (gm1 * gm1 + gm2 * gm2 + cfg.t2)
    return s_pc, s_gm, np.maximum(pc1, pc2)


def fsim(a, b, cfg: FsimConfig | None = None) -> float:
    """Feature similarity on luma, pooled with max phase congruency weights.

    Raises
    ------
    DegenerateWeight
        If the phase congruency of both images vanishes everywhere while the
        local similarity is not uniformly 1 (identical or jointly featureless
        inputs score 1.0).
    """
    s_pc, s_gm, pc_m = fsim_components(a, b, cfg)
    s = s_pc * s_gm
    weight = pc_m.sum()
    if weight == 0:
        if np.all(s == 1.0):
            return 1.0
        raise DegenerateWeight("phase congruency is zero everywhere")
    return float((s * pc_m).sum() / weight)


# --------------------------------------------------------------------- ISSM

@dataclass(frozen=True)
class IssmConfig:
    """ISSM balancing constants and the EHS histogram resolution."""

    a: float = 1.0
    b: float = 1.0
    c: float = 1.0
    e: float = 1e-10
    bins: int = 256
    ssim: SsimConfig = field(default_factory=SsimConfig)

    def __post_init__(self):
        if min(self.a, self.b, self.c) < 0 or self.e <= 0:
            raise ValueError("ISSM needs a, b, c >= 0 and e > 0")
        if not 1 <= self.bins <= 256:
            raise ValueError("bins must lie in [1, 256]")


def joint_histogram(a, b, bins: int = 256) -> np.ndarray:
    """Normalised ``bins x bins`` histogram of co-located luma pairs."""
    x, y = _gray_pair(a, b)
    ix = (x.astype(np.int64) * bins) >> 8
    iy = (y.astype(np.int64) * bins) >> 8
    counts = np.bincount((ix * bins + iy).reshape(-1), minlength=bins * bins)
    return counts.reshape(bins, bins) / counts.sum()


def ehs(a, b, bins: int = 256) -> float:
    """Shannon entropy (bits) of the flattened joint histogram."""
    t = joint_histogram(a, b, bins).reshape(-1)
    t = t[t > 0]
    return float(-(t * np.log2(t)).sum()) + 0.0


def edge_correlation(a, b) -> float:
    """Pearson correlation of the two Sobel gradient-magnitude maps.

    Two constant maps correlate perfectly (1.0); a constant map against a
    varying one is uncorrelated (0.0).
    """
    x, y = _gray_pair(a, b)
    gx, gy = gradient_magnitude(x), gradient_magnitude(y)
    dx, dy = gx - gx.mean(), gy - gy.mean()
    vx, vy = (dx * dx).sum(), (dy * dy).sum()
    if vx == 0 and vy == 0:
        return 1.0
    if vx == 0 or vy == 0:
        return 0.0
    r = (dx * dy).sum() / math.sqrt(vx * vy)
    return float(min(1.0, max(-1.0, r)))


def issm(a, b, cfg: IssmConfig | None = None) -> float:
    """Information-theoretic statistic similarity.

    Combines the joint-histogram entropy, SSIM and edge correlation as
    ``(C*EHS*(a+b) + e) / (a*C*EHS + b*EHS + c*S + e)``.
    """
    cfg = cfg or IssmConfig()
    h = ehs(a, b, cfg.bins)
    s = ssim(a, b, cfg.ssim)
    c = edge_correlation(a, b)
    num = c * h * (cfg.a + cfg.b) + cfg.e
    den = cfg.a * c * h + cfg.b * h + cfg.c * s + cfg.e
    return float(num / den)
