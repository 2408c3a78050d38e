"""Sobel and Canny edge detection producing binary edge maps.

The edge stage runs on every database image before eigenspace construction
and on every probe before projection, with one shared configuration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .imaging import GrayImage

__all__ = [
    "EdgeConfig",
    "EdgeMap",
    "sobel_gradients",
    "sobel_edges",
    "canny_edges",
    "apply_edge_stage",
]

EDGE_METHODS = ("none", "sobel", "canny")

SOBEL_X = np.array([[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]])
SOBEL_Y = np.array([[-1.0, -2.0, -1.0], [0.0, 0.0, 0.0], [1.0, 2.0, 1.0]])

# Gradient magnitudes at or below this relative level are floating-point
# cancellation residue, not image structure, and are treated as exact zeros
# by the edge binarizers.
_DUST_RELATIVE_FLOOR = 1e-12


@dataclass
class EdgeConfig:
    """Edge stage configuration.

    canny_high_percentile picks the strong threshold as that percentile of the
    nonzero gradient magnitudes; the weak threshold is canny_low_ratio times
    the strong one. sobel_threshold_factor scales the mean gradient magnitude
    to form the Sobel binarization threshold.
    """

    method: str = "none"
    canny_sigma: float = math.sqrt(2.0)
    canny_high_percentile: float = 70.0
    canny_low_ratio: float = 0.4
    sobel_threshold_factor: float = 4.0

    def __post_init__(self):
        if self.method not in EDGE_METHODS:
            raise ValueError(f"unknown edge method {self.method!r}, expected one of {EDGE_METHODS}")
        if not self.canny_sigma > 0:
            raise ValueError("canny_sigma must be > 0")
        if not 0 < self.canny_high_percentile < 100:
            raise ValueError("canny_high_percentile must lie in (0, 100)")
        if not 0 < self.canny_low_ratio < 1:
            raise ValueError("canny_low_ratio must lie in (0, 1)")
        if not self.sobel_threshold_factor > 0:
            raise ValueError("sobel_threshold_factor must be > 0")


@dataclass
class EdgeMap:
    """Binary image: every pixel is exactly 0.0 or 1.0."""

    pixels: np.ndarray

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels, dtype=np.float64)
        if self.pixels.ndim != 2:
            raise ValueError("edge map must be 2-D")
        if not np.all((self.pixels == 0.0) | (self.pixels == 1.0)):
            raise ValueError("edge map pixels must be exactly 0.0 or 1.0")

    def to_image(self) -> GrayImage:
        return GrayImage(self.pixels)


def _require_min_size(pixels: np.ndarray, side: int) -> None:
    n, k = pixels.shape
    if n < side or k < side:
        raise ValueError(f"image {n}x{k} is smaller than the {side}x{side} kernel")


def sobel_gradients(img: GrayImage) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradients Gx, Gy from the 3x3 Sobel kernels, plus the magnitude grid.

    Border pixels use replicate padding. Gx responds positively to intensity
    increasing left-to-right, Gy to intensity increasing top-to-bottom.
    """
    _require_min_size(img.pixels, 3)
    gx = ndimage.correlate(img.pixels, SOBEL_X, mode="nearest")
    gy = ndimage.correlate(img.pixels, SOBEL_Y, mode="nearest")
    magnitude = np.sqrt(gx * gx + gy * gy)
    return gx, gy, magnitude


def _drop_rounding_dust(magnitude: np.ndarray, source: np.ndarray) -> np.ndarray:
    """Zero gradient magnitudes at the cancellation-noise level of source.

    A constant image has zero gradient in exact arithmetic, but non-dyadic
    pixel values leave ~1e-16-level residue whose spatial pattern would
    otherwise pass the data-driven edge thresholds.
    """
    floor = _DUST_RELATIVE_FLOOR * (1.0 + np.abs(source).max())
    cleaned = magnitude.copy()
    cleaned[cleaned <= floor] = 0.0
    return cleaned


def sobel_edges(img: GrayImage, cfg: EdgeConfig) -> EdgeMap:
    """Binarize the Sobel magnitude at sobel_threshold_factor times its mean."""
    _, _, magnitude = sobel_gradients(img)
    magnitude = _drop_rounding_dust(magnitude, img.pixels)
    threshold = cfg.sobel_threshold_factor * magnitude.mean()
    return EdgeMap((magnitude > threshold).astype(np.float64))


def _gaussian_kernel(sigma: float) -> np.ndarray:
    # Truncated at radius ceil(3*sigma) and renormalized to sum 1.
    radius = math.ceil(3.0 * sigma)
    xs = np.arange(-radius, radius + 1, dtype=np.float64)
    kernel = np.exp(-(xs * xs) / (2.0 * sigma * sigma))
    return kernel / kernel.sum()


def _shifted(a: np.ndarray, di: int, dj: int) -> np.ndarray:
    """a evaluated at (i+di, j+dj), with zeros where that falls outside."""
    n, k = a.shape
    out = np.zeros_like(a)
    src_i = slice(max(di, 0), n + min(di, 0))
    src_j = slice(max(dj, 0), k + min(dj, 0))
    dst_i = slice(max(-di, 0), n + min(-di, 0))
    dst_j = slice(max(-dj, 0), k + min(-dj, 0))
    out[dst_i, dst_j] = a[src_i, src_j]
    return out


# Neighbor offsets along the gradient direction for the four quantized bins
# (0, 45, 90, 135 degrees). Coordinates are (row, col) with rows increasing
# downward, so bin 1 (gradient at +45 degrees: +x and +y-down) steps (+1, +1).
_NMS_OFFSETS = {0: (0, 1), 1: (1, 1), 2: (1, 0), 3: (1, -1)}


def _non_maximum_suppression(magnitude: np.ndarray, gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    angle = np.degrees(np.arctan2(gy, gx)) % 180.0
    bins = np.floor((angle + 22.5) / 45.0).astype(np.int64) % 4

    # A pixel survives when strictly greater than the neighbor on the negative
    # side of its gradient direction and >= the neighbor on the positive side.
    # On an exact two-pixel tie exactly one side survives, thinning symmetric
    # responses to a single-pixel line.
    keep = np.zeros(magnitude.shape, dtype=bool)
    for b, (di, dj) in _NMS_OFFSETS.items():
        plus = _shifted(magnitude, di, dj)
        minus = _shifted(magnitude, -di, -dj)
        keep |= (bins == b) & (magnitude > minus) & (magnitude >= plus)
    keep &= magnitude > 0.0
    return keep


def canny_edges(img: GrayImage, cfg: EdgeConfig) -> EdgeMap:
    """Canny edge map: Gaussian smooth, Sobel gradients, thinning, hysteresis.

    The strong threshold is the cfg.canny_high_percentile of the nonzero
    gradient magnitudes; weak pixels (>= canny_low_ratio * strong) survive
    only when 8-connected, transitively, to a strong pixel.
    """
    _require_min_size(img.pixels, 3)
    kernel = _gaussian_kernel(cfg.canny_sigma)
    _require_min_size(img.pixels, kernel.size)

    smoothed = ndimage.correlate1d(img.pixels, kernel, axis=0, mode="nearest")
    smoothed = ndimage.correlate1d(smoothed, kernel, axis=1, mode="nearest")

    gx = ndimage.correlate(smoothed, SOBEL_X, mode="nearest")
    gy = ndimage.correlate(smoothed, SOBEL_Y, mode="nearest")
    magnitude = np.sqrt(gx * gx + gy * gy)
    magnitude = _drop_rounding_dust(magnitude, smoothed)

    nonzero = magnitude[magnitude > 0.0]
    if nonzero.size == 0:
        return EdgeMap(np.zeros(img.pixels.shape))
    high = np.percentile(nonzero, cfg.canny_high_percentile)
    low = cfg.canny_low_ratio * high

    thinned = _non_maximum_suppression(magnitude, gx, gy)
    strong = thinned & (magnitude >= high)
    candidates = thinned & (magnitude >= low)

    labels, count = ndimage.label(candidates, structure=np.ones((3, 3), dtype=int))
    if count == 0:
        return EdgeMap(np.zeros(img.pixels.shape))
    strong_labels = np.unique(labels[strong])
    strong_labels = strong_labels[strong_labels > 0]
    edges = np.isin(labels, strong_labels)
    return EdgeMap(edges.astype(np.float64))


def apply_edge_stage(img: GrayImage, cfg: EdgeConfig) -> GrayImage:
    """Run the configured edge detector; method "none" passes through."""
    if cfg.method == "none":
        return img
    if cfg.method == "sobel":
        return sobel_edges(img, cfg).to_image()
    if cfg.method == "canny":
        return canny_edges(img, cfg).to_image()
    raise ValueError(f"unknown edge method {cfg.method!r}")
