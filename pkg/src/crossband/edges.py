"""Canny edge maps and full-circle gradient-direction quantization.

The edge raster and the per-pixel direction raster are computed together:
descriptors window into both, and directions are needed wherever the other
image might carry an edge, so the direction index is defined at every pixel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .image import as_gray, gaussian_blur, gradients
from .image_io import write_image

DEFAULT_DIRECTION_BINS = 16


@dataclass(frozen=True)
class CannyConfig:
    blur_sigma: float = 1.0
    low_ratio: float = 0.1    # hysteresis thresholds, relative to the
    high_ratio: float = 0.2   # maximum gradient magnitude of the image

    def __post_init__(self):
        if not self.blur_sigma > 0:
            raise ValueError(f"blur_sigma must be > 0, got {self.blur_sigma}")
        if not 0.0 < self.low_ratio < self.high_ratio <= 1.0:
            raise ValueError(
                f"need 0 < low_ratio < high_ratio <= 1, got "
                f"low_ratio={self.low_ratio}, high_ratio={self.high_ratio}")


@dataclass(frozen=True)
class EdgeMap:
    edges: np.ndarray       # uint8 raster, 1 = edge pixel
    directions: np.ndarray  # uint8 raster of direction bin indices
    n_bins: int

    def __post_init__(self):
        if self.edges.shape != self.directions.shape:
            raise ValueError("edge and direction rasters must share dimensions")


def quantize_direction(ix, iy, n_bins: int = DEFAULT_DIRECTION_BINS):
    """Quantize gradient angles over the full circle into n_bins indices.

    bin = floor(((atan2(iy, ix) + 2*pi) mod 2*pi) / (2*pi / n_bins)); a zero
    gradient lands in bin 0. Accepts scalars or arrays.
    """
    if n_bins < 2:
        raise ValueError(f"n_bins must be >= 2, got {n_bins}")
    angle = np.mod(np.arctan2(iy, ix) + 2.0 * np.pi, 2.0 * np.pi)
    bins = np.floor(angle / (2.0 * np.pi / n_bins)).astype(np.int64) % n_bins
    if np.isscalar(ix) and np.isscalar(iy):
        return int(bins)
    return bins


# Gradient-axis sectors for the interpolation-free suppression step: the two
# compared neighbors lie along the quantized gradient direction.
_SECTOR_OFFSETS = (
    ((0, 1), (0, -1)),     # near-horizontal gradient
    ((1, 1), (-1, -1)),    # 45 degrees
    ((1, 0), (-1, 0)),     # near-vertical
    ((1, -1), (-1, 1)),    # 135 degrees
)


def canny(img, cfg: CannyConfig | None = None,
          n_bins: int = DEFAULT_DIRECTION_BINS) -> EdgeMap:
    """Classic Canny pipeline producing a binary edge raster plus the
    quantized direction raster of the blurred gradients.

    Stages: Gaussian blur, Sobel gradients, gradient-magnitude non-maximum
    suppression against the two 8-neighbors along the gradient axis (ties
    keep the pixel against the positive-offset neighbor and suppress it
    against the negative one, so plateau ridges thin to one pixel), then
    double-threshold hysteresis over 8-connected components.
    """
    if cfg is None:
        cfg = CannyConfig()
    arr = as_gray(img)
    h, w = arr.shape
    if h < 5 or w < 5:
        raise ValueError(f"image must be at least 5x5 for edge detection, got {arr.shape}")

    blurred = gaussian_blur(arr, cfg.blur_sigma)
    ix, iy = gradients(blurred)
    mag = np.hypot(ix, iy)
    directions = quantize_direction(ix, iy, n_bins).astype(np.uint8)

    mag_max = float(mag.max())
    if mag_max <= 0.0:
        return EdgeMap(np.zeros((h, w), np.uint8), directions, n_bins)

    angle = np.arctan2(iy, ix)
    sector = np.floor((np.mod(angle, np.pi) + np.pi / 8) / (np.pi / 4)).astype(int) % 4
    padded = np.pad(mag, 1, mode="constant")
    yy, xx = np.mgrid[0:h, 0:w]
    keep = np.zeros((h, w), dtype=bool)
    for s, ((dy1, dx1), (dy2, dx2)) in enumerate(_SECTOR_OFFSETS):
        mask = sector == s
        n1 = padded[yy + 1 + dy1, xx + 1 + dx1]
        n2 = padded[yy + 1 + dy2, xx + 1 + dx2]
        keep |= mask & (mag >= n1) & (mag > n2)

    weak = keep & (mag >= cfg.low_ratio * mag_max)
    strong = keep & (mag >= cfg.high_ratio * mag_max)
    labels, n_labels = ndimage.label(weak, structure=np.ones((3, 3), dtype=int))
    if n_labels == 0:
        edges = np.zeros((h, w), np.uint8)
    else:
        strong_labels = np.unique(labels[strong])
        strong_labels = strong_labels[strong_labels > 0]
        edges = np.isin(labels, strong_labels).astype(np.uint8)
    return EdgeMap(edges, directions, n_bins)


def dump_edge_map(edge_map: EdgeMap, edges_path, directions_path) -> None:
    """Debug dump: edges as a 0/255 PGM, direction indices as an 8-bit PGM."""
    write_image(edges_path, edge_map.edges.astype(np.float64))
    write_image(directions_path, edge_map.directions.astype(np.float64) / 255.0)
