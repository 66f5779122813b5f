"""Core raster operations: grayscale buffers, color conversion, separable
Gaussian smoothing, Sobel gradients, and affine warping.

Images are plain numpy arrays: a gray image is a float64 array of shape
(height, width) with intensities in [0, 1]; a color image is (height, width,
3) with R, G, B planes. Pixel coordinates are (x, y) = (column, row). All
functions are pure and never mutate their inputs.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .errors import SingularTransformError
from .transform import AffineTransform

# BT.601 luma weights; the conventional choice for R/G/B -> Y.
LUMA_WEIGHTS = (0.299, 0.587, 0.114)


def as_gray(img) -> np.ndarray:
    """Validate and return a 2D float64 gray image."""
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"gray image must be 2D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"image must be at least 1x1, got shape {arr.shape}")
    return arr


def as_color(img) -> np.ndarray:
    """Validate and return an (H, W, 3) float64 color image."""
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"color image must have shape (H, W, 3), got {arr.shape}")
    return arr


def replicate3(gray) -> np.ndarray:
    """Stack a gray image into an R=G=B color image."""
    g = as_gray(gray)
    return np.repeat(g[:, :, None], 3, axis=2)


def to_luminance(img) -> np.ndarray:
    """Convert a color image to its luminance channel.

    Y = 0.299 R + 0.587 G + 0.114 B per pixel.
    """
    arr = as_color(img)
    w = np.asarray(LUMA_WEIGHTS, dtype=np.float64)
    return arr @ w


def gaussian_kernel(sigma: float) -> np.ndarray:
    """1D Gaussian kernel with radius ceil(3*sigma), normalized to sum 1."""
    if not sigma > 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    radius = int(np.ceil(3.0 * sigma))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return k / k.sum()


def gaussian_blur(img, sigma: float) -> np.ndarray:
    """Separable Gaussian smoothing with replicate-border extension."""
    arr = as_gray(img)
    k = gaussian_kernel(sigma)
    tmp = ndimage.correlate1d(arr, k, axis=0, mode="nearest")
    return ndimage.correlate1d(tmp, k, axis=1, mode="nearest")


# Separable Sobel: smooth [1, 2, 1] across the derivative axis, central
# difference [-1, 0, 1] along it. Positive x-derivative means intensity
# grows to the right; positive y-derivative grows downward.
_SOBEL_SMOOTH = np.array([1.0, 2.0, 1.0])
_SOBEL_DIFF = np.array([-1.0, 0.0, 1.0])


def gradients(img) -> tuple[np.ndarray, np.ndarray]:
    """Horizontal and vertical Sobel derivatives with replicate border.

    Returns (ix, iy), signed and unclamped, same shape as the input.
    """
    arr = as_gray(img)
    if arr.shape[0] < 3 or arr.shape[1] < 3:
        raise ValueError(f"image must be at least 3x3 for gradients, got {arr.shape}")
    tmp = ndimage.correlate1d(arr, _SOBEL_SMOOTH, axis=0, mode="nearest")
    ix = ndimage.correlate1d(tmp, _SOBEL_DIFF, axis=1, mode="nearest")
    tmp = ndimage.correlate1d(arr, _SOBEL_DIFF, axis=0, mode="nearest")
    iy = ndimage.correlate1d(tmp, _SOBEL_SMOOTH, axis=1, mode="nearest")
    return ix, iy


def warp_affine(img, t: AffineTransform, out_w: int | None = None,
                out_h: int | None = None, fill: float = 0.0) -> np.ndarray:
    """Warp an image by an affine transform.

    The transform maps input coordinates to output coordinates; resampling
    is done by inverse mapping with bilinear interpolation. Samples whose
    source coordinate falls outside [0, w-1] x [0, h-1] take `fill`.
    """
    arr = as_gray(img)
    h, w = arr.shape
    if out_w is None:
        out_w = w
    if out_h is None:
        out_h = h
    if abs(t.det()) <= 1e-12:
        raise SingularTransformError(
            f"transform is singular (|det|={abs(t.det()):.3e})")
    inv = t.inverse()
    yy, xx = np.mgrid[0:out_h, 0:out_w].astype(np.float64)
    m = inv.m
    sx = m[0, 0] * xx + m[0, 1] * yy + m[0, 2]
    sy = m[1, 0] * xx + m[1, 1] * yy + m[1, 2]

    valid = (sx >= 0.0) & (sx <= w - 1) & (sy >= 0.0) & (sy <= h - 1)
    x0 = np.floor(sx).astype(np.intp)
    y0 = np.floor(sy).astype(np.intp)
    fx = sx - x0
    fy = sy - y0
    x0c = np.clip(x0, 0, w - 1)
    x1c = np.clip(x0 + 1, 0, w - 1)
    y0c = np.clip(y0, 0, h - 1)
    y1c = np.clip(y0 + 1, 0, h - 1)

    out = (arr[y0c, x0c] * (1 - fx) * (1 - fy)
           + arr[y0c, x1c] * fx * (1 - fy)
           + arr[y1c, x0c] * (1 - fx) * fy
           + arr[y1c, x1c] * fx * fy)
    return np.where(valid, out, float(fill))


def clamp01(img) -> np.ndarray:
    return np.clip(img, 0.0, 1.0)
