"""Shared oracles and fixture builders for the test suite."""

import numpy as np

from crossband.image import gaussian_kernel


def correlate2d_replicate(img, kernel):
    """Dense 2D correlation with replicate border; brute-force oracle."""
    kh, kw = kernel.shape
    rh, rw = kh // 2, kw // 2
    padded = np.pad(img, ((rh, rh), (rw, rw)), mode="edge")
    h, w = img.shape
    out = np.zeros((h, w), dtype=np.float64)
    for y in range(h):
        for x in range(w):
            out[y, x] = float((padded[y:y + kh, x:x + kw] * kernel).sum())
    return out


def sobel_kernels():
    smooth = np.array([1.0, 2.0, 1.0])
    diff = np.array([-1.0, 0.0, 1.0])
    return np.outer(smooth, diff), np.outer(diff, smooth)


def gaussian_kernel_2d(sigma):
    k = gaussian_kernel(sigma)
    return np.outer(k, k)


def checkerboard(side, cell, lo=0.2, hi=0.8):
    idx = np.add.outer(np.arange(side) // cell, np.arange(side) // cell)
    return np.where(idx % 2 == 0, lo, hi).astype(np.float64)


def dyadic_image(shape, rng, lsb_bits=10):
    """Random image quantized to multiples of 2**-lsb_bits (exact doubles)."""
    q = 1 << lsb_bits
    return rng.integers(0, q + 1, size=shape).astype(np.float64) / q


def circular_bin_distance(a, b, n_bins):
    d = abs(int(a) - int(b)) % n_bins
    return min(d, n_bins - d)


def similarity_oracle(ep, gp, eq, gq, n_bins=16):
    """Direct per-pixel evaluation of the edge correlation score."""
    ep = np.asarray(ep).ravel()
    gp = np.asarray(gp).ravel()
    eq = np.asarray(eq).ravel()
    gq = np.asarray(gq).ravel()
    denom = int(np.count_nonzero(eq))
    if denom == 0:
        return 0.0
    num = 0
    for e1, g1, e2, g2 in zip(ep, gp, eq, gq):
        if e1 and e2 and circular_bin_distance(g1, g2, n_bins) <= 1:
            num += 1
    return num / np.sqrt(denom)


def random_descriptor(rng, window=15, n_bins=16, density=0.3, x=100, y=100):
    from crossband.descriptor import EdgeDescriptor
    e = (rng.random((window, window)) < density).astype(np.uint8)
    g = rng.integers(0, n_bins, size=(window, window)).astype(np.uint8)
    return EdgeDescriptor(x=x, y=y, edges=e, directions=g, n_bins=n_bins,
                          edge_count=int(e.sum()))
