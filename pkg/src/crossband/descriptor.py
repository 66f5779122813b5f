"""Per-corner edge descriptors and their cross-spectral similarity score.

A descriptor is a square window of the binary edge raster plus the quantized
gradient directions around a corner. Two descriptors are scored by counting
co-located edge pixels whose directions agree within one bin, normalized by
the square root of the candidate's edge count (the normalization is
deliberately one-sided, so the score is asymmetric).

Because gradient directions rotate by half a circle when one image's
contrast is inverted, the direct score collapses on polarity-reversed
content; matching can therefore also be run in a polarity-tolerant mode that
additionally scores each pair under a half-circle direction shift and keeps
the better of the two.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .edges import EdgeMap
from .features import Corner
from .transform import AffineTransform

DEFAULT_WINDOW = 31


@dataclass(frozen=True)
class EdgeDescriptor:
    x: int
    y: int
    edges: np.ndarray       # (window, window) uint8, 1 = edge pixel
    directions: np.ndarray  # (window, window) uint8 direction bins
    n_bins: int
    edge_count: int

    @property
    def window(self) -> int:
        return self.edges.shape[0]

    @property
    def position(self) -> tuple[int, int]:
        return (self.x, self.y)


def build_descriptor(corner: Corner, edge_map: EdgeMap,
                     window: int = DEFAULT_WINDOW) -> EdgeDescriptor | None:
    """Window the precomputed edge map around a corner.

    Returns None when the corner sits closer than window // 2 to the image
    border (the window would not fit).
    """
    if window < 5 or window % 2 == 0:
        raise ValueError(f"window must be odd and >= 5, got {window}")
    r = window // 2
    h, w = edge_map.edges.shape
    x, y = corner.x, corner.y
    if x < r or y < r or x >= w - r or y >= h - r:
        return None
    e = edge_map.edges[y - r:y + r + 1, x - r:x + r + 1]
    g = edge_map.directions[y - r:y + r + 1, x - r:x + r + 1]
    return EdgeDescriptor(x=x, y=y, edges=e, directions=g,
                          n_bins=edge_map.n_bins,
                          edge_count=int(np.count_nonzero(e)))


def build_descriptors(corners, edge_map: EdgeMap,
                      window: int = DEFAULT_WINDOW) -> list[EdgeDescriptor]:
    """Descriptors for every corner far enough from the border."""
    out = []
    for c in corners:
        d = build_descriptor(c, edge_map, window)
        if d is not None:
            out.append(d)
    return out


def same_grad(gp, gq, n_bins: int = 16, wraparound: bool = True):
    """True when two direction bins differ by at most one bin.

    With wraparound (the default) the distance is circular, so the first and
    last bins are adjacent. wraparound=False reproduces the plain
    |gp - gq| mod n_bins <= 1 comparison, which treats the wrap seam as
    distant. Accepts scalars or arrays.
    """
    d = np.mod(np.asarray(gp, dtype=np.int64) - np.asarray(gq, dtype=np.int64),
               n_bins)
    if wraparound:
        hit = np.minimum(d, n_bins - d) <= 1
    else:
        hit = np.mod(np.abs(np.asarray(gp, dtype=np.int64)
                            - np.asarray(gq, dtype=np.int64)), n_bins) <= 1
    if np.isscalar(gp) and np.isscalar(gq):
        return bool(hit)
    return hit


def _check_compatible(dp: EdgeDescriptor, dq: EdgeDescriptor) -> None:
    if dp.window != dq.window:
        raise ValueError(
            f"descriptor windows differ: {dp.window} vs {dq.window}")
    if dp.n_bins != dq.n_bins:
        raise ValueError(
            f"descriptor direction bins differ: {dp.n_bins} vs {dq.n_bins}")


def similarity(dp: EdgeDescriptor, dq: EdgeDescriptor,
               wraparound: bool = True) -> float:
    """Direction-gated edge correlation, normalized by sqrt of dq's count.

    Returns 0 when dq carries no edge pixels (the formula would otherwise
    divide by zero). Written as sqrt(num^2 / count) so that a descriptor
    scored against itself lands exactly on sqrt(edge_count).
    """
    _check_compatible(dp, dq)
    if dq.edge_count == 0:
        return 0.0
    hits = same_grad(dp.directions, dq.directions, dp.n_bins, wraparound)
    num = int(np.count_nonzero((dp.edges != 0) & (dq.edges != 0) & hits))
    return math.sqrt(num * num / dq.edge_count)


class DescriptorStack:
    """Candidate descriptors flattened into arrays for batch scoring."""

    def __init__(self, descriptors: list[EdgeDescriptor]):
        if not descriptors:
            raise ValueError("descriptor list must be nonempty")
        window = descriptors[0].window
        n_bins = descriptors[0].n_bins
        for d in descriptors[1:]:
            _check_compatible(descriptors[0], d)
        self.window = window
        self.n_bins = n_bins
        self.edges = np.stack([d.edges.ravel() != 0 for d in descriptors])
        self.directions = np.stack(
            [d.directions.ravel() for d in descriptors]).astype(np.int16)
        self.counts = np.array([d.edge_count for d in descriptors], dtype=np.int64)
        self.positions = np.array([[d.x, d.y] for d in descriptors], dtype=np.float64)
        # direction-difference lookup: bin distance d -> predicate hit
        lut = np.zeros(n_bins, dtype=bool)
        for v in (0, 1, n_bins - 1):
            lut[v % n_bins] = True
        self.lut_direct = lut
        half = n_bins // 2
        self.lut_flipped = np.roll(lut, half)

    def scores(self, dp: EdgeDescriptor, candidate_rows: np.ndarray,
               polarity: str = "direct") -> np.ndarray:
        """Similarity of dp against the selected candidate rows."""
        if polarity not in ("direct", "flipped", "both"):
            raise ValueError(f"unknown polarity mode {polarity!r}")
        if dp.window != self.window:
            raise ValueError(
                f"descriptor windows differ: {dp.window} vs {self.window}")
        if dp.n_bins != self.n_bins:
            raise ValueError(
                f"descriptor direction bins differ: {dp.n_bins} vs {self.n_bins}")
        idx = np.flatnonzero(dp.edges.ravel())
        counts = self.counts[candidate_rows]
        if idx.size == 0 or candidate_rows.size == 0:
            return np.zeros(candidate_rows.size, dtype=np.float64)
        sub_e = self.edges[np.ix_(candidate_rows, idx)]
        diff = (dp.directions.ravel()[idx].astype(np.int16)[None, :]
                - self.directions[np.ix_(candidate_rows, idx)]) % self.n_bins
        nums = []
        if polarity in ("direct", "both"):
            nums.append((sub_e & self.lut_direct[diff]).sum(axis=1))
        if polarity in ("flipped", "both"):
            nums.append((sub_e & self.lut_flipped[diff]).sum(axis=1))
        num = np.maximum.reduce(nums).astype(np.float64)
        with np.errstate(divide="ignore", invalid="ignore"):
            s = np.sqrt(num * num / counts)
        return np.where(counts > 0, s, 0.0)


def best_match(dp: EdgeDescriptor, candidates: list[EdgeDescriptor],
               gate: tuple[AffineTransform, float] | None = None,
               polarity: str = "direct") -> tuple[int, float] | None:
    """Index and score of the most similar candidate, or None.

    An optional gate (transform, max_distance) admits only candidates whose
    position lies within max_distance of dp's transformed position. Returns
    None when every candidate is gated out or the best score is 0; ties go
    to the smallest candidate index.
    """
    stack = DescriptorStack(candidates)
    return _best_against_stack(dp, stack, gate, polarity)


def _best_against_stack(dp: EdgeDescriptor, stack: DescriptorStack,
                        gate: tuple[AffineTransform, float] | None,
                        polarity: str) -> tuple[int, float] | None:
    if gate is None:
        rows = np.arange(stack.counts.size)
    else:
        t, max_dist = gate
        projected = t.apply(np.array([dp.x, dp.y], dtype=np.float64))
        dist = np.hypot(stack.positions[:, 0] - projected[0],
                        stack.positions[:, 1] - projected[1])
        rows = np.flatnonzero(dist <= max_dist)
        if rows.size == 0:
            return None
    s = stack.scores(dp, rows, polarity)
    j = int(np.argmax(s))
    if s[j] <= 0.0:
        return None
    return int(rows[j]), float(s[j])
