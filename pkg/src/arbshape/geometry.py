"""Raw/central image moments, orientation and outer border following.

Coordinates are ``(x, y)`` with x the column and y the row, y pointing down.
Moments are accumulated in exact integer arithmetic; central quantities are
derived from integer numerators so that they are bit-identical under integer
translations of the shape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import EmptyShape
from .imgio import EIGHT, BinaryImage

# Clockwise neighbour ring on screen (y down), starting East.
_RING = ((1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1))
_RING_INDEX = {d: k for k, d in enumerate(_RING)}
_WEST = _RING_INDEX[(-1, 0)]


@dataclass(frozen=True)
class MomentSet:
    m00: int
    m10: int
    m01: int
    m11: int
    m20: int
    m02: int
    cx: float
    cy: float
    mu20p: float
    mu11p: float
    mu02p: float
    theta: float

    # integer numerators: mu'_pq * m00**2
    @property
    def n20(self) -> int:
        return self.m20 * self.m00 - self.m10 * self.m10

    @property
    def n11(self) -> int:
        return self.m11 * self.m00 - self.m10 * self.m01

    @property
    def n02(self) -> int:
        return self.m02 * self.m00 - self.m01 * self.m01

    @property
    def isotropic(self) -> bool:
        return self.n20 == self.n02 and self.n11 == 0

    def centered(self, points: np.ndarray):
        """Offsets of integer points from the centroid, exact up to one division."""
        pts = np.asarray(points, dtype=np.int64)
        dx = (pts[:, 0] * self.m00 - self.m10) / self.m00
        dy = (pts[:, 1] * self.m00 - self.m01) / self.m00
        return dx, dy


@dataclass(frozen=True)
class Contour:
    points: np.ndarray  # (n, 2) int64, columns x, y

    def __len__(self):
        return len(self.points)


def compute_moments(img: BinaryImage) -> MomentSet:
    ys, xs = np.nonzero(img.pixels)
    if xs.size == 0:
        raise EmptyShape("image has no foreground pixels")
    xs = xs.astype(np.int64)
    ys = ys.astype(np.int64)
    m00 = int(xs.size)
    m10 = int(xs.sum())
    m01 = int(ys.sum())
    m11 = int((xs * ys).sum())
    m20 = int((xs * xs).sum())
    m02 = int((ys * ys).sum())
    n20 = m20 * m00 - m10 * m10
    n11 = m11 * m00 - m10 * m01
    n02 = m02 * m00 - m01 * m01
    sq = m00 * m00
    theta = 0.5 * math.atan2(2 * n11, n20 - n02)
    if theta <= -math.pi / 2:
        theta += math.pi
    return MomentSet(
        m00=m00, m10=m10, m01=m01, m11=m11, m20=m20, m02=m02,
        cx=m10 / m00, cy=m01 / m00,
        mu20p=n20 / sq, mu11p=n11 / sq, mu02p=n02 / sq,
        theta=theta,
    )


def largest_component(img: BinaryImage) -> BinaryImage:
    """The 8-connected foreground component with most pixels (ties: first in raster order)."""
    labels, n = ndimage.label(img.pixels, structure=EIGHT)
    if n == 0:
        raise EmptyShape("image has no foreground pixels")
    if n == 1:
        return img
    sizes = np.bincount(labels.ravel())
    sizes[0] = 0
    return BinaryImage(labels == int(np.argmax(sizes)))


def _trace(mask: np.ndarray) -> np.ndarray:
    """Outer border of the single component in ``mask``, clockwise on screen.

    Suzuki's outer-border step mirrored so the traversal runs clockwise: the
    start is the first pixel in raster order, whose West neighbour is
    background.
    """
    h, w = mask.shape
    stride = w + 2
    pad = np.zeros((h + 2, stride), dtype=np.uint8)
    pad[1:-1, 1:-1] = mask
    grid = pad.ravel().tolist()
    offsets = [dy * stride + dx for dx, dy in _RING]

    first = int(np.flatnonzero(pad.ravel())[0])
    # counter-clockwise from West to find the pixel preceding the start
    prev = -1
    for step in range(8):
        k = (_WEST - step) % 8
        q = first + offsets[k]
        if grid[q]:
            prev = q
            break
    if prev < 0:
        y, x = divmod(first, stride)
        return np.array([[x - 1, y - 1]], dtype=np.int64)

    last = prev
    out = [first]
    cur = first
    delta_to_k = {o: k for k, o in enumerate(offsets)}
    while True:
        k0 = delta_to_k[prev - cur]
        nxt = -1
        for step in range(1, 9):
            q = cur + offsets[(k0 + step) % 8]
            if grid[q]:
                nxt = q
                break
        if nxt == first and cur == last:
            break
        out.append(nxt)
        prev, cur = cur, nxt
    flat = np.array(out, dtype=np.int64)
    ys, xs = np.divmod(flat, stride)
    return np.stack([xs - 1, ys - 1], axis=1)


def trace_contour(img: BinaryImage) -> Contour:
    """Outer 8-connected border of the largest foreground component."""
    comp = largest_component(img)
    return Contour(_trace(comp.pixels))


def furthest_contour_point(contour: Contour, cx: float, cy: float):
    """Return ``((x, y), rho)`` for the contour point furthest from ``(cx, cy)``.

    Ties resolve to the smallest contour index.
    """
    pts = np.asarray(contour.points, dtype=np.float64)
    if len(pts) == 0:
        raise EmptyShape("empty contour")
    d = np.hypot(pts[:, 0] - cx, pts[:, 1] - cy)
    i = int(np.argmax(d))
    x, y = contour.points[i]
    return (int(x), int(y)), float(d[i])
