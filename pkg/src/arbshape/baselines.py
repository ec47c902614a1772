"""Comparison descriptors: contour Fourier descriptors and Hausdorff distance."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DegenerateShape, LengthMismatch

RESAMPLE_POINTS = 128
DEFAULT_K = 32


class SignatureKind(str, enum.Enum):
    COMPLEX = "cc"
    CENTROID_DISTANCE = "cd"


@dataclass(frozen=True)
class FourierDescriptor:
    magnitudes: np.ndarray
    signature_kind: SignatureKind


def _points(c) -> np.ndarray:
    pts = np.asarray(getattr(c, "points", c), dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ConfigError(f"expected an (n, 2) point array, got shape {pts.shape}")
    return pts


def resample_contour(c, n: int = RESAMPLE_POINTS) -> np.ndarray:
    """``n`` points at equal arc-length spacing along the closed contour polyline."""
    pts = _points(c)
    if len(pts) == 0 or n < 1:
        raise ConfigError("need a non-empty contour and n >= 1")
    closed = np.vstack([pts, pts[:1]])
    seg = np.hypot(*np.diff(closed, axis=0).T)
    arc = np.concatenate([[0.0], np.cumsum(seg)])
    perimeter = arc[-1]
    if perimeter == 0.0:
        return np.repeat(pts[:1], n, axis=0)
    targets = np.arange(n) * (perimeter / n)
    # segment k holds targets in [arc[k], arc[k+1])
    k = np.searchsorted(arc, targets, side="right") - 1
    k = np.clip(k, 0, len(seg) - 1)
    with np.errstate(invalid="ignore", divide="ignore"):
        t = np.where(seg[k] > 0, (targets - arc[k]) / seg[k], 0.0)
    return closed[k] + t[:, None] * (closed[k + 1] - closed[k])


def spectrum(signal) -> np.ndarray:
    """``a(u) = 1/N sum_t s(t) exp(-2 pi i u t / N)``."""
    s = np.asarray(signal)
    return np.fft.fft(s) / len(s)


def _low_frequencies(n: int, k: int) -> np.ndarray:
    # 1, -1, 2, -2, ... as indices into an n-point spectrum
    order = []
    u = 1
    while len(order) < k:
        order.append(u % n)
        if len(order) < k:
            order.append(-u % n)
        u += 1
    return np.array(order)


def fd_complex_coordinates(c, k: int = DEFAULT_K, n: int = RESAMPLE_POINTS) -> FourierDescriptor:
    """Complex-coordinate Fourier descriptor.

    The contour is resampled, mapped to ``x + iy`` and centred; spectrum
    magnitudes are divided by ``|a(1)|`` and the ``k`` lowest frequencies
    (alternating positive and negative, u=0 excluded) are kept.
    """
    if len(_points(c)) < 3:
        raise DegenerateShape("complex-coordinate descriptor needs at least 3 contour points")
    if not 1 <= k <= n - 1:
        raise ConfigError(f"k must be within 1..{n - 1}")
    pts = resample_contour(c, n)
    z = pts[:, 0] + 1j * pts[:, 1]
    mag = np.abs(spectrum(z - z.mean()))
    if mag[1] == 0.0:
        raise DegenerateShape("first harmonic vanishes")
    return FourierDescriptor(mag[_low_frequencies(n, k)] / mag[1], SignatureKind.COMPLEX)


def fd_centroid_distance(c, centroid, k: int = DEFAULT_K, n: int = RESAMPLE_POINTS) -> FourierDescriptor:
    """Centroid-distance Fourier descriptor, ``|a(1..k)| / |a(0)|``."""
    if len(_points(c)) < 3:
        raise DegenerateShape("centroid-distance descriptor needs at least 3 contour points")
    if not 1 <= k <= n // 2:
        raise ConfigError(f"k must be within 1..{n // 2}")
    pts = resample_contour(c, n)
    r = np.hypot(pts[:, 0] - centroid[0], pts[:, 1] - centroid[1])
    mag = np.abs(spectrum(r))
    if mag[0] == 0.0:
        raise DegenerateShape("mean centroid distance is zero")
    return FourierDescriptor(mag[1:k + 1] / mag[0], SignatureKind.CENTROID_DISTANCE)


def directed_hausdorff(a, b, chunk: int = 4096) -> float:
    """``max_{p in a} min_{q in b} |p - q|``."""
    a = np.asarray(a, dtype=np.float64).reshape(-1, 2)
    b = np.asarray(b, dtype=np.float64).reshape(-1, 2)
    if len(a) == 0 or len(b) == 0:
        raise ConfigError("point sets must be non-empty")
    worst = 0.0
    for i in range(0, len(a), chunk):
        blk = a[i:i + chunk]
        dx = blk[:, None, 0] - b[None, :, 0]
        dy = blk[:, None, 1] - b[None, :, 1]
        d2 = dx * dx + dy * dy
        worst = max(worst, float(d2.min(axis=1).max()))
    # sqrt is monotone, so taking it last returns exactly max-min of the distances
    return float(np.sqrt(worst))


def hausdorff(a, b) -> float:
    return max(directed_hausdorff(a, b), directed_hausdorff(b, a))


# ---------------------------------------------------------------------------

def format_fd(fd: FourierDescriptor, n: int = RESAMPLE_POINTS) -> str:
    vals = " ".join(format(float(v), ".17g") for v in fd.magnitudes)
    return f"FD v1 kind={fd.signature_kind.value} k={len(fd.magnitudes)} n={n}\n{vals}\n"


def parse_fd(text: str) -> FourierDescriptor:
    from .arb import parse_header

    lines = [ln for ln in text.splitlines() if ln.strip()]
    f = parse_header(lines[0], "FD")
    mags = np.array([float(v) for v in " ".join(lines[1:]).split()], dtype=np.float64)
    if len(mags) != int(f["k"]):
        raise LengthMismatch(f"header announces k={f['k']} but {len(mags)} values follow")
    return FourierDescriptor(mags, SignatureKind(f["kind"]))
