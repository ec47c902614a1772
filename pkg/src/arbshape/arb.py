"""Angular Radial Bins shape descriptors.

A shape's outer contour points are binned on a polar grid centred on the
shape centroid: ``rings`` concentric circles out to the furthest contour point
and equal angular sectors measured clockwise from North (image y points
down). Overlapping descriptors stack several grids, each tilted by a further
``tilt_delta_deg``; accumulative descriptors sum those tilted grids.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from typing import NamedTuple

import numpy as np

from .errors import ConfigError, DegenerateShape
from .geometry import MomentSet, compute_moments, largest_component, trace_contour
from .imgio import BinaryImage

_EPS = 1e-9


class WeightMode(str, enum.Enum):
    COUNT = "count"
    TOTAL = "total"
    AVERAGE = "average"


class OrientationMode(str, enum.Enum):
    NONE = "none"
    MOMENTS = "moments"
    FOURIER = "fourier"
    FURTHEST = "furthest"


@dataclasses.dataclass(frozen=True)
class ArbConfig:
    rings: int = 2
    angular_width_deg: float = 15.0
    weight_mode: WeightMode = WeightMode.TOTAL
    tilt_delta_deg: float = 3.0
    instances: int = 5
    orientation_mode: OrientationMode = OrientationMode.NONE

    def __post_init__(self):
        object.__setattr__(self, "weight_mode", WeightMode(self.weight_mode))
        object.__setattr__(self, "orientation_mode", OrientationMode(self.orientation_mode))
        if int(self.rings) != self.rings or self.rings < 1:
            raise ConfigError(f"rings must be a positive integer, got {self.rings}")
        w = float(self.angular_width_deg)
        if not 0 < w <= 360:
            raise ConfigError(f"angular width must be in (0, 360], got {w}")
        bins = 360.0 / w
        if abs(bins - round(bins)) > _EPS:
            raise ConfigError(f"angular width {w} does not divide 360")
        if not self.tilt_delta_deg > 0:
            raise ConfigError("tilt delta must be positive")
        if int(self.instances) != self.instances or self.instances < 1:
            raise ConfigError("instances must be a positive integer")
        if self.instances * self.tilt_delta_deg > w + _EPS:
            raise ConfigError(
                f"instances={self.instances} exceeds width/delta="
                f"{w / self.tilt_delta_deg:g}; further instances repeat earlier ones"
            )

    @property
    def angular_bins(self) -> int:
        return int(round(360.0 / self.angular_width_deg))

    @property
    def shape(self):
        return (self.rings, self.angular_bins)

    def replace(self, **kw) -> "ArbConfig":
        return dataclasses.replace(self, **kw)


@dataclasses.dataclass(frozen=True)
class ArbDescriptor:
    values: np.ndarray  # (rings, angular_bins)
    config: ArbConfig

    def flat(self) -> np.ndarray:
        return self.values.ravel()


@dataclasses.dataclass(frozen=True)
class OverlappingArbDescriptor:
    values: np.ndarray  # (rings, angular_bins, instances)
    config: ArbConfig

    def flat(self) -> np.ndarray:
        return self.values.ravel()

    def slice(self, n: int) -> ArbDescriptor:
        return ArbDescriptor(self.values[:, :, n].copy(), self.config)


class PolarContour(NamedTuple):
    """Contour points relative to the centroid."""

    r: np.ndarray
    angle: np.ndarray  # degrees clockwise from North, [0, 360)
    rho: float
    moments: MomentSet
    points: np.ndarray


def north_angle(dx, dy):
    """Clockwise angle from North of offsets ``(dx, dy)`` in degrees, in [0, 360)."""
    a = np.degrees(np.arctan2(dx, -np.asarray(dy, dtype=np.float64)))
    return np.where(a < 0, a + 360.0, a)


def polar_contour(img: BinaryImage) -> PolarContour:
    comp = largest_component(img)
    m = compute_moments(comp)
    pts = trace_contour(comp).points
    dx, dy = m.centered(pts)
    r = np.hypot(dx, dy)
    rho = float(r.max())
    if rho == 0.0:
        raise DegenerateShape("all contour points coincide with the centroid")
    return PolarContour(r, north_angle(dx, dy), rho, m, pts)


def _bin_indices(pc: PolarContour, cfg: ArbConfig, start_angle_deg: float):
    rings, bins = cfg.shape
    edges = np.arange(rings) * pc.rho / rings
    ring = np.searchsorted(edges, pc.r, side="right") - 1
    np.minimum(ring, rings - 1, out=ring)

    w = float(cfg.angular_width_deg)
    rel = np.mod(pc.angle - start_angle_deg, 360.0)
    ang = (rel // w).astype(np.int64) % bins
    ang[pc.r == 0.0] = 0
    return ring * bins + ang


def _weigh(idx, pc: PolarContour, cfg: ArbConfig) -> np.ndarray:
    size = cfg.rings * cfg.angular_bins
    m00 = pc.moments.m00
    if cfg.weight_mode is WeightMode.COUNT:
        vals = np.bincount(idx, minlength=size) / m00
    elif cfg.weight_mode is WeightMode.TOTAL:
        vals = np.bincount(idx, weights=pc.r, minlength=size) / m00
    else:
        total = np.bincount(idx, weights=pc.r, minlength=size)
        count = np.bincount(idx, minlength=size)
        vals = np.divide(total, count, out=np.zeros(size), where=count > 0)
    return vals.reshape(cfg.shape)


def arb_from_polar(pc: PolarContour, cfg: ArbConfig, start_angle_deg: float = 0.0) -> np.ndarray:
    return _weigh(_bin_indices(pc, cfg, start_angle_deg), pc, cfg)


def overlapping_from_polar(pc: PolarContour, cfg: ArbConfig, start_angle_deg: float = 0.0) -> np.ndarray:
    return np.stack(
        [arb_from_polar(pc, cfg, start_angle_deg + n * cfg.tilt_delta_deg) for n in range(cfg.instances)],
        axis=2,
    )


def compute_simple_arb(img: BinaryImage, cfg: ArbConfig, start_angle_deg: float = 0.0) -> ArbDescriptor:
    return ArbDescriptor(arb_from_polar(polar_contour(img), cfg, start_angle_deg), cfg)


def compute_overlapping_arb(img: BinaryImage, cfg: ArbConfig, start_angle_deg: float = 0.0) -> OverlappingArbDescriptor:
    """Stack of simple descriptors, instance ``n`` tilted clockwise by ``n * delta``."""
    return OverlappingArbDescriptor(overlapping_from_polar(polar_contour(img), cfg, start_angle_deg), cfg)


def compute_accumulative_arb(img: BinaryImage, cfg: ArbConfig, start_angle_deg: float = 0.0) -> ArbDescriptor:
    ov = overlapping_from_polar(polar_contour(img), cfg, start_angle_deg)
    return ArbDescriptor(ov.sum(axis=2), cfg)


class StartAngle(NamedTuple):
    degrees: float
    isotropic: bool = False


def _orient_polar(pc: PolarContour, mode: OrientationMode) -> StartAngle:
    mode = OrientationMode(mode)
    if mode is OrientationMode.MOMENTS:
        if pc.moments.isotropic:
            return StartAngle(0.0, True)
        # theta is measured from the x axis towards +y (down); East is 90 from North
        return StartAngle((90.0 + math.degrees(pc.moments.theta)) % 360.0)
    if mode is OrientationMode.FURTHEST:
        i = int(np.argmax(pc.r))
        return StartAngle(float(pc.angle[i]))
    raise ConfigError(f"orientation mode {mode.value!r} has no start angle")


def orient_start_angle(img: BinaryImage, mode) -> StartAngle:
    """Start angle (degrees clockwise from North) that aligns bin 0 with the shape.

    Raises :class:`DegenerateShape` for single-pixel shapes. For a moments
    orientation of an isotropic shape the angle is undefined; 0 is returned
    with ``isotropic`` set.
    """
    return _orient_polar(polar_contour(img), mode)


def fourier_magnitude_descriptor(d) -> np.ndarray:
    """``|F(u, v)|`` of the 2-D DFT over (ring, angle), normalised by 1/(MN).

    Overlapping descriptors are transformed per instance slice.
    """
    values = d.values if hasattr(d, "values") else np.asarray(d, dtype=np.float64)
    m, n = values.shape[:2]
    return np.abs(np.fft.fft2(values, axes=(0, 1))) / (m * n)


def describe_arb(img: BinaryImage, cfg: ArbConfig, variant: str = "accum") -> np.ndarray:
    """Full descriptor pipeline honouring ``cfg.orientation_mode``.

    ``variant`` is one of ``simple``, ``overlap`` or ``accum``. Returns the
    descriptor array ((rings, bins) or (rings, bins, instances)).
    """
    pc = polar_contour(img)
    mode = cfg.orientation_mode
    start = 0.0
    if mode in (OrientationMode.MOMENTS, OrientationMode.FURTHEST):
        start = _orient_polar(pc, mode).degrees
    if variant == "simple":
        values = arb_from_polar(pc, cfg, start)
    elif variant == "overlap":
        values = overlapping_from_polar(pc, cfg, start)
    elif variant == "accum":
        values = overlapping_from_polar(pc, cfg, start).sum(axis=2)
    else:
        raise ConfigError(f"unknown ARB variant {variant!r}")
    if mode is OrientationMode.FOURIER:
        values = fourier_magnitude_descriptor(values)
    return values


# ---------------------------------------------------------------------------
# Text serialisation

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def format_arb(values: np.ndarray, cfg: ArbConfig, method: str = "") -> str:
    header = (
        f"ARB v1 rings={cfg.rings} width={cfg.angular_width_deg:g} mode={cfg.weight_mode.value} "
        f"delta={cfg.tilt_delta_deg:g} instances={cfg.instances} orient={cfg.orientation_mode.value}"
    )
    if method:
        header += f" method={method}"
    rows = values.reshape(values.shape[0], -1)
    lines = [header] + [" ".join(_fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def parse_header(line: str, tag: str) -> dict:
    parts = line.split()
    if parts[:2] != [tag, "v1"]:
        raise ConfigError(f"expected a '{tag} v1' header, got {line!r}")
    fields = {}
    for p in parts[2:]:
        key, sep, val = p.partition("=")
        if not sep:
            raise ConfigError(f"malformed header field {p!r}")
        fields[key] = val
    return fields


def parse_arb(text: str):
    """Inverse of :func:`format_arb`; returns ``(values, config, method)``."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    f = parse_header(lines[0], "ARB")
    cfg = ArbConfig(
        rings=int(f["rings"]),
        angular_width_deg=float(f["width"]),
        weight_mode=f["mode"],
        tilt_delta_deg=float(f["delta"]),
        instances=int(f["instances"]),
        orientation_mode=f["orient"],
    )
    rows = np.array([[float(v) for v in ln.split()] for ln in lines[1:]], dtype=np.float64)
    if rows.shape[0] != cfg.rings:
        raise ConfigError(f"expected {cfg.rings} rows, got {rows.shape[0]}")
    if rows.shape[1] == cfg.angular_bins:
        values = rows
    elif rows.shape[1] == cfg.angular_bins * cfg.instances:
        values = rows.reshape(cfg.rings, cfg.angular_bins, cfg.instances)
    else:
        raise ConfigError(f"row length {rows.shape[1]} does not match the header")
    return values, cfg, f.get("method", "")
