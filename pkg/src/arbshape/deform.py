"""Graded query deformations: translation, rotation, scaling, perspective,
erosion and dilation."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, OutOfFrame, VanishedShape
from .geometry import compute_moments
from .imgio import BinaryImage

ROTATION_STEP_DEG = 1.5
SCALE_STEP = 0.01
PERSPECTIVE_STEP_DEG = 5.0


class Kind(str, enum.Enum):
    TRANSLATION = "translation"
    ROTATION = "rotation"
    SCALING = "scaling"
    PERSPECTIVE = "perspective"
    EROSION = "erosion"
    DILATION = "dilation"


VARIANTS = {
    Kind.TRANSLATION: ("up", "down", "left", "right"),
    Kind.ROTATION: ("left", "right"),
    Kind.SCALING: ("up", "down"),
    Kind.PERSPECTIVE: ("",),
    Kind.EROSION: ("",),
    Kind.DILATION: ("",),
}


@dataclass(frozen=True)
class DeformationSpec:
    kind: Kind
    level: int
    variant: str = ""

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if int(self.level) != self.level or self.level < 1:
            raise ConfigError(f"deformation level must be >= 1, got {self.level}")
        if self.variant not in VARIANTS[self.kind]:
            raise ConfigError(f"variant {self.variant!r} is not valid for {self.kind.value}")

    def __str__(self):
        tag = f"{self.kind.value}-{self.level}"
        return f"{tag}-{self.variant}" if self.variant else tag


def level_suite(kind, max_level: int):
    """All specs for ``kind`` at levels 1..max_level, level-major order."""
    kind = Kind(kind)
    if max_level < 1:
        raise ConfigError("max_level must be >= 1")
    return [DeformationSpec(kind, lvl, v) for lvl in range(1, max_level + 1) for v in VARIANTS[kind]]


# ---------------------------------------------------------------------------

_SHIFTS = {"up": (0, -1), "down": (0, 1), "left": (-1, 0), "right": (1, 0)}


def translate(mask: np.ndarray, dx: int, dy: int) -> np.ndarray:
    h, w = mask.shape
    ys, xs = np.nonzero(mask)
    if xs.size and (xs.min() + dx < 0 or xs.max() + dx >= w or ys.min() + dy < 0 or ys.max() + dy >= h):
        raise OutOfFrame(f"translation by ({dx}, {dy}) pushes the shape off the grid")
    out = np.zeros_like(mask)
    out[ys + dy, xs + dx] = True
    return out


def erode(mask: np.ndarray) -> np.ndarray:
    """One 3x3 square erosion; outside the frame counts as background."""
    h, w = mask.shape
    pad = np.zeros((h + 2, w + 2), dtype=bool)
    pad[1:-1, 1:-1] = mask
    out = mask.copy()
    for dy in range(3):
        for dx in range(3):
            out &= pad[dy:dy + h, dx:dx + w]
    return out


def dilate(mask: np.ndarray) -> np.ndarray:
    h, w = mask.shape
    if mask[0].any() or mask[-1].any() or mask[:, 0].any() or mask[:, -1].any():
        raise OutOfFrame("dilation would grow the shape past the image border")
    pad = np.zeros((h + 2, w + 2), dtype=bool)
    pad[1:-1, 1:-1] = mask
    out = np.zeros_like(mask)
    for dy in range(3):
        for dx in range(3):
            out |= pad[dy:dy + h, dx:dx + w]
    return out


def _warp(mask: np.ndarray, inverse: np.ndarray, forward: np.ndarray) -> np.ndarray:
    """Nearest-neighbour warp given 3x3 homographies in pixel coordinates."""
    h, w = mask.shape
    ys, xs = np.nonzero(mask)
    src = np.stack([xs, ys, np.ones_like(xs)]).astype(np.float64)
    fx, fy, fw = forward @ src
    with np.errstate(divide="ignore", invalid="ignore"):
        fx, fy = fx / fw, fy / fw
    if (fw <= 0).any() or fx.min() < -0.5 or fy.min() < -0.5 or fx.max() >= w - 0.5 or fy.max() >= h - 0.5:
        raise OutOfFrame("warped shape leaves the image")

    gy, gx = np.mgrid[0:h, 0:w]
    dst = np.stack([gx.ravel(), gy.ravel(), np.ones(h * w)]).astype(np.float64)
    sx, sy, sw = inverse @ dst
    with np.errstate(divide="ignore", invalid="ignore"):
        sx = np.floor(sx / sw + 0.5)
        sy = np.floor(sy / sw + 0.5)
    ok = (sw > 0) & (sx >= 0) & (sx < w) & (sy >= 0) & (sy < h)
    out = np.zeros(h * w, dtype=bool)
    out[ok] = mask[sy[ok].astype(np.int64), sx[ok].astype(np.int64)]
    return out.reshape(h, w)


def _about(cx: float, cy: float, linear: np.ndarray) -> np.ndarray:
    t = np.array([[1, 0, cx], [0, 1, cy], [0, 0, 1]], dtype=np.float64)
    ti = np.array([[1, 0, -cx], [0, 1, -cy], [0, 0, 1]], dtype=np.float64)
    return t @ linear @ ti


def rotation_matrix(deg: float) -> np.ndarray:
    """Positive angles turn clockwise on screen (y down)."""
    a = math.radians(deg)
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]], dtype=np.float64)


def rotate(mask: np.ndarray, deg: float, center) -> np.ndarray:
    fwd = _about(*center, rotation_matrix(deg))
    return _warp(mask, np.linalg.inv(fwd), fwd)


def scale(mask: np.ndarray, factor: float, center) -> np.ndarray:
    fwd = _about(*center, np.diag([factor, factor, 1.0]))
    return _warp(mask, np.linalg.inv(fwd), fwd)


def perspective_homography(width: int, height: int, deg: float) -> np.ndarray:
    """Image plane turned about its vertical centre line, pinhole with f = width."""
    f = float(width)
    a = math.radians(deg)
    cx, cy = (width - 1) / 2.0, (height - 1) / 2.0
    # (u, v) on the plane at depth f -> (f u cos a, f v, f + u sin a) homogeneous
    core = np.array([[f * math.cos(a), 0, 0], [0, f, 0], [math.sin(a), 0, f]], dtype=np.float64)
    return _about(cx, cy, core)


def perspective(mask: np.ndarray, deg: float) -> np.ndarray:
    h, w = mask.shape
    fwd = perspective_homography(w, h, deg)
    return _warp(mask, np.linalg.inv(fwd), fwd)


def apply(img: BinaryImage, spec: DeformationSpec) -> BinaryImage:
    mask = img.pixels
    if not mask.any():
        raise VanishedShape("nothing to deform")
    kind, level = spec.kind, spec.level
    if kind is Kind.TRANSLATION:
        sx, sy = _SHIFTS[spec.variant]
        out = translate(mask, sx * level, sy * level)
    elif kind is Kind.ROTATION:
        m = compute_moments(img)
        sign = 1.0 if spec.variant == "right" else -1.0
        out = rotate(mask, sign * level * ROTATION_STEP_DEG, (m.cx, m.cy))
    elif kind is Kind.SCALING:
        m = compute_moments(img)
        sign = 1.0 if spec.variant == "up" else -1.0
        out = scale(mask, 1.0 + sign * level * SCALE_STEP, (m.cx, m.cy))
    elif kind is Kind.PERSPECTIVE:
        out = perspective(mask, level * PERSPECTIVE_STEP_DEG)
    elif kind is Kind.EROSION:
        out = mask
        for _ in range(level):
            out = erode(out)
    else:
        out = mask
        for _ in range(level):
            out = dilate(out)
    if not out.any():
        raise VanishedShape(f"{spec} removed every foreground pixel")
    return BinaryImage(out)
