"""Binary silhouette images: loading, resizing, writing and synthesis."""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

from .errors import ConfigError, ImageFormatError

log = logging.getLogger(__name__)

DEFAULT_THRESHOLD = 127
IMAGE_SUFFIXES = (".pgm", ".pbm", ".png")
EIGHT = np.ones((3, 3), dtype=bool)


class BinaryImage:
    """Immutable foreground/background grid, ``pixels[y, x]`` with y pointing down."""

    __slots__ = ("pixels",)

    def __init__(self, pixels):
        arr = np.array(pixels, dtype=bool, copy=True)
        if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
            raise ConfigError(f"image must be a non-empty 2-D grid, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)

    def __setattr__(self, name, value):
        raise AttributeError("BinaryImage is immutable")

    def __reduce__(self):
        return (BinaryImage, (self.pixels,))

    @classmethod
    def from_flat(cls, width: int, height: int, flat) -> "BinaryImage":
        flat = np.asarray(flat, dtype=bool).ravel()
        if width <= 0 or height <= 0:
            raise ConfigError("width and height must be positive")
        if flat.size != width * height:
            raise ConfigError(f"expected {width * height} pixels, got {flat.size}")
        return cls(flat.reshape(height, width))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def flat(self) -> np.ndarray:
        return self.pixels.ravel()

    def count(self) -> int:
        return int(np.count_nonzero(self.pixels))

    def __eq__(self, other):
        if not isinstance(other, BinaryImage):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and bool(np.array_equal(self.pixels, other.pixels))

    def __hash__(self):
        return hash((self.pixels.shape, self.pixels.tobytes()))

    def __repr__(self):
        return f"BinaryImage({self.width}x{self.height}, foreground={self.count()})"


@dataclass(frozen=True)
class Dataset:
    entries: tuple

    def __post_init__(self):
        ids = [i for i, _ in self.entries]
        if len(set(ids)) != len(ids):
            raise ConfigError("dataset ids must be unique")
        object.__setattr__(self, "entries", tuple(sorted(self.entries, key=lambda e: e[0])))

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def ids(self):
        return [i for i, _ in self.entries]

    def image(self, ident: str) -> BinaryImage:
        for i, img in self.entries:
            if i == ident:
                return img
        raise KeyError(ident)


# ---------------------------------------------------------------------------
# Reading and writing

def _pnm_tokens(data: bytes, count: int, path):
    """Parse ``count`` whitespace separated header tokens, honouring comments."""
    tokens = []
    pos = 2
    n = len(data)
    while len(tokens) < count:
        while pos < n and data[pos:pos + 1].isspace():
            pos += 1
        if pos < n and data[pos:pos + 1] == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise ImageFormatError(f"{path}: truncated PNM header")
        try:
            tokens.append(int(data[start:pos]))
        except ValueError:
            raise ImageFormatError(f"{path}: malformed PNM header") from None
    # exactly one whitespace byte separates the header from the raster
    return tokens, pos + 1


def _read_pnm(data: bytes, path) -> np.ndarray:
    magic = data[:2]
    if magic == b"P5":
        (w, h, maxval), off = _pnm_tokens(data, 3, path)
        if not 0 < maxval <= 255:
            raise ImageFormatError(f"{path}: unsupported PGM maxval {maxval}")
        if w <= 0 or h <= 0:
            raise ImageFormatError(f"{path}: zero-dimension image")
        raster = np.frombuffer(data, dtype=np.uint8, count=w * h, offset=off) if len(data) >= off + w * h else None
        if raster is None:
            raise ImageFormatError(f"{path}: truncated PGM raster")
        gray = raster.reshape(h, w).astype(np.uint16)
        if maxval != 255:
            gray = gray * 255 // maxval
        return gray.astype(np.uint8)
    if magic == b"P4":
        (w, h), off = _pnm_tokens(data, 2, path)
        if w <= 0 or h <= 0:
            raise ImageFormatError(f"{path}: zero-dimension image")
        stride = (w + 7) // 8
        if len(data) < off + stride * h:
            raise ImageFormatError(f"{path}: truncated PBM raster")
        packed = np.frombuffer(data, dtype=np.uint8, count=stride * h, offset=off).reshape(h, stride)
        bits = np.unpackbits(packed, axis=1)[:, :w]
        # PBM: 1 is ink (black)
        return np.where(bits == 1, 0, 255).astype(np.uint8)
    raise ImageFormatError(f"{path}: unsupported PNM variant {magic!r}")


def _read_png(path) -> np.ndarray:
    from PIL import Image

    try:
        with Image.open(path) as im:
            im.load()
            # ITU-R 601-2 luma for colour inputs
            gray = np.asarray(im.convert("L"), dtype=np.uint8)
    except OSError as exc:
        raise ImageFormatError(f"{path}: {exc}") from None
    if gray.size == 0:
        raise ImageFormatError(f"{path}: zero-dimension image")
    return gray


def read_gray(path) -> np.ndarray:
    """Return the 8-bit gray raster of a PGM/PBM/PNG file."""
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise ImageFormatError(f"{path}: cannot read ({exc.strerror})") from None
    if data[:2] in (b"P4", b"P5"):
        return _read_pnm(data, path)
    if data[:8] == b"\x89PNG\r\n\x1a\n":
        return _read_png(path)
    raise ImageFormatError(f"{path}: unsupported image format")


def load_image(path, threshold: int = DEFAULT_THRESHOLD) -> BinaryImage:
    """Load an image and binarize it: foreground iff gray (or luma) > threshold."""
    if not 0 <= threshold <= 255:
        raise ConfigError(f"threshold must be within 0..255, got {threshold}")
    gray = read_gray(path)
    if gray.shape[0] == 0 or gray.shape[1] == 0:
        raise ImageFormatError(f"{path}: zero-dimension image")
    return BinaryImage(gray > threshold)


def write_pgm(img: BinaryImage, path) -> None:
    """Write as binary PGM (P5): foreground 255, background 0."""
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    raster = np.where(img.pixels, 255, 0).astype(np.uint8).tobytes()
    Path(path).write_bytes(header + raster)


def resize_to(img: BinaryImage, w: int, h: int) -> BinaryImage:
    """Nearest-neighbour resample; output pixel centres map back onto source pixels."""
    if w <= 0 or h <= 0:
        raise ConfigError("target size must be positive")
    if (w, h) == (img.width, img.height):
        return img
    # floor((i + 0.5) * src / dst) in integer arithmetic
    xs = ((2 * np.arange(w) + 1) * img.width) // (2 * w)
    ys = ((2 * np.arange(h) + 1) * img.height) // (2 * h)
    return BinaryImage(img.pixels[np.ix_(ys, xs)])


def load_dataset(directory, threshold: int = DEFAULT_THRESHOLD, w: int = 120, h: int = 120) -> Dataset:
    directory = Path(directory)
    if not directory.is_dir():
        raise ImageFormatError(f"{directory}: not a directory")
    files = sorted(p for p in directory.iterdir() if p.is_file() and not p.name.startswith("."))
    if not files:
        raise ImageFormatError(f"{directory}: no images found")
    entries = []
    for p in files:
        try:
            img = load_image(p, threshold)
        except ImageFormatError as exc:
            raise ImageFormatError(f"failed to load {p.name}: {exc}") from None
        entries.append((p.stem, resize_to(img, w, h)))
    log.info("loaded %d images from %s", len(entries), directory)
    return Dataset(tuple(entries))


def write_dataset(dataset: Dataset, directory) -> None:
    os.makedirs(directory, exist_ok=True)
    for ident, img in dataset:
        write_pgm(img, Path(directory) / f"{ident}.pgm")


# ---------------------------------------------------------------------------
# Synthetic articulated silhouettes

def _capsule(xx, yy, x0, y0, x1, y1, radius):
    dx, dy = x1 - x0, y1 - y0
    t = ((xx - x0) * dx + (yy - y0) * dy) / (dx * dx + dy * dy)
    t = np.clip(t, 0.0, 1.0)
    return (xx - x0 - t * dx) ** 2 + (yy - y0 - t * dy) ** 2 <= radius * radius


def _random_hand(rng: np.random.Generator, w: int, h: int) -> np.ndarray:
    size = min(w, h)
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    cx = w / 2 + rng.uniform(-0.05, 0.05) * size
    cy = h / 2 + rng.uniform(-0.05, 0.05) * size

    # convex core: rotated ellipse
    a = rng.uniform(0.11, 0.19) * size
    b = rng.uniform(0.09, 0.15) * size
    phi = rng.uniform(0, np.pi)
    u = (xx - cx) * np.cos(phi) + (yy - cy) * np.sin(phi)
    v = -(xx - cx) * np.sin(phi) + (yy - cy) * np.cos(phi)
    mask = (u / a) ** 2 + (v / b) ** 2 <= 1.0

    n_fingers = int(rng.integers(2, 7))
    heading = rng.uniform(0, 2 * np.pi)
    spread = rng.uniform(0.5, 1.6) * np.pi
    angles = heading + np.sort(rng.uniform(-spread / 2, spread / 2, n_fingers))
    for ang in angles:
        length = rng.uniform(0.22, 0.42) * size
        radius = rng.uniform(0.025, 0.05) * size
        x1 = cx + length * np.sin(ang)
        y1 = cy - length * np.cos(ang)
        if rng.random() < 0.35:
            # bent finger: second phalanx at an angle
            bend = rng.uniform(-0.9, 0.9)
            mid = rng.uniform(0.5, 0.75)
            xm = cx + mid * length * np.sin(ang)
            ym = cy - mid * length * np.cos(ang)
            rest = (1 - mid) * length
            x1 = xm + rest * np.sin(ang + bend)
            y1 = ym - rest * np.cos(ang + bend)
            mask |= _capsule(xx, yy, cx, cy, xm, ym, radius)
            mask |= _capsule(xx, yy, xm, ym, x1, y1, radius)
        else:
            mask |= _capsule(xx, yy, cx, cy, x1, y1, radius)
    return mask


def _fits(mask: np.ndarray, margin: int) -> bool:
    if mask[:margin].any() or mask[-margin:].any() or mask[:, :margin].any() or mask[:, -margin:].any():
        return False
    _, n = ndimage.label(mask, structure=EIGHT)
    return n == 1


def generate_synthetic_dataset(n: int, w: int = 120, h: int = 120, seed: int = 0, margin: int = 4) -> Dataset:
    """Deterministic set of ``n`` distinct hand-like silhouettes.

    Each shape is an elliptical palm with 2 to 6 capsule fingers (some bent),
    forms a single 8-connected component and keeps ``margin`` background
    pixels to every image edge.
    """
    if n < 1:
        raise ConfigError("n must be >= 1")
    if min(w, h) < 16:
        raise ConfigError("synthetic shapes need at least 16x16 pixels")
    rng = np.random.default_rng(seed)
    seen = set()
    entries = []
    width = len(str(n - 1))
    while len(entries) < n:
        mask = _random_hand(rng, w, h)
        if not _fits(mask, margin):
            continue
        key = mask.tobytes()
        if key in seen:
            continue
        seen.add(key)
        entries.append((f"g{len(entries):0{width}d}", BinaryImage(mask)))
    return Dataset(tuple(entries))
