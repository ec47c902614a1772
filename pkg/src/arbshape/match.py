"""Descriptor distances and exact nearest-neighbour retrieval."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError, IndexMismatch, LengthMismatch

MANIFEST = "manifest.json"


def l2_distance(a, b) -> float:
    """Euclidean norm of ``a - b``."""
    if len(a) != len(b):
        raise LengthMismatch(f"descriptor lengths differ: {len(a)} != {len(b)}")
    return math.dist(a, b)


def as_vector(values) -> tuple:
    """Row-major flatten to a tuple of Python floats (fast for ``math.dist``)."""
    if hasattr(values, "ravel"):
        return tuple(values.ravel().tolist())
    return tuple(float(v) for v in values)


@dataclass(frozen=True)
class DescriptorIndex:
    method: str
    entries: tuple  # ((id, vector), ...) sorted by id

    def __post_init__(self):
        entries = tuple(sorted(((i, as_vector(v)) for i, v in self.entries), key=lambda e: e[0]))
        ids = [i for i, _ in entries]
        if len(set(ids)) != len(ids):
            raise ConfigError("index ids must be unique")
        lengths = {len(v) for _, v in entries}
        if len(lengths) > 1:
            raise LengthMismatch(f"index vectors have differing lengths {sorted(lengths)}")
        object.__setattr__(self, "entries", entries)

    def __len__(self):
        return len(self.entries)

    @property
    def ids(self):
        return [i for i, _ in self.entries]

    @property
    def dim(self) -> int:
        return len(self.entries[0][1]) if self.entries else 0


def nearest(query, index: DescriptorIndex, k: int = 1, distance=l2_distance):
    """The ``k`` closest entries as ``[(id, distance), ...]``.

    Exact linear scan; ascending distance, ties broken by id.
    """
    if not len(index):
        raise ConfigError("index is empty")
    q = as_vector(query)
    if len(q) != index.dim:
        raise LengthMismatch(f"query has {len(q)} values, index holds {index.dim}")
    scored = sorted(((distance(q, v), i) for i, v in index.entries))
    return [(i, d) for d, i in scored[:max(0, min(k, len(scored)))]]


def save_index(index: DescriptorIndex, directory, config: dict, formatter) -> None:
    """Write one descriptor file per id plus a manifest with the method config."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    for ident, vec in index.entries:
        (d / f"{ident}.txt").write_text(formatter(vec))
    manifest = {"method": index.method, "config": config, "dim": index.dim, "ids": index.ids}
    (d / MANIFEST).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def read_manifest(directory) -> dict:
    d = Path(directory)
    try:
        return json.loads((d / MANIFEST).read_text())
    except FileNotFoundError:
        raise IndexMismatch(f"{d}: not an index directory (no {MANIFEST})") from None


def load_index(directory, parser):
    """Return ``(index, manifest)``; ``parser`` maps file text to a flat vector."""
    d = Path(directory)
    manifest = read_manifest(d)
    entries = []
    for ident in manifest["ids"]:
        entries.append((ident, parser((d / f"{ident}.txt").read_text())))
    index = DescriptorIndex(manifest["method"], tuple(entries))
    if len(index) and index.dim != manifest["dim"]:
        raise IndexMismatch(f"{d}: manifest dim {manifest['dim']} != stored {index.dim}")
    return index, manifest
