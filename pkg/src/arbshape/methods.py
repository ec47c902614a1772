"""Named matching methods: image -> flat descriptor vector, plus a distance."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from . import arb, baselines
from .arb import ArbConfig
from .errors import ConfigError
from .geometry import compute_moments, largest_component, trace_contour
from .match import as_vector, l2_distance

ARB_METHODS = {"arb-simple": "simple", "arb-overlap": "overlap", "arb-accum": "accum"}
FD_METHODS = {"fd-cc", "fd-cd"}
METHODS = tuple(ARB_METHODS) + ("fd-cc", "fd-cd", "hausdorff")


def _hausdorff_vec(a, b) -> float:
    return baselines.hausdorff(np.reshape(a, (-1, 2)), np.reshape(b, (-1, 2)))


@dataclass(frozen=True)
class Method:
    name: str
    arb: ArbConfig = field(default_factory=ArbConfig)
    fd_k: int = baselines.DEFAULT_K
    samples: int = baselines.RESAMPLE_POINTS

    def __post_init__(self):
        if self.name not in METHODS:
            raise ConfigError(f"unknown method {self.name!r}; choose from {', '.join(METHODS)}")

    @property
    def tag(self) -> str:
        if self.name in ARB_METHODS:
            c = self.arb
            parts = [self.name, f"r{c.rings}", f"w{c.angular_width_deg:g}", c.weight_mode.value]
            if self.name != "arb-simple":
                parts += [f"d{c.tilt_delta_deg:g}", f"n{c.instances}"]
            parts.append(c.orientation_mode.value)
            return ":".join(parts)
        if self.name in FD_METHODS:
            return f"{self.name}:k{self.fd_k}:n{self.samples}"
        return f"{self.name}:n{self.samples}"

    def config(self) -> dict:
        d = {"name": self.name, "tag": self.tag}
        if self.name in ARB_METHODS:
            d["arb"] = {k: (v.value if hasattr(v, "value") else v) for k, v in dataclasses.asdict(self.arb).items()}
        else:
            d["fd_k"] = self.fd_k
            d["samples"] = self.samples
        return d

    def describe_array(self, img) -> np.ndarray:
        """Descriptor in its natural shape."""
        if self.name in ARB_METHODS:
            return arb.describe_arb(img, self.arb, ARB_METHODS[self.name])
        comp = largest_component(img)
        contour = trace_contour(comp)
        m = compute_moments(comp)
        if self.name == "fd-cc":
            return baselines.fd_complex_coordinates(contour, self.fd_k, self.samples).magnitudes
        if self.name == "fd-cd":
            return baselines.fd_centroid_distance(contour, (m.cx, m.cy), self.fd_k, self.samples).magnitudes
        # hausdorff: resampled contour, centroid-relative for translation invariance
        dx, dy = m.centered(contour.points)
        return baselines.resample_contour(np.stack([dx, dy], axis=1), self.samples)

    def describe(self, img) -> tuple:
        return as_vector(self.describe_array(img))

    @property
    def distance(self):
        return _hausdorff_vec if self.name == "hausdorff" else l2_distance

    # text form used for descriptor files and index directories
    def format(self, values) -> str:
        if self.name in ARB_METHODS:
            shape = self.arb.shape + ((self.arb.instances,) if self.name == "arb-overlap" else ())
            return arb.format_arb(np.reshape(values, shape), self.arb, self.name)
        if self.name in FD_METHODS:
            kind = baselines.SignatureKind(self.name.split("-")[1])
            fd = baselines.FourierDescriptor(np.asarray(values, dtype=np.float64), kind)
            return baselines.format_fd(fd, self.samples)
        pts = np.reshape(values, (-1, 2))
        body = "\n".join(f"{x:.17g} {y:.17g}" for x, y in pts)
        return f"HD v1 n={len(pts)}\n{body}\n"

    def parse(self, text: str) -> tuple:
        head = text.split("\n", 1)[0]
        if self.name in ARB_METHODS:
            values, cfg, name = arb.parse_arb(text)
            if (name and name != self.name) or cfg != self.arb:
                raise ConfigError(f"descriptor header {head!r} does not match method {self.tag}")
            return as_vector(values)
        if self.name in FD_METHODS:
            fd = baselines.parse_fd(text)
            if fd.signature_kind.value != self.name.split("-")[1]:
                raise ConfigError(f"descriptor header {head!r} does not match method {self.tag}")
            return as_vector(fd.magnitudes)
        arb.parse_header(head, "HD")
        return as_vector(np.array([[float(v) for v in ln.split()] for ln in text.splitlines()[1:] if ln.strip()]))


def from_dict(d: dict) -> Method:
    if "arb" in d:
        return Method(d["name"], arb=ArbConfig(**d["arb"]))
    return Method(d["name"], fd_k=d.get("fd_k", baselines.DEFAULT_K), samples=d.get("samples", baselines.RESAMPLE_POINTS))


def default_methods(arb_cfg: ArbConfig | None = None):
    cfg = arb_cfg or ArbConfig()
    return [Method(n, arb=cfg) for n in ("arb-simple", "arb-accum", "arb-overlap")] + [Method("fd-cc"), Method("fd-cd")]
