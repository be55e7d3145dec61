"""Discretization record and the quadrature rules shared by every integrator."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

# Fractional offset applied to tensor-grid panel layouts so that no node lands
# on a lattice point (e.g. the apex of a tent).
GOLDEN_SHIFT = 0.5 * (math.sqrt(5.0) - 1.0) / 2.0

# Smallest inner cutoff of the graded radial grid, relative to the split
# radius. Below about 1e-8 the differences f(x + h) - f(x) are dominated by
# rounding, so deeper panels add noise rather than accuracy; the leading-term
# closure takes over there.
MIN_CUTOFF = 1e-8


def digest(obj) -> str:
    """Short stable hash of a JSON-compatible object."""
    text = json.dumps(obj, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class QuadratureSpec:
    """All discretization parameters of one computation.

    radial_panels
        Number of geometric panels between the split radius and the inner
        cutoff ``split * radial_grading**radial_panels``, capped so that the
        cutoff stays above ``MIN_CUTOFF * split``.
    radial_order, spatial_order
        Gauss-Legendre points per radial / spatial panel.
    radial_max_width
        Geometric panels wider than this fraction of the split radius are
        subdivided.
    angular_points
        Nodes on the full circle (2D) or longitudes (3D).
    split_radius
        Near/far split in gauge units; ``None`` picks the gauge diameter of
        the support.
    """

    radial_panels: int = 30
    radial_grading: float = 0.5
    radial_order: int = 8
    radial_max_width: float = 0.125
    angular_points: int = 64
    spatial_panels: int = 24
    spatial_order: int = 4
    split_radius: float | None = None
    mc_samples: int = 1_000_000
    seed: int = 0

    def __post_init__(self):
        if self.radial_panels < 8:
            raise ValueError("radial_panels must be >= 8")
        if not 0.0 < self.radial_grading < 1.0:
            raise ValueError("radial_grading must lie in (0, 1)")
        if not 0.0 < self.radial_max_width <= 1.0:
            raise ValueError("radial_max_width must lie in (0, 1]")
        for name in ("radial_order", "angular_points", "spatial_panels", "spatial_order", "mc_samples"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be a positive integer")
        if self.split_radius is not None and not self.split_radius > 0:
            raise ValueError("split_radius must be positive")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    def coarsened(self) -> QuadratureSpec:
        """Companion grid used for the two-grid error estimate."""
        return dataclasses.replace(
            self,
            radial_order=max(2, self.radial_order // 2),
            angular_points=max(8, self.angular_points // 2),
            spatial_panels=max(2, self.spatial_panels // 2),
        )

    def refined(self) -> QuadratureSpec:
        return dataclasses.replace(
            self,
            radial_panels=2 * self.radial_panels,
            angular_points=2 * self.angular_points,
        )

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict | None) -> QuadratureSpec:
        data = dict(data or {})
        unknown = set(data) - {f.name for f in dataclasses.fields(cls)}
        if unknown:
            raise ValueError(f"unknown quadrature fields: {sorted(unknown)}")
        return cls(**data)

    @property
    def digest(self) -> str:
        return digest(self.to_dict())


@lru_cache(maxsize=None)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


def composite_gauss(breaks, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre on each interval of ``breaks`` (last axis, sorted).

    Leading axes are batch axes; zero-length intervals get zero weight.
    """
    breaks = np.asarray(breaks, dtype=float)
    x, w = gauss_legendre(order)
    a = breaks[..., :-1, None]
    b = breaks[..., 1:, None]
    half = 0.5 * (b - a)
    nodes = (a + b) * 0.5 + half * x
    weights = half * w
    shape = breaks.shape[:-1] + (-1,)
    return nodes.reshape(shape), weights.reshape(shape)


def golden_breaks(a, b, panels: int) -> np.ndarray:
    """Panel edges covering [a, b] with interior edges shifted off the lattice.

    ``a`` and ``b`` may be arrays (batch); returns shape (..., panels + 2).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    frac = (GOLDEN_SHIFT + np.arange(panels)) / panels
    inner = a[..., None] + (b - a)[..., None] * frac
    return np.concatenate([a[..., None], inner, b[..., None]], axis=-1)


def subdivide(breaks: np.ndarray, pieces: int) -> np.ndarray:
    """Split every interval of a sorted break array into ``pieces`` equal parts."""
    if pieces <= 1:
        return breaks
    a = breaks[..., :-1, None]
    b = breaks[..., 1:, None]
    t = np.arange(pieces) / pieces
    inner = (a + (b - a) * t).reshape(breaks.shape[:-1] + (-1,))
    return np.concatenate([inner, breaks[..., -1:]], axis=-1)


@lru_cache(maxsize=64)
def radial_unit_rule(panels: int, grading: float, order: int, max_width: float):
    """Graded rule on (eps, 1] with ``eps = grading**panels >= MIN_CUTOFF``.

    Returns (nodes, weights, eps). Scaling by a split radius R gives the rule on
    (R*eps, R].
    """
    panels = min(panels, math.floor(math.log(MIN_CUTOFF) / math.log(grading)))
    edges = grading ** np.arange(panels + 1)
    nodes, weights = [], []
    for hi, lo in zip(edges[:-1], edges[1:]):
        pieces = max(1, math.ceil((hi - lo) / max_width - 1e-12))
        br = np.linspace(lo, hi, pieces + 1)
        x, w = composite_gauss(br, order)
        nodes.append(x)
        weights.append(w)
    x = np.concatenate(nodes)
    w = np.concatenate(weights)
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w, float(edges[-1])


def sphere_area(n: int) -> float:
    """Surface measure of the unit sphere in R^n (|S^0| = 2)."""
    return 2.0 * math.pi ** (n / 2) / math.gamma(n / 2)


def ball_volume(n: int) -> float:
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


def circle_rule(points: int, kinks=()) -> tuple[np.ndarray, np.ndarray]:
    """Angles in [0, pi) with weights summing to pi.

    Without kinks: midpoint trapezoid (spectral for smooth periodic data).
    With kinks (angles mod pi where the integrand is not smooth): composite
    Gauss-Legendre on the arcs between them.
    """
    half = max(2, points // 2)
    kinks = np.unique(np.mod(np.asarray(kinks, dtype=float), math.pi))
    if kinks.size == 0:
        theta = (np.arange(half) + 0.5) * math.pi / half
        return theta, np.full(half, math.pi / half)
    edges = np.unique(np.concatenate([[0.0], kinks, [math.pi]]))
    edges = edges[np.concatenate([[True], np.diff(edges) > 1e-12])]
    if edges[-1] < math.pi - 1e-12:
        edges = np.append(edges, math.pi)
    else:
        edges[-1] = math.pi
    nodes, weights = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        order = max(4, math.ceil(half * (hi - lo) / math.pi))
        x, w = composite_gauss(np.array([lo, hi]), order)
        nodes.append(x)
        weights.append(w)
    return np.concatenate(nodes), np.concatenate(weights)


def half_sphere_rule(n: int, points: int, kinks=()) -> tuple[np.ndarray, np.ndarray]:
    """Directions covering half of S^{n-1}, weights summing to |S^{n-1}|/2.

    For an even integrand F, the full-sphere integral is ``2 * sum(w * F(u))``.
    ``kinks`` are angles (2D only) at which the integrand has kinks.
    """
    if n == 1:
        return np.array([[1.0]]), np.array([1.0])
    if n == 2:
        theta, w = circle_rule(points, kinks)
        return np.stack([np.cos(theta), np.sin(theta)], axis=-1), w
    if n == 3:
        n_lon = max(4, points)
        n_col = max(2, points // 4)
        xc, wc = composite_gauss(np.array([0.0, math.pi / 2]), n_col)
        phi = (np.arange(n_lon) + 0.5) * 2 * math.pi / n_lon
        col, lon = np.meshgrid(xc, phi, indexing="ij")
        u = np.stack(
            [np.sin(col) * np.cos(lon), np.sin(col) * np.sin(lon), np.cos(col)], axis=-1
        ).reshape(-1, 3)
        w = (np.sin(xc) * wc)[:, None] * np.full(n_lon, 2 * math.pi / n_lon)
        return u, w.reshape(-1)
    raise ValueError(f"dimension {n} not supported (n must be 1, 2 or 3)")


def orthonormal_complement(u: np.ndarray) -> np.ndarray:
    """Rows spanning the hyperplane orthogonal to the unit vector u."""
    n = u.shape[0]
    if n == 1:
        return np.zeros((0, 1))
    if n == 2:
        return np.array([[-u[1], u[0]]])
    q, _ = np.linalg.qr(np.column_stack([u, np.eye(n)]))
    return q[:, 1:n].T
