"""Compactly supported W^{1,p} test functions with analytic gradients.

Every function is built from a one-dimensional profile phi on [0, 1] with
phi(t) = 0 for t >= 1:

* ``tent``, ``smooth_bump``, ``cosine_bump``: phi(|x - c| / scale)
* ``product_1d``: prod_i phi(|x_i - c_i| / scale)
* ``affine_image``: phi(|M (x - c)| / scale)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
from scipy import integrate

from gaugefrac.bodies import BodyNormHandle, _as_points
from gaugefrac.quadrature import (
    QuadratureSpec,
    composite_gauss,
    digest,
    golden_breaks,
    half_sphere_rule,
    sphere_area,
)

PROFILES = ("tent", "smooth_bump", "cosine_bump")
KINDS = PROFILES + ("product_1d", "affine_image")


def profile_value(name: str, t):
    t = np.asarray(t, dtype=float)
    inside = t < 1.0
    if name == "tent":
        return np.where(inside, 1.0 - t, 0.0)
    if name == "smooth_bump":
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            val = np.exp(1.0 - 1.0 / (1.0 - t * t))
        return np.where(inside, val, 0.0)
    if name == "cosine_bump":
        return np.where(inside, np.cos(0.5 * math.pi * t) ** 2, 0.0)
    raise ValueError(f"unknown profile {name!r}")


def profile_slope(name: str, t):
    t = np.asarray(t, dtype=float)
    inside = t < 1.0
    if name == "tent":
        return np.where(inside, -1.0, 0.0)
    if name == "smooth_bump":
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            d = 1.0 - t * t
            val = np.exp(1.0 - 1.0 / d) * (-2.0 * t / (d * d))
        return np.where(inside, np.nan_to_num(val), 0.0)
    if name == "cosine_bump":
        return np.where(inside, -0.5 * math.pi * np.sin(math.pi * t), 0.0)
    raise ValueError(f"unknown profile {name!r}")


@lru_cache(maxsize=None)
def profile_moment(name: str, p: float, power: int, derivative: bool) -> float:
    """int_0^1 |phi(t)|^p t^power dt (or with phi')."""
    fn = profile_slope if derivative else profile_value
    val, _ = integrate.quad(
        lambda t: abs(float(fn(name, t))) ** p * t**power, 0.0, 1.0, epsabs=1e-15, epsrel=1e-13, limit=200
    )
    return val


@dataclass(frozen=True)
class TestFunction:
    """A compactly supported test function on R^n, n in {1, 2, 3}."""

    __test__ = False  # not a pytest class

    kind: str
    dim: int
    center: tuple
    scale: float
    profile: str | None = None
    matrix: tuple | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown function kind {self.kind!r}; expected one of {KINDS}")
        if self.dim not in (1, 2, 3):
            raise ValueError("test functions live in dimension 1, 2 or 3")
        c = np.asarray(self.center, dtype=float)
        if c.shape != (self.dim,) or not np.all(np.isfinite(c)):
            raise ValueError("center must be a finite vector of the function's dimension")
        if not (math.isfinite(self.scale) and self.scale > 0):
            raise ValueError("scale must be a positive finite real")
        if self.kind in ("product_1d", "affine_image") and self.profile not in PROFILES:
            raise ValueError(f"{self.kind} needs a profile in {PROFILES}")
        if self.kind == "affine_image":
            m = np.asarray(self.matrix, dtype=float)
            if m.shape != (self.dim, self.dim) or abs(np.linalg.det(m)) < 1e-12:
                raise ValueError("affine_image needs an invertible n x n matrix")

    @classmethod
    def make(cls, kind: str, dim: int = 1, center=None, scale: float = 1.0, profile=None, matrix=None):
        center = np.zeros(dim) if center is None else np.atleast_1d(np.asarray(center, dtype=float))
        if matrix is not None:
            matrix = tuple(tuple(float(v) for v in row) for row in np.atleast_2d(matrix))
        return cls(kind, dim, tuple(float(v) for v in center), float(scale), profile, matrix)

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "dim": self.dim, "center": list(self.center), "scale": self.scale}
        if self.profile is not None:
            out["profile"] = self.profile
        if self.matrix is not None:
            out["matrix"] = [list(r) for r in self.matrix]
        return out

    @classmethod
    def from_dict(cls, data: dict) -> TestFunction:
        try:
            return cls.make(
                data["kind"],
                int(data["dim"]),
                data.get("center"),
                data.get("scale", 1.0),
                data.get("profile"),
                data.get("matrix"),
            )
        except KeyError as exc:
            raise ValueError(f"function descriptor is missing {exc}") from None

    @property
    def digest(self) -> str:
        return digest(self.to_dict())

    def dilated(self, lam: float) -> TestFunction:
        """x -> f(x / lam) (center scaled along)."""
        return TestFunction.make(
            self.kind, self.dim, lam * self._c, lam * self.scale, self.profile, self.matrix
        )

    def shifted(self, offset) -> TestFunction:
        return TestFunction.make(
            self.kind, self.dim, self._c + np.asarray(offset, dtype=float), self.scale, self.profile, self.matrix
        )

    # geometry ----------------------------------------------------------------

    @cached_property
    def _c(self) -> np.ndarray:
        return np.asarray(self.center, dtype=float)

    @cached_property
    def _m(self) -> np.ndarray:
        return np.asarray(self.matrix, dtype=float)

    @cached_property
    def _minv(self) -> np.ndarray:
        return np.linalg.inv(self._m)

    @property
    def _profile(self) -> str:
        return self.profile if self.kind in ("product_1d", "affine_image") else self.kind

    @property
    def radial(self) -> bool:
        return self.kind in PROFILES

    @cached_property
    def support_half_widths(self) -> np.ndarray:
        if self.kind == "affine_image":
            g = self._minv @ self._minv.T
            return self.scale * np.sqrt(np.diag(g))
        return np.full(self.dim, self.scale)

    @property
    def support_box(self) -> tuple[np.ndarray, np.ndarray]:
        w = self.support_half_widths
        return self._c - w, self._c + w

    def support_extent(self, e: np.ndarray) -> float:
        """max over the support of e.(x - c)."""
        e = np.asarray(e, dtype=float)
        if self.kind == "affine_image":
            return self.scale * float(np.linalg.norm(self._minv.T @ e))
        if self.kind == "product_1d":
            return self.scale * float(np.abs(e).sum())
        return self.scale * float(np.linalg.norm(e))

    # evaluation ----------------------------------------------------------------

    def __call__(self, x):
        return self.eval(x)

    def eval(self, x):
        x = _as_points(x, self.dim)
        y = x - self._c
        name = self._profile
        if self.kind == "product_1d":
            return np.prod(profile_value(name, np.abs(y) / self.scale), axis=-1)
        if self.kind == "affine_image":
            y = y @ self._m.T
        return profile_value(name, np.linalg.norm(y, axis=-1) / self.scale)

    def grad(self, x):
        """Analytic gradient; on the ridge set (see :meth:`on_ridge`) a
        subgradient selection is returned."""
        x = _as_points(x, self.dim)
        y = x - self._c
        name = self._profile
        rho = self.scale
        if self.kind == "product_1d":
            t = np.abs(y) / rho
            vals = profile_value(name, t)
            slopes = profile_slope(name, t) * np.sign(y) / rho
            out = np.empty_like(y)
            for i in range(self.dim):
                others = np.prod(np.delete(vals, i, axis=-1), axis=-1)
                out[..., i] = slopes[..., i] * others
            return out
        if self.kind == "affine_image":
            z = y @ self._m.T
        else:
            z = y
        r = np.linalg.norm(z, axis=-1)
        safe = np.where(r > 0, r, 1.0)
        radial = profile_slope(name, r / rho) / rho * np.where(r > 0, 1.0, 0.0) / safe
        g = radial[..., None] * z
        if self.kind == "affine_image":
            g = g @ self._m
        return g

    def on_ridge(self, x, tol: float = 1e-12):
        """Points where the function is not differentiable (tent apex/ridges)."""
        x = _as_points(x, self.dim)
        y = x - self._c
        if self._profile != "tent":
            return np.zeros(x.shape[:-1], dtype=bool)
        if self.kind == "product_1d":
            inside = np.all(np.abs(y) < self.scale, axis=-1)
            return inside & np.any(np.abs(y) < tol * self.scale, axis=-1)
        if self.kind == "affine_image":
            y = y @ self._m.T
        r = np.linalg.norm(y, axis=-1)
        return (r < tol * self.scale) | (np.abs(r - self.scale) < tol * self.scale)

    # restriction to lines ------------------------------------------------------

    def line_support(self, y: np.ndarray, u: np.ndarray):
        """Parameter interval (t0, t1) where t -> f(y + t u) may be nonzero,
        its symmetry centre (or None), and interior kink parameters."""
        d = y - self._c
        if self.kind == "product_1d":
            lo, hi = -np.inf, np.inf
            for i in range(self.dim):
                if abs(u[i]) < 1e-15:
                    if abs(d[i]) >= self.scale:
                        return None
                    continue
                a = (-self.scale - d[i]) / u[i]
                b = (self.scale - d[i]) / u[i]
                lo, hi = max(lo, min(a, b)), min(hi, max(a, b))
            if hi <= lo:
                return None
            kinks = []
            if self._profile == "tent":
                kinks = [-d[i] / u[i] for i in range(self.dim) if abs(u[i]) > 1e-15]
                kinks = [k for k in kinks if lo < k < hi]
            return lo, hi, None, kinks
        if self.kind == "affine_image":
            mu = self._m @ u
            md = self._m @ d
        else:
            mu, md = u, d
        a = mu @ mu
        t0 = -(mu @ md) / a
        r2 = md @ md - (mu @ md) ** 2 / a
        disc = (self.scale**2 - r2) / a
        if disc <= 0:
            return None
        half = math.sqrt(disc)
        kinks = [t0] if self._profile == "tent" else []
        return t0 - half, t0 + half, t0, kinks


def _tensor_rule(lo, hi, panels: int, order: int):
    axes = [composite_gauss(golden_breaks(a, b, panels), order) for a, b in zip(lo, hi)]
    grids = np.meshgrid(*[ax[0] for ax in axes], indexing="ij")
    weights = np.ones_like(grids[0])
    for i, ax in enumerate(axes):
        shape = [1] * len(axes)
        shape[i] = -1
        weights = weights * ax[1].reshape(shape)
    return np.stack(grids, axis=-1).reshape(-1, len(axes)), weights.reshape(-1)


def box_integral(f: TestFunction, integrand, spec: QuadratureSpec) -> float:
    """Tensor-product Gauss quadrature of integrand(x) over f's support box."""
    lo, hi = f.support_box
    x, w = _tensor_rule(lo, hi, spec.spatial_panels, spec.spatial_order)
    return float(np.sum(w * integrand(x)))


def lp_norm(f: TestFunction, p: float, spec: QuadratureSpec | None = None) -> float:
    """(int |f|^p dx)^(1/p).

    Radial and affine kinds reduce to a 1D profile integral, products factor
    into 1D integrals; both are exact up to the 1D quadrature tolerance.
    """
    if not p >= 1:
        raise ValueError("p must be >= 1")
    n, rho, name = f.dim, f.scale, f._profile
    if f.kind == "product_1d":
        val = (2.0 * rho * profile_moment(name, p, 0, False)) ** n
    else:
        val = sphere_area(n) * rho**n * profile_moment(name, p, n - 1, False)
        if f.kind == "affine_image":
            val /= abs(np.linalg.det(f._m))
    return val ** (1.0 / p)


def _angular_norm_power(norm, p: float, dim: int, angular_points: int, transform=None) -> float:
    """int_{S^{n-1}} N(T u)^p du for an even norm N."""
    kinks = () if transform is not None else norm.kink_angles() if hasattr(norm, "kink_angles") else ()
    u, w = half_sphere_rule(dim, angular_points, kinks)
    v = u if transform is None else u @ transform.T
    return 2.0 * float(np.sum(w * np.asarray(norm(v)) ** p))


def anisotropic_sobolev_seminorm(f: TestFunction, p: float, norm, spec: QuadratureSpec | None = None) -> float:
    """int N(grad f(x))^p dx (the p-th power, not its root).

    ``norm`` is any even, degree-1 homogeneous callable on vectors (typically a
    :class:`BodyNormHandle`). Radial kinds use polar coordinates around the
    centre, affine images a change of variables, products a tensor grid.
    """
    if not p >= 1:
        raise ValueError("p must be >= 1")
    spec = spec or QuadratureSpec()
    if isinstance(norm, BodyNormHandle) and norm.dim != f.dim:
        raise ValueError("norm and function dimensions differ")
    n, rho, name = f.dim, f.scale, f._profile
    # 3D product rules grow quadratically in the point count
    points = max(256, 4 * spec.angular_points) if n == 2 else spec.angular_points
    if f.kind == "product_1d":
        return box_integral(f, lambda x: np.asarray(norm(f.grad(x))) ** p, spec)
    radial = rho ** (n - p) * profile_moment(name, p, n - 1, True)
    if f.kind == "affine_image":
        # grad f(x) = M^T grad g(M(x - c)) with g radial; dx = dy / |det M|
        ang = _angular_norm_power(norm, p, n, points, transform=f._m.T)
        return radial * ang / abs(np.linalg.det(f._m))
    return radial * _angular_norm_power(norm, p, n, points)
