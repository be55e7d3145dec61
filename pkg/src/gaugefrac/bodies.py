"""Origin-symmetric convex bodies: gauges, support functions, volumes, moments.

Every body contains the origin in its interior, so its gauge
``||x||_K = inf{t > 0 : x in tK}`` is a norm whose unit ball is K, and its
support function ``h_K(v) = max_{x in K} v.x`` is the gauge of the polar body.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
from scipy.spatial import ConvexHull
from scipy.special import beta as beta_fn
from scipy.special import gammaln

from gaugefrac.quadrature import (
    QuadratureSpec,
    ball_volume,
    circle_rule,
    composite_gauss,
    digest,
    half_sphere_rule,
)

KINDS = ("box", "ellipsoid", "lq_ball", "sym_polytope")


def _as_points(x, dim: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 0 or x.shape[-1] != dim:
        raise ValueError(f"expected vectors of dimension {dim}, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("coordinates must be finite")
    return x


def _tuple2(a) -> tuple:
    return tuple(tuple(float(v) for v in row) for row in np.atleast_2d(a))


@dataclass(frozen=True)
class ConvexBody:
    """An origin-symmetric convex body with the origin in its interior.

    Use the constructors (:meth:`box`, :meth:`ellipsoid`, :meth:`ball`,
    :meth:`lq_ball`, :meth:`polytope`, :meth:`cross_polytope`) rather than the
    raw fields. A polytope is ``conv(V u -V)`` for the stored vertices V.
    """

    kind: str
    dim: int
    half_widths: tuple | None = None
    matrix: tuple | None = None
    q: float | None = None
    scales: tuple | None = None
    vertices: tuple | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown body kind {self.kind!r}; expected one of {KINDS}")
        if self.dim not in (1, 2, 3):
            raise ValueError("bodies are supported in dimensions 1, 2, 3 only")
        n = self.dim
        if self.kind == "box":
            w = np.asarray(self.half_widths, dtype=float)
            if w.shape != (n,) or not np.all(np.isfinite(w)) or np.any(w <= 0):
                raise ValueError("box half-widths must be n strictly positive reals")
        elif self.kind == "ellipsoid":
            a = np.asarray(self.matrix, dtype=float)
            if a.shape != (n, n) or not np.allclose(a, a.T, rtol=0, atol=1e-12 * np.abs(a).max()):
                raise ValueError("ellipsoid matrix must be symmetric n x n")
            if np.linalg.eigvalsh(a).min() <= 0:
                raise ValueError("ellipsoid matrix must be positive definite")
        elif self.kind == "lq_ball":
            a = np.asarray(self.scales, dtype=float)
            if self.q is None or not self.q >= 1:
                raise ValueError("lq_ball exponent q must lie in [1, inf]")
            if a.shape != (n,) or not np.all(np.isfinite(a)) or np.any(a <= 0):
                raise ValueError("lq_ball scales must be n strictly positive reals")
        else:
            v = np.asarray(self.vertices, dtype=float)
            if v.ndim != 2 or v.shape[1] != n or not np.all(np.isfinite(v)):
                raise ValueError("polytope vertices must be a list of n-vectors")
            if np.linalg.matrix_rank(v) < n:
                raise ValueError("polytope vertices must span R^n")

    # constructors -------------------------------------------------------

    @classmethod
    def box(cls, half_widths) -> ConvexBody:
        w = np.atleast_1d(np.asarray(half_widths, dtype=float))
        return cls("box", len(w), half_widths=tuple(float(v) for v in w))

    @classmethod
    def interval(cls, half_width: float = 1.0) -> ConvexBody:
        return cls.box([half_width])

    @classmethod
    def ellipsoid(cls, matrix) -> ConvexBody:
        a = np.atleast_2d(np.asarray(matrix, dtype=float))
        return cls("ellipsoid", a.shape[0], matrix=_tuple2(a))

    @classmethod
    def ball(cls, dim: int, radius: float = 1.0) -> ConvexBody:
        return cls.ellipsoid(np.eye(dim) / radius**2)

    @classmethod
    def lq_ball(cls, q: float, scales) -> ConvexBody:
        a = np.atleast_1d(np.asarray(scales, dtype=float))
        return cls("lq_ball", len(a), q=float(q), scales=tuple(float(v) for v in a))

    @classmethod
    def polytope(cls, vertices) -> ConvexBody:
        v = np.atleast_2d(np.asarray(vertices, dtype=float))
        return cls("sym_polytope", v.shape[1], vertices=_tuple2(v))

    @classmethod
    def cross_polytope(cls, dim: int, radius: float = 1.0) -> ConvexBody:
        return cls.polytope(radius * np.eye(dim))

    def scaled(self, lam: float) -> ConvexBody:
        """The body lam*K."""
        if not lam > 0:
            raise ValueError("scale factor must be positive")
        if self.kind == "box":
            return ConvexBody.box(lam * np.asarray(self.half_widths))
        if self.kind == "ellipsoid":
            return ConvexBody.ellipsoid(np.asarray(self.matrix) / lam**2)
        if self.kind == "lq_ball":
            return ConvexBody.lq_ball(self.q, lam * np.asarray(self.scales))
        return ConvexBody.polytope(lam * np.asarray(self.vertices))

    def polar(self) -> ConvexBody:
        """The polar body K* = {v : v.x <= 1 for all x in K}."""
        if self.kind == "box":
            return ConvexBody.polytope(np.diag(1.0 / np.asarray(self.half_widths)))
        if self.kind == "ellipsoid":
            return ConvexBody.ellipsoid(self._ainv)
        if self.kind == "lq_ball":
            return ConvexBody.lq_ball(_conjugate(self.q), 1.0 / np.asarray(self.scales))
        f = self._facets
        keep = []
        for row in f:
            if not any(np.allclose(row, -k) or np.allclose(row, k) for k in keep):
                keep.append(row)
        return ConvexBody.polytope(np.array(keep))

    # serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        if self.kind == "box":
            params = {"half_widths": list(self.half_widths)}
        elif self.kind == "ellipsoid":
            params = {"matrix": [list(r) for r in self.matrix]}
        elif self.kind == "lq_ball":
            params = {"q": "inf" if math.isinf(self.q) else self.q, "scales": list(self.scales)}
        else:
            params = {"vertices": [list(r) for r in self.vertices]}
        return {"kind": self.kind, "dim": self.dim, "parameters": params}

    @classmethod
    def from_dict(cls, data: dict) -> ConvexBody:
        try:
            kind = data["kind"]
            dim = int(data["dim"])
            params = data.get("parameters", {})
        except (KeyError, TypeError) as exc:
            raise ValueError(f"body descriptor needs 'kind' and 'dim': {exc}") from None
        if kind == "box":
            body = cls.box(params["half_widths"])
        elif kind == "ellipsoid":
            body = cls.ellipsoid(params["matrix"])
        elif kind == "ball":
            body = cls.ball(dim, params.get("radius", 1.0))
        elif kind == "lq_ball":
            body = cls.lq_ball(float(params["q"]), params["scales"])
        elif kind in ("sym_polytope", "cross_polytope"):
            if kind == "cross_polytope":
                body = cls.cross_polytope(dim, params.get("radius", 1.0))
            else:
                body = cls.polytope(params["vertices"])
        else:
            raise ValueError(f"unknown body kind {kind!r}")
        if body.dim != dim:
            raise ValueError(f"body parameters have dimension {body.dim}, descriptor says {dim}")
        return body

    @property
    def digest(self) -> str:
        return digest(self.to_dict())

    # derived data ---------------------------------------------------------

    @cached_property
    def _a(self) -> np.ndarray:
        return np.asarray(self.matrix, dtype=float)

    @cached_property
    def _ainv(self) -> np.ndarray:
        return np.linalg.inv(self._a)

    @cached_property
    def _hull_points(self) -> np.ndarray:
        v = np.asarray(self.vertices, dtype=float)
        pts = np.vstack([v, -v])
        if self.dim == 1:
            m = np.abs(pts).max()
            return np.array([[m], [-m]])
        hull = ConvexHull(pts)
        return pts[hull.vertices]

    @cached_property
    def _facets(self) -> np.ndarray:
        """Rows a_j with K = {x : a_j.x <= 1 for all j}."""
        if self.dim == 1:
            m = self._hull_points[0, 0]
            return np.array([[1.0 / m], [-1.0 / m]])
        hull = ConvexHull(self._hull_points)
        eq = hull.equations
        a = eq[:, :-1] / (-eq[:, -1:])
        return np.unique(np.round(a, 12), axis=0)

    @cached_property
    def _simplices(self) -> tuple[np.ndarray, np.ndarray]:
        """Cone simplices conv(0, facet) tiling the polytope, with volumes."""
        pts = self._hull_points
        if self.dim == 1:
            tris = pts[:, None, :]
        else:
            hull = ConvexHull(pts)
            tris = pts[hull.simplices]
        vols = np.abs(np.linalg.det(tris)) / math.factorial(self.dim)
        return tris, vols

    # evaluation -------------------------------------------------------------

    def gauge(self, x):
        """Minkowski functional ||x||_K; vectorized over leading axes."""
        x = _as_points(x, self.dim)
        if self.kind == "box":
            return np.max(np.abs(x) / np.asarray(self.half_widths), axis=-1)
        if self.kind == "ellipsoid":
            return np.sqrt(np.maximum(np.einsum("...i,ij,...j->...", x, self._a, x), 0.0))
        if self.kind == "lq_ball":
            return _lq_norm(x / np.asarray(self.scales), self.q)
        return np.maximum(np.max(x @ self._facets.T, axis=-1), 0.0)

    def support(self, v):
        """Support function h_K(v) = max_{x in K} v.x, the gauge of K*."""
        v = _as_points(v, self.dim)
        if self.kind == "box":
            return np.sum(np.abs(v) * np.asarray(self.half_widths), axis=-1)
        if self.kind == "ellipsoid":
            return np.sqrt(np.maximum(np.einsum("...i,ij,...j->...", v, self._ainv, v), 0.0))
        if self.kind == "lq_ball":
            return _lq_norm(v * np.asarray(self.scales), _conjugate(self.q))
        return np.max(np.abs(v @ self._hull_points.T), axis=-1)

    def volume(self) -> float:
        n = self.dim
        if self.kind == "box":
            return float(np.prod(2 * np.asarray(self.half_widths)))
        if self.kind == "ellipsoid":
            return ball_volume(n) / math.sqrt(np.linalg.det(self._a))
        if self.kind == "lq_ball":
            scale = float(np.prod(2 * np.asarray(self.scales)))
            if math.isinf(self.q):
                return scale
            q = self.q
            return scale * math.exp(n * gammaln(1 + 1 / q) - gammaln(1 + n / q))
        return float(self._simplices[1].sum())

    def kink_angles(self) -> np.ndarray:
        """2D directions (radians mod pi) where the gauge is not smooth."""
        if self.dim != 2:
            return np.empty(0)
        if self.kind == "ellipsoid":
            return np.empty(0)
        if self.kind == "lq_ball" and not math.isinf(self.q):
            if self.q == 1:
                pts = np.diag(np.asarray(self.scales))
                return np.mod(np.arctan2(pts[:, 1], pts[:, 0]), math.pi)
            if float(self.q).is_integer() and int(self.q) % 2 == 0:
                return np.empty(0)
            return np.array([0.0, math.pi / 2])
        if self.kind in ("box", "lq_ball"):
            w = np.asarray(self.half_widths if self.kind == "box" else self.scales)
            pts = np.array([[w[0], w[1]], [-w[0], w[1]]])
        else:
            pts = self._hull_points
        return np.unique(np.mod(np.arctan2(pts[:, 1], pts[:, 0]), math.pi))

    def max_gauge_on_box(self, half_widths) -> float:
        """max ||z||_K over z in the box [-w, w] (attained at a corner)."""
        w = np.asarray(half_widths, dtype=float)
        signs = np.array(np.meshgrid(*[[-1.0, 1.0]] * self.dim)).reshape(self.dim, -1).T
        return float(np.max(self.gauge(signs * w)))

    def sample_uniform(self, count: int, seed: int) -> np.ndarray:
        """Fixed-seed uniform sample (polytopes: stratified over cone simplices)."""
        return _polytope_samples(self, count, seed)[0]


def _conjugate(q: float) -> float:
    if q == 1:
        return math.inf
    if math.isinf(q):
        return 1.0
    return q / (q - 1.0)


def _lq_norm(y: np.ndarray, q: float) -> np.ndarray:
    a = np.abs(y)
    m = np.max(a, axis=-1)
    if math.isinf(q):
        return m
    safe = np.where(m > 0, m, 1.0)
    return m * np.sum((a / safe[..., None]) ** q, axis=-1) ** (1.0 / q)


# ---------------------------------------------------------------------------
# L_p moment integrals  M_p(K, v) = int_K |v.x|^p dx


def _uniform_sum_abs_moment(a: np.ndarray, p: float) -> float:
    """E|U_1 + ... + U_k|^p for independent U_i ~ Unif[-a_i, a_i], in closed form.

    The density of the sum is a piecewise polynomial (a box spline); on each
    piece its antiderivative against t^p is integrated exactly.
    """
    a = np.asarray(a, dtype=float)
    a = a[a > 1e-6 * a.max()] if a.size and a.max() > 0 else a[:0]
    k = a.size
    if k == 0:
        return 0.0
    signs = np.array(np.meshgrid(*[[-1.0, 1.0]] * k)).reshape(k, -1).T
    shifts = signs @ a
    coef = np.prod(signs, axis=1) / (math.factorial(k - 1) * np.prod(2 * a))
    top = a.sum()
    br = np.unique(np.concatenate([[0.0, top], -shifts]))
    br = br[(br >= 0) & (br <= top)]
    total = 0.0
    binom = [math.comb(k - 1, j) for j in range(k)]
    for lo, hi in zip(br[:-1], br[1:]):
        mid = 0.5 * (lo + hi)
        active = mid + shifts > 0
        for c, sh in zip(coef[active], shifts[active]):
            # int_lo^hi t^p (t + sh)^(k-1) dt expanded in powers of t
            for j in range(k):
                e = p + j + 1
                total += c * binom[j] * sh ** (k - 1 - j) * (hi**e - lo**e) / e
    return 2.0 * total


def _ball_abs_moment(n: int, p: float) -> float:
    """int_{B_n} |x_1|^p dx."""
    return ball_volume(n - 1) * beta_fn((p + 1) / 2, (n + 1) / 2)


@lru_cache(maxsize=16)
def _polytope_samples(body: ConvexBody, count: int, seed: int):
    """Stratified uniform sample of a polytope, one stratum per cone simplex.

    Stratum k draws from a Philox stream keyed by (seed, k), so the sample is
    reproducible independent of evaluation order.
    """
    if count < 1:
        raise ValueError("Monte Carlo sample count must be positive")
    tris, vols = body._simplices
    total = vols.sum()
    counts = np.maximum(2, np.round(count * vols / total).astype(int))
    pts, strata = [], []
    for k, (tri, m) in enumerate(zip(tris, counts)):
        rng = np.random.Generator(np.random.Philox(key=int(seed) + (k << 64)))
        e = rng.exponential(size=(m, body.dim + 1))
        lam = e / e.sum(axis=1, keepdims=True)
        pts.append(lam[:, 1:] @ tri)
        strata.append(np.full(m, k))
    return np.vstack(pts), np.concatenate(strata), vols


def _moment_polytope_mc(body: ConvexBody, v: np.ndarray, p: float, spec: QuadratureSpec):
    x, strata, vols = _polytope_samples(body, spec.mc_samples, spec.seed)
    bounds = np.searchsorted(strata, np.arange(len(vols) + 1))
    est = np.zeros(len(v))
    var = np.zeros(len(v))
    for start in range(0, len(v), 8):
        vals = np.abs(v[start : start + 8] @ x.T) ** p
        for k, vol in enumerate(vols):
            sel = vals[:, bounds[k] : bounds[k + 1]]
            est[start : start + 8] += vol * sel.mean(axis=1)
            var[start : start + 8] += vol**2 * sel.var(axis=1, ddof=1) / sel.shape[1]
    return est, np.sqrt(var)


def moment_integral_polar(body: ConvexBody, v, p: float, angular_points: int = 256):
    """int_K |v.x|^p dx through gauge polar coordinates.

    Uses int_K F = 1/(n+p) int_S ||u||_K^{-(n+p)} |v.u|^p du for F homogeneous
    of degree p; deterministic, with the angular grid aligned to the gauge's
    kinks in 2D.
    """
    v = np.atleast_2d(_as_points(v, body.dim))
    n = body.dim
    out = np.empty(len(v))
    for i, vi in enumerate(v):
        if n == 1:
            u, w = np.array([[1.0]]), np.array([1.0])
        elif n == 2:
            kinks = np.append(body.kink_angles(), math.atan2(vi[1], vi[0]) + math.pi / 2)
            theta, w = circle_rule(angular_points, kinks)
            u = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        else:
            u, w = half_sphere_rule(3, angular_points)
        g = body.gauge(u)
        out[i] = 2.0 * np.sum(w * g ** (-(n + p)) * np.abs(u @ vi) ** p) / (n + p)
    return out


def moment_integral(body: ConvexBody, v, p: float, spec: QuadratureSpec | None = None):
    """int_K |v.x|^p dx and its standard error, vectorized over rows of v.

    Box: closed form via the density of a sum of uniforms. Ellipsoid: closed
    form through the beta function. lq_ball: gauge polar quadrature. Polytope:
    stratified fixed-seed Monte Carlo (the only path with nonzero error).
    """
    if not p >= 1:
        raise ValueError("moment exponent p must be >= 1")
    spec = spec or QuadratureSpec()
    v = _as_points(v, body.dim)
    single = v.ndim == 1
    v = np.atleast_2d(v)
    err = np.zeros(len(v))
    if body.kind == "box":
        w = np.asarray(body.half_widths)
        vol = body.volume()
        val = np.array([vol * _uniform_sum_abs_moment(np.abs(vi) * w, p) for vi in v])
    elif body.kind == "ellipsoid":
        r2 = np.einsum("ij,jk,ik->i", v, body._ainv, v)
        val = _ball_abs_moment(body.dim, p) * r2 ** (p / 2) / math.sqrt(np.linalg.det(body._a))
    elif body.kind == "lq_ball":
        val = moment_integral_polar(body, v, p, max(256, 4 * spec.angular_points))
    else:
        val, err = _moment_polytope_mc(body, v, p, spec)
    if single:
        return float(val[0]), float(err[0])
    return val, err


def lp_moment_norm(body: ConvexBody, v, p: float, spec: QuadratureSpec | None = None):
    """Gauge of the polar L_p moment body: ((n+p)/2 * int_K |v.x|^p dx)^(1/p).

    Degree-1 homogeneous in v; its p-th power is what limit comparisons use.
    """
    val, _ = moment_integral(body, v, p, spec)
    return (0.5 * (body.dim + p) * val) ** (1.0 / p)


def lp_moment_norm_error(body: ConvexBody, v, p: float, spec: QuadratureSpec | None = None):
    """lp_moment_norm together with a first-order propagated standard error."""
    val, err = moment_integral(body, v, p, spec)
    c = 0.5 * (body.dim + p)
    norm = (c * np.asarray(val)) ** (1.0 / p)
    with np.errstate(divide="ignore", invalid="ignore"):
        sd = np.where(val > 0, norm * np.asarray(err) / (p * np.asarray(val)), 0.0)
    if np.ndim(norm) == 0:
        return float(norm), float(sd)
    return norm, sd


@dataclass(frozen=True)
class BodyNormHandle:
    """One of the norms attached to a body: ||.||_K, ||.||_{K*}, or the polar
    L_p moment-body norm."""

    body: ConvexBody
    mode: str = "gauge"
    p: float | None = None
    spec: QuadratureSpec | None = None

    def __post_init__(self):
        if self.mode not in ("gauge", "polar_gauge", "lp_moment_polar"):
            raise ValueError(f"unknown norm mode {self.mode!r}")
        if self.mode == "lp_moment_polar" and (self.p is None or not self.p >= 1):
            raise ValueError("lp_moment_polar needs an exponent p >= 1")

    @classmethod
    def euclidean(cls, dim: int) -> BodyNormHandle:
        return cls(ConvexBody.ball(dim))

    @property
    def dim(self) -> int:
        return self.body.dim

    def __call__(self, v):
        if self.mode == "gauge":
            return self.body.gauge(v)
        if self.mode == "polar_gauge":
            return self.body.support(v)
        return lp_moment_norm(self.body, v, self.p, self.spec)

    def kink_angles(self) -> np.ndarray:
        if self.mode == "gauge":
            return self.body.kink_angles()
        if self.mode == "polar_gauge":
            return self.body.polar().kink_angles()
        return np.empty(0)

    def to_dict(self) -> dict:
        return {"body": self.body.to_dict(), "mode": self.mode, "p": self.p}


# ---------------------------------------------------------------------------


def gauge_polar_integral(body: ConvexBody, profile, r_max: float, breaks=(), order: int = 16, panels: int = 60):
    """int_{R^n} profile(||h||_K) dh over ||h||_K <= r_max.

    Equals n*Vol(K) * int_0^{r_max} profile(r) r^{n-1} dr. The radial integral
    uses geometric panels toward 0 (and toward infinity when ``r_max`` is
    infinite); the unresolved end pieces are closed by a geometric-series
    estimate, and a non-decaying series raises ``ValueError``.
    """
    n = body.dim
    if not r_max > 0:
        raise ValueError("r_max must be positive")
    pts = sorted(b for b in np.atleast_1d(np.asarray(breaks, dtype=float)) if 0 < b < r_max)
    inner = pts[0] if pts else (min(1.0, r_max) if math.isinf(r_max) else r_max)
    pts = [inner] + [b for b in pts if b > inner]
    if not math.isinf(r_max):
        pts.append(r_max)

    def integrand(r):
        return np.asarray(profile(r), dtype=float) * r ** (n - 1)

    def panel_sums(edges):
        x, w = composite_gauss(edges, order)
        vals = (integrand(x) * w).reshape(len(edges) - 1, order).sum(axis=1)
        return vals

    def closed_series(sums, where):
        tail = sums[-3:]
        if not np.all(np.isfinite(sums)):
            raise ValueError(f"profile is not integrable near {where}")
        if np.all(tail == 0):
            return 0.0
        ratio = abs(tail[-1]) / max(abs(tail[-2]), 1e-300)
        if ratio >= 1.0 - 1e-9:
            raise ValueError(f"profile is not integrable near {where} (refinement does not converge)")
        return tail[-1] * ratio / (1.0 - ratio)

    ratio = 0.5
    edges = inner * ratio ** np.arange(panels + 1)
    sums = panel_sums(edges[::-1])[::-1]
    total = sums.sum() + closed_series(sums, "r = 0")
    for lo, hi in zip(pts[:-1], pts[1:]):
        x, w = composite_gauss(np.linspace(lo, hi, 5), order)
        total += np.sum(integrand(x) * w)
    if math.isinf(r_max):
        edges = pts[-1] * (1 / ratio) ** np.arange(panels + 1)
        sums = panel_sums(edges)
        total += sums.sum() + closed_series(sums, "infinity")
    return n * body.volume() * float(total)


def alpha_np(n: int, p: float, spec: QuadratureSpec | None = None, directions: int = 8, tol: float = 1e-8) -> float:
    """Isotropic constant with ||v||^p of the polar L_p moment body of B_n = alpha*|v|^p.

    Checks rotation invariance on randomly drawn unit directions.
    """
    if n not in (1, 2, 3):
        raise ValueError("n must be 1, 2 or 3")
    if not p >= 1:
        raise ValueError("p must be >= 1")
    spec = spec or QuadratureSpec()
    ball = ConvexBody.ball(n)
    e1 = np.eye(n)[0]
    alpha = lp_moment_norm(ball, e1, p, spec) ** p
    rng = np.random.default_rng(spec.seed)
    u = rng.standard_normal((directions, n))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    dev = np.abs(lp_moment_norm(ball, u, p, spec) ** p - alpha) / alpha
    if dev.max() > tol:
        raise ValueError(f"moment norm of the ball is direction dependent (deviation {dev.max():.2e})")
    return float(alpha)
