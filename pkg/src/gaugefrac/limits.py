"""Extrapolate scaled seminorms to s -> 1- and s -> 0+ and compare with the
limit formulas.

BBM mode scales by (1 - s) and extrapolates in the gap 1 - s; the limit of the
anisotropic seminorm is (2/p) int ||grad f||^p of the polar L_p moment body
norm. MS mode scales by s; the limit is (2n/p) Vol(K) |f|_p^p.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from gaugefrac.bodies import BodyNormHandle, ConvexBody
from gaugefrac.functions import TestFunction, anisotropic_sobolev_seminorm, lp_norm
from gaugefrac.quadrature import QuadratureSpec
from gaugefrac.seminorm import gagliardo_1d, seminorm_direct, seminorm_via_bp

BBM_LADDER = (0.90, 0.95, 0.975, 0.99)
MS_LADDER = (0.10, 0.05, 0.025, 0.0125)
TOL_1D = 0.02
TOL_ND = 0.05
MODELS = {"linear_in_gap": 1, "quadratic_in_gap": 2}
# A fit residual below this fraction of the pass band never invalidates a fit,
# however small the per-sample errors are.
RESIDUAL_FLOOR = 0.01


@dataclass
class ConvergenceReport:
    mode: str
    method: str
    samples: list  # (s, scaled_value, std_error), sorted by s
    fitted_limit: float
    fit_residual: float
    model: str
    target: float
    target_provenance: str
    rel_error: float
    tolerance: float
    verdict: str
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "method": self.method,
            "samples": [list(map(float, row)) for row in self.samples],
            "fitted_limit": self.fitted_limit,
            "fit_residual": self.fit_residual,
            "model": self.model,
            "target": self.target,
            "target_provenance": self.target_provenance,
            "rel_error": self.rel_error,
            "tolerance": self.tolerance,
            "verdict": self.verdict,
            "details": self.details,
        }

    def csv_rows(self) -> list[dict]:
        return [
            {"s": s, "scaled_value": v, "std_error": e, "method": self.method}
            for s, v, e in self.samples
        ]


def fit_limit(samples, mode: str, model: str = "quadratic_in_gap") -> tuple[float, float]:
    """Least-squares polynomial in the gap variable; returns (limit, max |residual|)."""
    s = np.array([row[0] for row in samples])
    y = np.array([row[1] for row in samples])
    gap = 1.0 - s if mode == "bbm" else s
    deg = MODELS[model]
    if len(s) < deg + 1:
        raise ValueError(f"model {model} needs at least {deg + 1} samples")
    design = np.vander(gap, deg + 1, increasing=True)
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    return float(coef[0]), float(np.max(np.abs(resid)))


def _check_ladder(s_list, mode: str):
    s_list = sorted(float(s) for s in s_list)
    if len(s_list) < 3:
        raise ValueError("at least 3 values of s are needed to extrapolate")
    if any(not 0.0 < s < 1.0 for s in s_list):
        raise ValueError("s must lie in (0,1)")
    return s_list


def _report(mode, method, estimates, target, provenance, tol, model, details) -> ConvergenceReport:
    scale = (lambda s: 1.0 - s) if mode == "bbm" else (lambda s: s)
    samples = sorted((e.s, scale(e.s) * e.value, scale(e.s) * e.std_error) for e in estimates)
    limit, resid = fit_limit(samples, mode, model)
    rel = abs(limit - target) / abs(target)
    noise = max(row[2] for row in samples)
    floor = RESIDUAL_FLOOR * tol * abs(limit)
    if resid > max(10.0 * noise, floor):
        verdict = "inconclusive"
    else:
        verdict = "pass" if rel <= tol else "fail"
    return ConvergenceReport(mode, method, samples, limit, resid, model, target, provenance, rel, tol, verdict, details)


def _sub_fit(mode, estimates, target, model):
    scale = (lambda s: 1.0 - s) if mode == "bbm" else (lambda s: s)
    samples = sorted((e.s, scale(e.s) * e.value, scale(e.s) * e.std_error) for e in estimates)
    limit, resid = fit_limit(samples, mode, model)
    return {
        "samples": [list(row) for row in samples],
        "fitted_limit": limit,
        "fit_residual": resid,
        "rel_error": abs(limit - target) / abs(target),
    }


def verify_bbm_1d(g: TestFunction, p: float, s_list=BBM_LADDER, spec=None, model="quadratic_in_gap", tol=TOL_1D):
    """(1 - s) * 1D seminorm -> (2/p) int |g'|^p."""
    spec = spec or QuadratureSpec()
    s_list = _check_ladder(s_list, "bbm")
    if g.dim != 1:
        raise ValueError("verify_bbm_1d needs a one-dimensional function")
    energy = anisotropic_sobolev_seminorm(g, p, BodyNormHandle.euclidean(1), spec)
    target = 2.0 / p * energy
    est = [gagliardo_1d(g, s, p, spec) for s in s_list]
    prov = f"(2/p) * int |g'|^p with int |g'|^p = {energy!r} (analytic profile integral)"
    return _report("bbm", "one_d", est, target, prov, tol, model, {"fn_digest": g.digest, "spec_digest": spec.digest})


def verify_ms_1d(g: TestFunction, p: float, s_list=MS_LADDER, spec=None, model="quadratic_in_gap", tol=TOL_1D):
    """s * 1D seminorm -> (4/p) |g|_p^p."""
    spec = spec or QuadratureSpec()
    s_list = _check_ladder(s_list, "ms")
    if g.dim != 1:
        raise ValueError("verify_ms_1d needs a one-dimensional function")
    mass = lp_norm(g, p, spec) ** p
    target = 4.0 / p * mass
    est = [gagliardo_1d(g, s, p, spec) for s in s_list]
    prov = f"(4/p) * |g|_p^p with |g|_p^p = {mass!r} (analytic profile integral)"
    return _report("ms", "one_d", est, target, prov, tol, model, {"fn_digest": g.digest, "spec_digest": spec.digest})


def bbm_target(f: TestFunction, body: ConvexBody, p: float, spec: QuadratureSpec | None = None) -> dict:
    """Limit of (1 - s) times the anisotropic seminorm, with its ingredients.

    The limit is (2/p) int ||grad f||^p where ||v||^p = (n+p)/2 int_K |v.x|^p dx.
    Also returns the energy in the gauge of K* for comparison.
    """
    spec = spec or QuadratureSpec()
    moment = BodyNormHandle(body, "lp_moment_polar", p, spec)
    energy = anisotropic_sobolev_seminorm(f, p, moment, spec)
    naive = anisotropic_sobolev_seminorm(f, p, BodyNormHandle(body, "polar_gauge"), spec)
    out = {"target": 2.0 / p * energy, "moment_energy": energy, "polar_gauge_energy": naive}
    if f.dim == 1:
        # the 1D route: K = [-w, w] rescales the Euclidean kernel by w^{1+ps}
        w = 1.0 / float(body.gauge(np.ones(1)))
        euclid = anisotropic_sobolev_seminorm(f, p, BodyNormHandle.euclidean(1), spec)
        out["one_d_target"] = w ** (1 + p) * 2.0 / p * euclid
    return out


def verify_bbm_limit(
    f: TestFunction,
    body: ConvexBody,
    p: float,
    s_list=BBM_LADDER,
    spec=None,
    model="quadratic_in_gap",
    tol=None,
    with_bp: bool = True,
):
    """(1 - s) * anisotropic seminorm -> (2/p) int ||grad f||^p in the polar L_p moment body norm."""
    spec = spec or QuadratureSpec()
    s_list = _check_ladder(s_list, "bbm")
    tol = (TOL_1D if f.dim == 1 else TOL_ND) if tol is None else tol
    info = bbm_target(f, body, p, spec)
    target = info["target"]
    est = [seminorm_direct(f, body, s, p, spec) for s in s_list]
    details = {"fn_digest": f.digest, "body_digest": body.digest, "spec_digest": spec.digest, **info}
    if with_bp and f.dim >= 2:
        details["bp"] = _sub_fit("bbm", [seminorm_via_bp(f, body, s, p, spec) for s in s_list], target, model)
    prov = (
        f"(2/p) * int ||grad f||^p in the polar L_{p:g} moment body norm of the {body.kind} "
        f"(energy {info['moment_energy']!r}); moment norms by {'Monte Carlo' if body.kind == 'sym_polytope' else 'closed form/quadrature'}"
    )
    return _report("bbm", "direct", est, target, prov, tol, model, details)


def verify_ms_limit(
    f: TestFunction,
    body: ConvexBody,
    p: float,
    s_list=MS_LADDER,
    spec=None,
    model="quadratic_in_gap",
    tol=None,
    with_bp: bool = True,
):
    """s * anisotropic seminorm -> (2n/p) Vol(K) |f|_p^p."""
    spec = spec or QuadratureSpec()
    s_list = _check_ladder(s_list, "ms")
    tol = (TOL_1D if f.dim == 1 else TOL_ND) if tol is None else tol
    n = f.dim
    vol = body.volume()
    mass = lp_norm(f, p, spec) ** p
    target = 2.0 * n / p * vol * mass
    est = [seminorm_direct(f, body, s, p, spec) for s in s_list]
    details = {"fn_digest": f.digest, "body_digest": body.digest, "spec_digest": spec.digest, "volume": vol, "lp_mass": mass}
    if with_bp and n >= 2:
        details["bp"] = _sub_fit("ms", [seminorm_via_bp(f, body, s, p, spec) for s in s_list], target, model)
    prov = f"(2n/p) * Vol(K) * |f|_p^p with Vol(K) = {vol!r}, |f|_p^p = {mass!r}"
    return _report("ms", "direct", est, target, prov, tol, model, details)
