"""Warped-product and conformally flat metric models, and numerical checks of
the admissibility conditions on the radius function.

A warped product end carries the metric ``dr^2 + f(r) h`` with
``f = exp(2 phi)``.  All geometric quantities needed downstream reduce to the
profile ``phi`` and its first two derivatives:

* Hessian of ``r^2``: eigenvalue 2 radially, ``2 r phi'`` on the angular block;
* ``lap r^2 = 2 + 2 (d-1) r phi'``, ``lap r = (d-1) phi'``,
  ``d(lap r)/dr = (d-1) phi''``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline

from .errors import DomainError, QuadratureError
from .fitting import DecayFit, fit_decay

# Condition 1.2 is stated for delta in (0, 1]; the radial Hessian eigenvalue is
# exactly 2, so no warped metric can do better than delta = 1.
DELTA_CAP = 1.0
# kappa is taken in (0, 1/2); the trace and mean-curvature forms only agree there.
KAPPA_CAP = 0.5
ETA_CAP = 1.0
FIT_RESIDUAL_MAX = 0.1
EVAL_TOL = 1e-12


def japanese(r):
    """``<r> = sqrt(1 + r^2)``."""
    r = np.asarray(r, dtype=float)
    return np.sqrt(1.0 + r * r)


# --------------------------------------------------------------------------
# radial profiles


class _ClosedForm:
    exact_second_derivative = True
    spline_order = None

    def __init__(self, phi, dphi, d2phi, d_rphi, rphi_m1):
        self._phi, self._dphi, self._d2phi, self._d_rphi = phi, dphi, d2phi, d_rphi
        self._rphi_m1 = rphi_m1

    def phi(self, r):
        return self._phi(r)

    def dphi(self, r):
        return self._dphi(r)

    def d2phi(self, r):
        return self._d2phi(r)

    def d_rphi(self, r):
        return self._d_rphi(r)

    def rphi_m1(self, r):
        """``r phi' - 1`` without cancellation near the pole."""
        return self._rphi_m1(r)


def _f1(mu):
    # f = r^2 <r>^{2 mu};  r phi' = 1 + mu r^2/<r>^2
    def phi(r):
        return np.log(r) + 0.5 * mu * np.log1p(r * r)

    def dphi(r):
        return 1.0 / r + mu * r / (1.0 + r * r)

    def d2phi(r):
        return -1.0 / (r * r) + mu * (1.0 - r * r) / (1.0 + r * r) ** 2

    def d_rphi(r):
        return 2.0 * mu * r / (1.0 + r * r) ** 2

    def rphi_m1(r):
        return mu * r * r / (1.0 + r * r)

    return _ClosedForm(phi, dphi, d2phi, d_rphi, rphi_m1)


def _f2(nu):
    # f = r^2 e^{-2} exp(2 <r>^nu);  r phi' = 1 + nu r^2 <r>^{nu-2}
    def phi(r):
        return np.log(r) - 1.0 + japanese(r) ** nu

    def dphi(r):
        return 1.0 / r + nu * r * japanese(r) ** (nu - 2.0)

    def d2phi(r):
        jr = japanese(r)
        return -1.0 / (r * r) + nu * jr ** (nu - 2.0) + nu * (nu - 2.0) * r * r * jr ** (nu - 4.0)

    def d_rphi(r):
        return nu * r * japanese(r) ** (nu - 4.0) * (2.0 + nu * r * r)

    def rphi_m1(r):
        return nu * r * r * japanese(r) ** (nu - 2.0)

    return _ClosedForm(phi, dphi, d2phi, d_rphi, rphi_m1)


class _Tabulated:
    """Cubic-spline profile through sampled ``(r, phi(r))``."""

    exact_second_derivative = False
    spline_order = 3

    def __init__(self, r, phi):
        self._spline = CubicSpline(r, phi, bc_type="not-a-knot")
        self._d1 = self._spline.derivative(1)
        self._d2 = self._spline.derivative(2)

    def phi(self, r):
        return self._spline(r)

    def dphi(self, r):
        return self._d1(r)

    def d2phi(self, r):
        return self._d2(r)

    def d_rphi(self, r):
        r = np.asarray(r, dtype=float)
        return self._d1(r) + r * self._d2(r)

    def rphi_m1(self, r):
        return np.asarray(r, dtype=float) * self._d1(r) - 1.0


class _CallableProfile:
    exact_second_derivative = True
    spline_order = None

    def __init__(self, phi, dphi, d2phi):
        self.phi, self.dphi, self.d2phi = phi, dphi, d2phi

    def d_rphi(self, r):
        r = np.asarray(r, dtype=float)
        return self.dphi(r) + r * self.d2phi(r)

    def rphi_m1(self, r):
        return np.asarray(r, dtype=float) * self.dphi(r) - 1.0


FAMILIES = {
    "euclidean": {
        "n_params": 0,
        "doc": "f(r) = r^2, flat space; same as f1 with mu = 0",
    },
    "f1": {
        "n_params": 1,
        "doc": "f(r) = r^2 <r>^{2 mu}; the convexity condition with constant delta holds iff μ ≥ (δ−1)/2",
    },
    "f2": {
        "n_params": 1,
        "doc": "f(r) = r^2 e^{-2} exp(2 <r>^nu); the decay bound on d(lap r^2) with constant kappa needs 0 ≤ ν ≤ 1/2−κ",
    },
    "delta0": {
        "n_params": 0,
        "doc": "f(r) = r^2 <r>^{-1} (f1 with mu = -1/2), borderline delta = 0",
    },
    "kappa0": {
        "n_params": 0,
        "doc": "f(r) = r^2 e^{-2} e^{2 sqrt<r>} (f2 with nu = 1/2), borderline kappa = 0",
    },
    "conformal": {
        "n_params": 4,
        "doc": "metric -2V dz^2 with V(z) = -a <z>^{-mu}, params (a, A, mu, sigma); "
        "admissible when 1 + delta <= inf h",
    },
    "table": {
        "n_params": None,
        "doc": "sampled (r, phi(r)) with cubic-spline derivatives",
    },
}


@dataclass(frozen=True)
class WarpedMetric:
    """Metric ``dr^2 + exp(2 phi(r)) h`` on ``(0, r_max] x S``.

    Use :func:`build_warped` or :func:`warped_from_table` rather than the
    constructor.
    """

    d: int
    r_max: float
    family: str
    params: tuple
    profile: object = field(repr=False, compare=False)
    pole_regular: bool = True

    @property
    def second_derivative_exact(self):
        return self.profile.exact_second_derivative

    def check_domain(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(~(r > 0)) or np.any(r > self.r_max * (1 + 1e-12)):
            raise DomainError(f"radius outside (0, {self.r_max}]")
        return r

    def phi(self, r):
        return self.profile.phi(self.check_domain(r))

    def dphi(self, r):
        return self.profile.dphi(self.check_domain(r))

    def d2phi(self, r):
        return self.profile.d2phi(self.check_domain(r))

    def d_rphi(self, r):
        """``(r phi')'``, which controls ``d(lap r^2)``."""
        return self.profile.d_rphi(self.check_domain(r))

    def f(self, r):
        with np.errstate(over="ignore"):
            return np.exp(2.0 * self.phi(r))

    def inv_f(self, r):
        with np.errstate(under="ignore"):
            return np.exp(-2.0 * self.phi(r))

    def f_ratio(self, r_num, r_den):
        """``f(r_num) / f(r_den)`` without forming either factor."""
        return np.exp(2.0 * (self.phi(r_num) - self.phi(r_den)))


def build_warped(family, params=(), d=3, r_max=1e4, pole_regular=True):
    """Construct a builtin warped-product metric.

    Families: ``euclidean``, ``f1`` (mu), ``f2`` (nu), and the borderline
    densities ``delta0`` and ``kappa0``.
    """
    params = tuple(float(p) for p in params)
    if family not in FAMILIES or family in ("table", "conformal"):
        raise DomainError(f"unknown metric family {family!r}")
    if d < 2:
        raise DomainError("dimension must be at least 2")
    if not r_max > 0:
        raise DomainError("r_max must be positive")
    expected = FAMILIES[family]["n_params"]
    if len(params) != expected:
        raise DomainError(f"family {family!r} takes {expected} parameter(s), got {len(params)}")
    if not all(np.isfinite(params)):
        raise DomainError("parameters must be finite")

    if family == "euclidean":
        profile = _f1(0.0)
    elif family == "f1":
        profile = _f1(params[0])
    elif family == "f2":
        profile = _f2(params[0])
    elif family == "delta0":
        profile = _f1(-0.5)
    else:
        profile = _f2(0.5)
    metric = WarpedMetric(int(d), float(r_max), family, params, profile, bool(pole_regular))
    _check_pole(metric, min(1e-4, 1e-3 * r_max))
    return metric


def warped_from_table(r, phi, d=3, pole_regular=False):
    """Warped metric from a sampled profile; derivatives come from a cubic spline.

    The second derivative of a cubic spline is only piecewise linear, so the
    returned metric reports ``second_derivative_exact = False``.
    """
    r = np.asarray(r, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if r.ndim != 1 or r.shape != phi.shape or r.size < 4:
        raise DomainError("table needs at least 4 matching (r, phi) samples")
    if np.any(r <= 0) or np.any(np.diff(r) <= 0):
        raise DomainError("table radii must be positive and strictly increasing")
    if not np.all(np.isfinite(phi)):
        raise DomainError("table phi values must be finite (f must be positive)")
    profile = _Tabulated(r, phi)
    metric = WarpedMetric(int(d), float(r[-1]), "table", (), profile, bool(pole_regular))
    if d < 2:
        raise DomainError("dimension must be at least 2")
    _check_pole(metric, float(r[0]))
    return metric


def _check_pole(metric, r_small):
    if not metric.pole_regular:
        return
    ratio = float(np.exp(2.0 * metric.profile.phi(np.array(r_small))) / r_small**2)
    if abs(ratio - 1.0) >= 0.01:
        raise DomainError(f"pole_regular set but r^-2 f(r) = {ratio:.6g} at r = {r_small:.3g}")


# --------------------------------------------------------------------------
# potentials


POTENTIALS = {
    "zero": {"n_params": 0, "doc": "V = 0"},
    "power": {"n_params": 2, "doc": "V = c <r>^{-p}; short range (eta = p - 1 > 0) when p > 1"},
    "coulomb": {"n_params": 1, "doc": "V = c <r>^{-1}, the eta = 0 borderline"},
}


@dataclass(frozen=True)
class RadialPotential:
    kind: str
    params: tuple
    func: Callable = field(repr=False, compare=False)
    decay_exponent_hint: float | None = None

    def __call__(self, r):
        return self.func(np.asarray(r, dtype=float))

    @property
    def is_zero(self):
        return self.kind == "zero"


def build_potential(kind="zero", params=()):
    params = tuple(float(p) for p in params)
    if kind not in POTENTIALS:
        raise DomainError(f"unknown potential kind {kind!r}")
    if len(params) != POTENTIALS[kind]["n_params"]:
        raise DomainError(f"potential {kind!r} takes {POTENTIALS[kind]['n_params']} parameter(s)")
    if kind == "zero":
        return RadialPotential(kind, params, lambda r: np.zeros_like(r), None)
    if kind == "coulomb":
        c, p = params[0], 1.0
    else:
        c, p = params
    return RadialPotential(kind, params, lambda r: c * japanese(r) ** (-p), p - 1.0)


# --------------------------------------------------------------------------
# pointwise quantities


def hessian_r2(metric, r):
    """Eigenvalues of the Hessian of ``r^2`` relative to ``g``: radial, angular."""
    r = metric.check_domain(r)
    radial = np.full_like(r, 2.0) if r.ndim else 2.0
    angular = 2.0 * r * metric.dphi(r)
    return radial, angular


def laplacian_quantities(metric, r):
    """Return ``(lap r^2, lap r, d(lap r)/dr)`` at ``r``."""
    r = metric.check_domain(r)
    dphi = metric.dphi(r)
    k = metric.d - 1
    return 2.0 + 2.0 * k * r * dphi, k * dphi, k * metric.d2phi(r)


# --------------------------------------------------------------------------
# condition checks


@dataclass(frozen=True)
class ConditionReport:
    delta_star: float
    kappa_star: float
    eta_star: float
    r0: float
    grid: np.ndarray = field(repr=False)
    violations: tuple
    passed: dict
    requested: tuple
    kappa_fit: DecayFit | None = None
    kappa_from_dlap: float | None = None
    eta_fit: DecayFit | None = None
    kappa_raw: float = float("nan")
    eta_raw: float = float("nan")
    min_two_r_phi_prime: float = float("nan")
    two_r_phi_prime: np.ndarray = field(default=None, repr=False)
    lap_r: np.ndarray = field(default=None, repr=False)
    d_lap_r: np.ndarray = field(default=None, repr=False)
    potential: np.ndarray = field(default=None, repr=False)
    warnings: tuple = ()

    @property
    def all_passed(self):
        return all(self.passed.values())

    def rows(self):
        """Per-radius diagnostic records."""
        return [
            {"r": r, "two_r_phi_prime": a, "lap_r": b, "d_lap_r": c, "V": v}
            for r, a, b, c, v in zip(
                self.grid, self.two_r_phi_prime, self.lap_r, self.d_lap_r, self.potential
            )
        ]

    def summary(self):
        return {
            "delta_star": self.delta_star,
            "kappa_star": self.kappa_star,
            "eta_star": self.eta_star,
            "r0": self.r0,
            "kappa_residual": None if self.kappa_fit is None else self.kappa_fit.residual,
            "kappa_constant": None if self.kappa_fit is None else self.kappa_fit.constant,
            "kappa_from_dlap": self.kappa_from_dlap,
            "eta_residual": None if self.eta_fit is None else self.eta_fit.residual,
            "requested": list(self.requested),
            "passed_delta": self.passed["delta"],
            "passed_kappa": self.passed["kappa"],
            "passed_eta": self.passed["eta"],
            "n_violations": len(self.violations),
            "warnings": list(self.warnings),
        }


def probe_grid(r_min=0.1, r_max=1e4, points=200):
    return np.geomspace(r_min, r_max, int(points))


def _upper_half(grid):
    lg = np.log(grid)
    return grid[lg >= 0.5 * (lg[0] + lg[-1])]


def _tail_exponent(x, values, offset, cap):
    """Fit ``|values| ~ C <x>^{-p}`` on the upper log-half; return (p - offset capped, raw, fit)."""
    upper = _upper_half(x)
    sel = x >= upper[0]
    v = np.abs(np.asarray(values, dtype=float)[sel])
    jx = japanese(x[sel])
    # exact zeros mean no decay constraint at all
    positive = v > 1e-300
    if np.count_nonzero(positive) < 4:
        return cap, float("inf"), None
    fit = fit_decay(jx, v)
    raw = fit.exponent - offset
    return min(raw, cap), raw, fit


def check_conditions(metric, V=None, probe=None, requested=(0.0, 0.0, 0.0), tol=EVAL_TOL):
    """Best constants for the convexity, curvature-decay and potential-decay
    conditions on a probe grid, plus pass/fail against ``requested``.

    Parameters
    ----------
    metric : WarpedMetric
    V : RadialPotential, optional
        Defaults to the zero potential.
    probe : array_like, optional
        Strictly increasing radii inside ``(0, r_max]``. Defaults to a
        geometric grid from 0.1 to ``r_max``.
    requested : (delta, kappa, eta)
    tol : float
        Slack subtracted from each best constant before comparing; the
        default absorbs rounding in evaluating the profile derivatives.
    """
    if V is None:
        V = build_potential("zero")
    if probe is None:
        probe = probe_grid(min(0.1, metric.r_max / 10), metric.r_max)
    grid = np.asarray(probe, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise DomainError("probe grid is empty")
    if np.any(np.diff(grid) <= 0):
        raise DomainError("probe grid must be strictly increasing")
    metric.check_domain(grid)
    delta, kappa, eta = (float(x) for x in requested)

    radial, angular = hessian_r2(metric, grid)
    lap_r2, lap_r, d_lap_r = laplacian_quantities(metric, grid)
    vals = V(grid)
    lowest = np.minimum(radial, angular)
    delta_star = float(np.min(lowest) - 1.0)

    holds = lowest >= 1.0 + delta - tol
    violations = tuple(float(r) for r in grid[~holds])
    if holds[-1]:
        bad = np.nonzero(~holds)[0]
        r0 = float(grid[0] if bad.size == 0 else grid[bad[-1] + 1])
    else:
        r0 = float("nan")

    kappa_star, kappa_raw, kappa_fit = _tail_exponent(grid, metric.d_rphi(grid), 0.5, KAPPA_CAP)
    kappa_alt, _, _ = _tail_exponent(grid, d_lap_r, 1.5, KAPPA_CAP)
    eta_star, eta_raw, eta_fit = _tail_exponent(grid, vals, 1.0, ETA_CAP)

    kappa_ok = kappa_star >= kappa - tol and (
        kappa_fit is None or kappa_fit.residual < FIT_RESIDUAL_MAX
    )
    eta_ok = eta_star >= eta - tol and (eta_fit is None or eta_fit.residual < FIT_RESIDUAL_MAX)
    warnings = []
    if not metric.second_derivative_exact:
        warnings.append("second derivatives from cubic spline; kappa is approximate")

    return ConditionReport(
        delta_star=delta_star,
        kappa_star=float(kappa_star),
        eta_star=float(eta_star),
        r0=r0,
        grid=grid,
        violations=violations,
        passed={"delta": bool(delta_star >= delta - tol), "kappa": bool(kappa_ok), "eta": bool(eta_ok)},
        requested=(delta, kappa, eta),
        kappa_fit=kappa_fit,
        kappa_from_dlap=float(kappa_alt),
        eta_fit=eta_fit,
        kappa_raw=float(kappa_raw),
        eta_raw=float(eta_raw),
        min_two_r_phi_prime=float(np.min(angular)),
        two_r_phi_prime=angular,
        lap_r=lap_r,
        d_lap_r=d_lap_r,
        potential=vals,
        warnings=tuple(warnings),
    )


# --------------------------------------------------------------------------
# conformally flat construction

_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


@dataclass(frozen=True)
class ConformalModel:
    """Radial conformal metric ``-2 V dz^2`` pulled back to geodesic polar form.

    In the geodesic radius ``rho`` the metric is ``d rho^2 + rho^2 F(rho)^2 dsigma^2``
    with ``F(rho) = sqrt(-2V(r)) r / rho``.
    """

    params: tuple
    V: Callable = field(repr=False)
    dV: Callable = field(repr=False)
    d2V: Callable = field(repr=False)
    knots_r: np.ndarray = field(repr=False)
    knots_rho: np.ndarray = field(repr=False)
    grid: np.ndarray = field(repr=False)
    h_values: np.ndarray = field(repr=False)
    delta_inferred: float
    bounds_ok: bool = True
    sigma_ok: bool = True

    @property
    def r_limit(self):
        return float(self.knots_r[-1])

    def sqrt_m2v(self, r):
        return np.sqrt(-2.0 * self.V(r))

    def rho(self, r):
        """``rho(r) = int_0^r sqrt(-2 V(s)) ds``."""
        r = np.asarray(r, dtype=float)
        if np.any(r < 0) or np.any(r > self.r_limit * (1 + 1e-12)):
            raise DomainError(f"r outside [0, {self.r_limit}] for rho")
        k = np.clip(np.searchsorted(self.knots_r, r, side="right") - 1, 0, self.knots_r.size - 1)
        a = self.knots_r[k]
        half = 0.5 * (r - a)
        nodes = a[..., None] + half[..., None] * (_GL_X + 1.0)
        seg = half * np.sum(_GL_W * self.sqrt_m2v(nodes), axis=-1)
        return self.knots_rho[k] + seg

    def r_of_rho(self, rho):
        """Inverse of :meth:`rho` by bisection (64 halvings inside a knot cell)."""
        rho = np.asarray(rho, dtype=float)
        if np.any(rho < 0) or np.any(rho > self.knots_rho[-1] * (1 + 1e-12)):
            raise DomainError("rho outside the tabulated range")
        k = np.clip(np.searchsorted(self.knots_rho, rho, side="right") - 1, 0, self.knots_r.size - 2)
        lo = self.knots_r[k].copy()
        hi = self.knots_r[k + 1].copy()
        for _ in range(64):
            mid = 0.5 * (lo + hi)
            above = self.rho(mid) > rho
            hi = np.where(above, mid, hi)
            lo = np.where(above, lo, mid)
            if np.all(hi - lo <= 1e-10 * np.maximum(1.0, hi)):
                break
        return 0.5 * (lo + hi)

    def f_of_rho(self, rho):
        rho = np.asarray(rho, dtype=float)
        r = self.r_of_rho(rho)
        return self.sqrt_m2v(r) * r / rho

    def h(self, r):
        r = np.asarray(r, dtype=float)
        V = self.V(r)
        integral = self.rho(r) / np.sqrt(2.0)
        return (2.0 + r * self.dV(r) / V) * integral / (np.sqrt(-V) * r)

    def as_warped(self, d=3):
        """Warped metric with density ``rho^2 F(rho)^2`` in the geodesic radius."""
        model = self

        def parts(rho):
            r = model.r_of_rho(rho)
            V, dV, d2V = model.V(r), model.dV(r), model.d2V(r)
            g = np.sqrt(-2.0 * V)
            a = dV / (2.0 * V) + 1.0 / r
            da = d2V / (2.0 * V) - dV**2 / (2.0 * V**2) - 1.0 / r**2
            dg = -dV / g
            return r, g, a, da, dg

        def phi(rho):
            r, g, *_ = parts(rho)
            return np.log(g * r)

        def dphi(rho):
            _, g, a, _, _ = parts(rho)
            return a / g

        def d2phi(rho):
            _, g, a, da, dg = parts(rho)
            return (da / g - a * dg / g**2) / g

        profile = _CallableProfile(phi, dphi, d2phi)
        return WarpedMetric(int(d), float(self.knots_rho[-1]), "conformal", self.params, profile, True)


def _power_potential(a, mu):
    def V(r):
        return -a * japanese(r) ** (-mu)

    def dV(r):
        return a * mu * r * japanese(r) ** (-mu - 2.0)

    def d2V(r):
        jr = japanese(r)
        return a * mu * (jr ** (-mu - 2.0) - (mu + 2.0) * r * r * jr ** (-mu - 4.0))

    return V, dV, d2V


def conformal_build(V_params, probe):
    """Conformal model for ``V(z) = -a <z>^{-mu}`` with params ``(a, A, mu, sigma)``.

    ``A`` and ``sigma`` are the constants of the two-sided bound and of the
    virial-type bound; they are checked, not used in the construction.
    """
    a, A, mu, sigma = (float(x) for x in V_params)
    if not a > 0:
        raise DomainError("a must be positive (V strictly negative)")
    if not mu < 2:
        raise DomainError("mu must be < 2")
    V, dV, d2V = _power_potential(a, mu)
    grid = np.asarray(probe, dtype=float)
    model = conformal_from_potential(V, dV, d2V, grid, params=(a, A, mu, sigma))
    bounds_ok = A >= a
    sigma_ok = bool(sigma > 0 and np.all(2.0 - mu * grid**2 / (1.0 + grid**2) >= sigma))
    return replace(model, bounds_ok=bounds_ok, sigma_ok=sigma_ok)


def conformal_from_potential(V, dV, d2V, probe, params=()):
    """Conformal model for an arbitrary negative radial function with derivatives."""
    grid = np.asarray(probe, dtype=float)
    if grid.ndim != 1 or grid.size == 0 or np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise DomainError("probe grid must be positive and strictly increasing")
    if np.any(V(grid) >= 0):
        raise DomainError("V must be strictly negative on the probe grid")
    r_lo = min(1e-3, grid[0] / 2)
    r_hi = grid[-1] * 1.01
    m = int(np.ceil(np.log(r_hi / r_lo) / np.log(1.1))) + 1
    knots = np.concatenate([[0.0], np.geomspace(r_lo, r_hi, m)])
    if np.any(V(knots) >= 0):
        raise DomainError("V must be strictly negative on [0, r_max]")

    def integrand(s):
        return np.sqrt(-2.0 * V(s))

    pieces = np.empty(knots.size - 1)
    for i in range(knots.size - 1):
        val, err = integrate.quad(integrand, knots[i], knots[i + 1], epsabs=0.0, epsrel=1e-13, limit=200)
        if not np.isfinite(val) or err > 1e-9 * max(abs(val), 1e-300):
            raise QuadratureError(f"rho quadrature failed on [{knots[i]}, {knots[i + 1]}]")
        pieces[i] = val
    knots_rho = np.concatenate([[0.0], np.cumsum(pieces)])
    if np.any(np.diff(knots_rho) <= 0):
        raise QuadratureError("rho is not strictly increasing")

    model = ConformalModel(
        params=tuple(params),
        V=V,
        dV=dV,
        d2V=d2V,
        knots_r=knots,
        knots_rho=knots_rho,
        grid=grid,
        h_values=np.empty(0),
        delta_inferred=float("nan"),
    )
    hv = model.h(grid)
    return replace(model, h_values=hv, delta_inferred=float(np.min(hv) - 1.0))
