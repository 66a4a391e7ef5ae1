"""Reduced geodesic dynamics on warped ends and the classical propagation
estimates built on the comparison phase ``K(t, r) = r^2 / (2t)``.

A geodesic moving in a totally geodesic plane of the end is described by the
radius ``r``, its conjugate momentum ``xi_r``, the arc-length angle ``theta``
along a great circle of the base, and the conserved angular momentum ``ell``::

    r' = xi_r,   xi_r' = ell^2 phi'(r) / f(r),   theta' = ell / f(r),

with energy ``h0 = (xi_r^2 + ell^2 / f(r)) / 2``.  Trajectories are
parametrized by ``t >= 1`` so that the dilation flow is the identity at the
starting time.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DomainError, IntegrationError
from .fitting import DecayFit, fit_decay

logger = logging.getLogger(__name__)

R_FLOOR = 1e-6
DEFAULT_RTOL = 1e-12


@dataclass(frozen=True)
class ClassicalState:
    r: float
    xi_r: float
    theta: float
    ell: float

    def energy(self, metric):
        return 0.5 * (self.xi_r**2 + self.ell**2 * float(metric.inv_f(self.r)))


@dataclass(frozen=True)
class GeodesicTrajectory:
    """Sampled solution of the reduced geodesic equations."""

    t_grid: np.ndarray = field(repr=False)
    r: np.ndarray = field(repr=False)
    xi_r: np.ndarray = field(repr=False)
    theta: np.ndarray = field(repr=False)
    ell: float
    h0: np.ndarray = field(repr=False)
    energy_drift: float
    status: str
    metric: object = field(repr=False, compare=False)

    @property
    def escaping(self):
        return self.status == "escaping"

    @property
    def energy(self):
        return float(self.h0[0])

    def states(self):
        return [ClassicalState(*v, self.ell) for v in zip(self.r, self.xi_r, self.theta)]

    def w(self):
        return w_quantity(self.metric, self.t_grid, self.r, self.xi_r, self.ell)

    def d2r2_ratio(self):
        """``(d^2/dt^2 r^2) / (2 h0)`` from the equations of motion."""
        d2 = 2.0 * self.xi_r**2 + 2.0 * self.r * self.ell**2 * self.metric.dphi(self.r) * self.metric.inv_f(self.r)
        return d2 / (2.0 * self.h0[0])


def _rhs(metric, ell):
    prof = metric.profile
    ell2 = ell * ell

    def rhs(t, y):
        r = np.array(max(y[0], R_FLOOR))
        inv_f = float(np.exp(-2.0 * prof.phi(r)))
        return [y[1], ell2 * float(prof.dphi(r)) * inv_f, ell * inv_f]

    return rhs


def geodesic_integrate(metric, s0, t_grid, rtol=DEFAULT_RTOL, method="DOP853", r_floor=R_FLOOR):
    """Integrate the reduced geodesic equations from ``t_grid[0]`` through ``t_grid``.

    ``method`` is a :func:`scipy.integrate.solve_ivp` method, or ``"verlet"``
    for the fixed-step Stormer-Verlet cross-check (step ``min(diff(t_grid)) / 20``).

    A trajectory that reaches ``r_floor`` is returned truncated with
    ``status = "trapped"``.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size < 2 or np.any(np.diff(t_grid) <= 0):
        raise DomainError("t_grid must be strictly increasing with at least 2 points")
    if not s0.r > 0:
        raise DomainError("initial radius must be positive")
    metric.check_domain(s0.r)

    if method == "verlet":
        r, xi, theta, hit = _verlet(metric, s0, t_grid, r_floor)
        t_out = t_grid[: r.size]
    else:
        rhs = _rhs(metric, float(s0.ell))

        def hit_floor(t, y):
            return y[0] - r_floor

        hit_floor.terminal = True
        hit_floor.direction = -1

        def hit_rmax(t, y):
            return metric.r_max - y[0]

        hit_rmax.terminal = True
        hit_rmax.direction = -1

        sol = solve_ivp(
            rhs,
            (t_grid[0], t_grid[-1]),
            [s0.r, s0.xi_r, s0.theta],
            method=method,
            t_eval=t_grid,
            rtol=rtol,
            atol=1e-14,
            events=(hit_floor, hit_rmax),
        )
        if sol.status == -1:
            raise IntegrationError(f"geodesic integration failed: {sol.message}")
        hit = sol.t_events[0].size > 0
        if sol.t_events[1].size > 0:
            raise DomainError("trajectory left the metric domain (r > r_max); enlarge r_max")
        r, xi, theta = sol.y
        t_out = sol.t

    if t_out.size < 2:
        raise IntegrationError("trajectory hit the pole before the second sample")
    h0 = 0.5 * (xi**2 + s0.ell**2 * metric.inv_f(r))
    drift = float(np.max(np.abs(h0 - h0[0])))
    status = "trapped" if hit else ("escaping" if xi[-1] > 0 and r[-1] > r[0] else "bounded")
    return GeodesicTrajectory(t_out, r, xi, theta, float(s0.ell), h0, drift, status, metric)


def _verlet(metric, s0, t_grid, r_floor):
    ell, ell2 = float(s0.ell), float(s0.ell) ** 2
    steps_per = 20
    r, xi, th = float(s0.r), float(s0.xi_r), float(s0.theta)
    out = [(r, xi, th)]

    def force(r):
        return ell2 * float(metric.profile.dphi(np.array(r))) * float(np.exp(-2.0 * metric.profile.phi(np.array(r))))

    def omega(r):
        return ell * float(np.exp(-2.0 * metric.profile.phi(np.array(r))))

    hmin = float(np.min(np.diff(t_grid))) / steps_per
    for t0, t1 in zip(t_grid[:-1], t_grid[1:]):
        n = max(1, int(np.ceil((t1 - t0) / hmin)))
        h = (t1 - t0) / n
        for _ in range(n):
            xi_half = xi + 0.5 * h * force(r)
            th += 0.5 * h * omega(r)
            r = r + h * xi_half
            if r <= r_floor:
                return (*(np.array(c) for c in zip(*out)), True)
            th += 0.5 * h * omega(r)
            xi = xi_half + 0.5 * h * force(r)
        out.append((r, xi, th))
    r_arr, xi_arr, th_arr = (np.array(c) for c in zip(*out))
    return r_arr, xi_arr, th_arr, False


def flow_omega(t, r, theta):
    """Geodesic dilation about the pole: ``(r, theta) -> (r / t, theta)``."""
    t = np.asarray(t, dtype=float)
    r = np.asarray(r, dtype=float)
    if np.any(t <= 0) or np.any(r <= 0):
        raise DomainError("flow needs t > 0 and r > 0")
    return r / t, theta


def w_quantity(metric, t, r, xi_r, ell):
    """Kinetic energy relative to the outgoing comparison momentum ``r / t``."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise DomainError("t must be positive")
    r = np.asarray(r, dtype=float)
    return 0.5 * ((np.asarray(xi_r) - r / t) ** 2 + ell**2 * metric.inv_f(r))


def dilation_regularity(metric, t, r):
    """``g^{ij}(x) g_{kl}(omega) d_i omega^k d_j omega^l`` for the pole dilation,
    which in polar form is ``1/t^2 + (d-1) f(r/t) / f(r)``."""
    t = np.asarray(t, dtype=float)
    r = np.asarray(r, dtype=float)
    if np.any(t < 1):
        raise DomainError("dilation regularity is evaluated for t >= 1")
    metric.check_domain(r / t)
    return 1.0 / t**2 + (metric.d - 1) * metric.f_ratio(r / t, r)


@dataclass(frozen=True)
class AsymptoticPoint:
    r_lim: float
    theta_lim: float
    gaps: np.ndarray = field(repr=False)
    gap_times: np.ndarray = field(repr=False)
    gap_fit: DecayFit | None
    speed_ratio: float


def asymptotic_point(trajectory, window=None):
    """Limit of ``omega(t, x(t))`` along an escaping trajectory.

    Returns the value at the last sample, the metric lengths of successive
    increments of ``omega(t, x(t))`` and a power-law fit of those increments,
    and ``r_lim^2 / (2 h0)``.
    """
    if not trajectory.escaping:
        raise DomainError(f"trajectory is {trajectory.status}, not escaping, on the sampled window")
    t = trajectory.t_grid
    rho, theta = flow_omega(t, trajectory.r, trajectory.theta)
    mid = np.sqrt(rho[1:] * rho[:-1])
    gaps = np.sqrt(np.diff(rho) ** 2 + trajectory.metric.f(mid) * np.diff(theta) ** 2)
    gap_t = np.sqrt(t[1:] * t[:-1])
    fit = None
    if window is None:
        window = (gap_t[0], gap_t[-1])
    try:
        fit = fit_decay(gap_t, gaps, window)
    except DomainError:
        logger.info("too few nonzero Cauchy gaps to fit")
    r_lim = float(rho[-1])
    return AsymptoticPoint(r_lim, float(theta[-1]), gaps, gap_t, fit, r_lim**2 / (2.0 * trajectory.energy))


def uniform_times(t0, t1, n):
    return np.linspace(t0, t1, int(n))


def mourre_classical(trajectory):
    """Minimum over interior samples of ``(second difference of r^2) / (2 h0)``.

    Requires a uniformly spaced time grid with at least 3 samples.
    """
    t = trajectory.t_grid
    if t.size < 3:
        raise DomainError("need at least 3 samples")
    dt = np.diff(t)
    if np.max(np.abs(dt - dt[0])) > 1e-9 * max(abs(dt[0]), 1e-300) + 1e-12 * np.max(np.abs(t)):
        raise DomainError("Mourre check needs a uniform time grid")
    r2 = trajectory.r**2
    second = (r2[2:] - 2.0 * r2[1:-1] + r2[:-2]) / dt[0] ** 2
    return float(np.min(second) / (2.0 * trajectory.energy))


def log_derivative(t, values):
    """Discrete ``Delta ln(values) / Delta ln(t)`` between successive samples."""
    t = np.asarray(t, dtype=float)
    values = np.asarray(values, dtype=float)
    return np.diff(np.log(values)) / np.diff(np.log(t))


def sample_initial_states(n, seed=0, r_range=(0.5, 3.0), xi_range=(-1.0, 2.0), ell_range=(0.2, 2.0)):
    """Reproducible random initial conditions that escape (``xi_r > 0`` or ``ell > 0``)."""
    rng = np.random.default_rng(seed)
    r = rng.uniform(*r_range, size=n)
    xi = rng.uniform(*xi_range, size=n)
    ell = rng.uniform(*ell_range, size=n)
    theta = np.zeros(n)
    return [ClassicalState(float(a), float(b), float(c), float(e)) for a, b, c, e in zip(r, xi, theta, ell)]
