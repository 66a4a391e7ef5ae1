"""Finite-time wave operators, asymptotic speed and translation intertwiners.

``Omega(T) u = exp(i T H) U(T) u`` is realized by sampling the comparison
dynamics ``U(T) u`` on a grid and evolving it back to time 0 with the
Crank-Nicolson scheme.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline

from ..errors import DomainError
from ..geometry import build_potential, build_warped
from .channel import build_channel
from .cook import cook_integral, cook_profile
from .evolve import DEFAULT_DT, energy, evolve_cn
from .grid import DEFAULT_R_MIN, MAX_STEP, GridState, grid_size, sample_propagated
from .packets import gaussian_bump
from .propagators import PropagatorSpec, propagate

GRID_MARGIN = 1.5


def default_grid(packet, T_max, dx=MAX_STEP, r_min=DEFAULT_R_MIN):
    """``[r_min, 1.5 T_max r_b]`` with spacing at most ``dx``."""
    r_max = GRID_MARGIN * T_max * packet.support[1]
    return dict(r_min=r_min, r_max=r_max, n=grid_size(r_min, r_max, dx))


@dataclass(frozen=True)
class TranslatedPacket:
    """``(V_a u)(s) = exp(-i a s) u(s + a)``, the reduced translation intertwiner applied to a packet."""

    base: object
    a: float

    @property
    def support(self):
        lo, hi = self.base.support
        return (lo - self.a, hi - self.a)

    def u(self, s):
        s = np.asarray(s, dtype=float)
        return np.exp(-1j * self.a * s) * self.base.u(s + self.a)

    def du(self, s):
        s = np.asarray(s, dtype=float)
        ph = np.exp(-1j * self.a * s)
        return ph * (self.base.du(s + self.a) - 1j * self.a * self.base.u(s + self.a))

    def d2u(self, s):
        s = np.asarray(s, dtype=float)
        ph = np.exp(-1j * self.a * s)
        x = s + self.a
        return ph * (self.base.d2u(x) - 2j * self.a * self.base.du(x) - self.a**2 * self.base.u(x))


def _linear_sampling_error(spec, packet, grid_kw, dx):
    """``||I_h S_h F - F||`` at cell midpoints, where ``I_h`` is linear interpolation at spacing ``dx``."""
    r_min, r_max = grid_kw["r_min"], grid_kw["r_max"]
    n = grid_size(r_min, r_max, dx)
    r = np.linspace(r_min, r_max, n)
    h = r[1] - r[0]
    vals = propagate(spec, packet, r)
    mid = 0.5 * (r[1:] + r[:-1])
    interp = 0.5 * (vals[1:] + vals[:-1])
    return float(np.sqrt(h) * np.linalg.norm(interp - propagate(spec, packet, mid)))


@dataclass(frozen=True)
class WaveOperatorEstimate:
    channel: object = field(repr=False)
    packet: object = field(repr=False)
    T_list: tuple
    omega_T: tuple = field(repr=False)
    cauchy_gaps: np.ndarray
    energy_pairing: np.ndarray
    target_energy: float
    norms: np.ndarray
    sampling_error: dict
    spec_kind: str = "free"

    def rows(self):
        rows = []
        for k, T in enumerate(self.T_list):
            rows.append({
                "T": T,
                "gap": self.cauchy_gaps[k - 1] if k else float("nan"),
                "energy_pairing": self.energy_pairing[k],
                "norm": self.norms[k],
            })
        return rows

    def energy_error(self, k=-1):
        return abs(self.energy_pairing[k] - self.target_energy) / self.target_energy


def target_energy(packet):
    """``<u, (s^2/2) u>`` by adaptive quadrature."""
    lo, hi = packet.support
    val, _ = integrate.quad(lambda s: 0.5 * s * s * abs(packet.u(s)) ** 2, lo, hi, epsabs=0.0, epsrel=1e-12, limit=200)
    nrm, _ = integrate.quad(lambda s: abs(packet.u(s)) ** 2, lo, hi, epsabs=0.0, epsrel=1e-12, limit=200)
    return val / nrm


def omega_state(channel, packet, T, grid_kw, spec_kind="free", c=0.0, shift=0.0, dt=DEFAULT_DT, backend=None):
    spec = PropagatorSpec(float(T), spec_kind, float(c), float(shift))
    start = sample_propagated(spec, packet, **grid_kw)
    start.check_boundary()
    return evolve_cn(channel, start, float(T), 0.0, dt, backend)


def wave_operator(channel, packet, T_list, spec_kind="free", c=None, grid=None, dt=DEFAULT_DT, dx=MAX_STEP,
                  shift=0.0, backend=None):
    """Estimate ``Omega(T) u`` for each ``T`` in ``T_list`` and the Cauchy gaps between neighbours."""
    T_list = tuple(float(T) for T in T_list)
    if len(T_list) < 1 or any(b <= a for a, b in zip(T_list, T_list[1:])):
        raise DomainError("T_list must be strictly increasing")
    if c is None:
        c = channel.tail_coefficient if spec_kind == "dollard" else 0.0
    grid_kw = dict(grid) if grid is not None else default_grid(packet, T_list[-1], dx)
    grid_kw.setdefault("n", grid_size(grid_kw["r_min"], grid_kw["r_max"], dx))
    if T_list[-1] * packet.support[1] > grid_kw["r_max"]:
        raise DomainError(f"grid r_max={grid_kw['r_max']} is smaller than T_max * r_b")

    states = tuple(omega_state(channel, packet, T, grid_kw, spec_kind, c, shift, dt, backend) for T in T_list)
    gaps = np.array([b.distance(a) for a, b in zip(states, states[1:])])
    pairing = np.array([energy(channel, s) for s in states])
    norms = np.array([s.norm() for s in states])
    h = (grid_kw["r_max"] - grid_kw["r_min"]) / (grid_kw["n"] - 1)
    spec = PropagatorSpec(T_list[-1], spec_kind, float(c), float(shift))
    sampling = {h: _linear_sampling_error(spec, packet, grid_kw, h),
                2 * h: _linear_sampling_error(spec, packet, grid_kw, 2 * h)}
    return WaveOperatorEstimate(channel, packet, T_list, states, gaps, pairing, target_energy(packet), norms,
                                sampling, spec_kind)


def cook_bounds(channel, packet, T_list, n=17, modified=False, c=None):
    """Trapezoid ``int_{T_k}^{T_{k+1}} I(t) dt`` for neighbouring times."""
    return np.array([cook_integral(channel, packet, a, b, n, modified, c) for a, b in zip(T_list, T_list[1:])])


# --------------------------------------------------------------------------
# asymptotic speed


@dataclass(frozen=True)
class SpeedSeries:
    t_grid: np.ndarray
    mean_speed_sq: np.ndarray
    twice_energy: np.ndarray

    @property
    def ratio(self):
        return self.mean_speed_sq / self.twice_energy

    def rows(self):
        return [{"t": t, "speed_sq": v, "two_H": e, "ratio": v / e}
                for t, v, e in zip(self.t_grid, self.mean_speed_sq, self.twice_energy)]


def asymptotic_speed_check(channel, initial, t_grid, dt=DEFAULT_DT, backend=None):
    """``<(r/t)^2>`` and ``2<H>`` along the evolution of ``initial`` (times must be increasing and > 0)."""
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size < 1 or np.any(t_grid <= 0) or np.any(np.diff(t_grid) <= 0):
        raise DomainError("t_grid must be positive and strictly increasing")
    two_h = 2.0 * energy(channel, initial)
    if two_h <= 0:
        raise DomainError("asymptotic speed needs a positive-energy state")
    state, t_prev = initial, initial.t_label
    speed, energies = [], []
    for t in t_grid:
        state = evolve_cn(channel, state, t_prev, t, dt, backend)
        t_prev = t
        speed.append(state.expectation(lambda r, t=t: (r / t) ** 2))
        energies.append(2.0 * energy(channel, state))
    return SpeedSeries(t_grid, np.array(speed), np.array(energies))


def boosted_state(k=5.0, r_max=None, t_final=50.0, dx=MAX_STEP, **packet_kw):
    """The default cutoff Gaussian boosted by ``e^{ikr}``, sampled on a grid wide enough for ``t_final``."""
    packet = gaussian_bump(k=k, **packet_kw)
    if r_max is None:
        r_max = packet.support[1] + (abs(k) + 4.0 / packet.width) * t_final * GRID_MARGIN
    return GridState.from_function(packet.u, DEFAULT_R_MIN, r_max, grid_size(DEFAULT_R_MIN, r_max, dx))


# --------------------------------------------------------------------------
# translation intertwiner


def translation_intertwiner(metric, a, state, leak_tol=1e-6):
    """``(V_a u)(r) = exp(-i a r) u(r + a)`` on the grid of ``state`` via cubic interpolation."""
    if a < 0:
        raise DomainError("translation length must be non-negative")
    if a == 0:
        return state.with_values(state.values)
    r = state.r
    if r[-1] > metric.r_max:
        raise DomainError("grid exceeds the metric domain")
    dens = np.abs(state.values) ** 2
    total = dens.sum()
    lost = dens[r < r[0] + a].sum()
    if total == 0 or lost > leak_tol * total:
        raise DomainError(f"support escapes the grid under translation by {a}")
    re = CubicSpline(r, state.values.real)
    im = CubicSpline(r, state.values.imag)
    x = r + a
    inside = x <= r[-1]
    xs = np.where(inside, x, r[-1])
    vals = np.where(inside, np.exp(-1j * a * r) * (re(xs) + 1j * im(xs)), 0.0)
    vals[0] = vals[-1] = 0.0
    return state.with_values(vals)


def intertwining_gap(channel, packet, a, T, grid_kw=None, dt=DEFAULT_DT, dx=MAX_STEP, backend=None):
    """``|| Omega_a(T) u - Omega(T) V_a u ||`` where ``Omega_a`` uses the shifted phase ``(r-a)^2/(2t)``."""
    if grid_kw is None:
        grid_kw = default_grid(packet, T, dx)
    shifted = omega_state(channel, packet, T, grid_kw, "free", 0.0, a, dt, backend)
    conj = omega_state(channel, TranslatedPacket(packet, a), T, grid_kw, "free", 0.0, 0.0, dt, backend)
    return shifted.distance(conj)


# --------------------------------------------------------------------------
# borderline counterexamples

BORDERLINE_CASES = {
    "delta0": "f = r^2 <r>^-1, ell = 1, V = 0: the centrifugal term decays like r^-1",
    "kappa0": "f = r^2 e^-2 exp(2 sqrt<r>), ell = 0, V = 0: (lap r)^2/8 decays like r^-1",
    "eta0": "f = r^2, ell = 0, V = c <r>^-1",
}
WITNESS_DECADES = (1e1, 1e2, 1e3, 1e4)


@dataclass(frozen=True)
class BorderlineReport:
    case: str
    c: float
    unmodified: object
    modified: object
    witness: dict

    @property
    def passed(self):
        return (self.unmodified.verdict != "integrable" and self.modified.verdict == "integrable"
                and min(self.witness.values()) > 1e-3)

    def summary(self):
        return {
            "case": self.case, "c": self.c,
            "unmodified_exponent": self.unmodified.fit.exponent, "unmodified_verdict": self.unmodified.verdict,
            "modified_exponent": self.modified.fit.exponent, "modified_verdict": self.modified.verdict,
            "witness": {repr(k): v for k, v in self.witness.items()}, "passed": self.passed,
        }


def borderline_channel(case, c=0.3, d=3):
    if case == "delta0":
        return build_channel(build_warped("delta0", d=d, r_max=1e13), None, 1)
    if case == "kappa0":
        return build_channel(build_warped("kappa0", d=d, r_max=1e13), None, 0)
    if case == "eta0":
        return build_channel(build_warped("euclidean", d=d, r_max=1e13), build_potential("coulomb", (c,)), 0)
    raise DomainError(f"unknown borderline case {case!r}; expected one of {sorted(BORDERLINE_CASES)}")


def phase_drift_witness(packet, c, t1, ratio=10.0):
    """``|| (exp(-i (c/s) ln t1) - exp(-i (c/s) ln t2)) u || = || (1 - exp(-i (c/s) ln(t2/t1))) u ||``."""
    lo, hi = packet.support
    t2 = t1 * ratio

    def dens(s):
        return abs(np.exp(-1j * c / s * np.log(t1)) - np.exp(-1j * c / s * np.log(t2))) ** 2 * abs(packet.u(s)) ** 2

    val, _ = integrate.quad(dens, lo, hi, epsabs=0.0, epsrel=1e-10, limit=200)
    return float(np.sqrt(val))


def borderline_demo(case, c=0.3, packet=None, t_grid=None, d=3):
    """Unmodified and Dollard-modified Cook profiles for one borderline case plus the phase-drift witness."""
    chan = borderline_channel(case, c, d)
    packet = packet if packet is not None else gaussian_bump()
    if t_grid is None:
        t_grid = np.geomspace(1e3, 1e6, 16)
    c_used = chan.tail_coefficient
    plain = cook_profile(chan, packet, t_grid, modified=False)
    modified = cook_profile(chan, packet, t_grid, modified=True, c=c_used)
    witness = {t1: phase_drift_witness(packet, c_used, t1) for t1 in WITNESS_DECADES}
    return BorderlineReport(case, float(c_used), plain, modified, witness)
