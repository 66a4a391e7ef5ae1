"""Cook-method integrands and their integrability classification.

For the free comparison dynamics the Cook integrand factors through the
scaled variable ``s = r / t``::

    I(t) = || -1/2 t^{-2} u''(s) + V_eff(t s) u(s) ||_{L^2(ds)}.

For the Dollard dynamics with phase ``Phi = c t ln<r>/<r>`` and ``a = dPhi/dr``
(evaluated at ``r = t s``) the integrand is::

    || 1/2 (-t^{-2} u'' + 2 i a t^{-1} u' + i a' u + a^2 u) + (V_eff - D) u ||,

where ``D = c (ln<r> + r^2) / <r>^3`` is the multiplication part of the
Dollard generator.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from ..errors import QuadratureError
from ..fitting import DecayFit, fit_decay
from .propagators import dollard_generator_correction, dollard_phase_d2r, dollard_phase_dr

VERDICT_BAND = 0.05


@dataclass(frozen=True)
class CookProfile:
    t_grid: np.ndarray = field(repr=False)
    integrand: np.ndarray = field(repr=False)
    fit: DecayFit
    verdict: str
    modified: bool
    c: float

    def rows(self):
        return [{"t": t, "I": v} for t, v in zip(self.t_grid, self.integrand)]


def classify(exponent, band=VERDICT_BAND):
    if exponent > 1.0 + band:
        return "integrable"
    if exponent >= 1.0 - band:
        return "borderline"
    return "divergent"


def _cook_vector(channel, packet, t, s, modified, c):
    u = packet.u(s)
    d2u = packet.d2u(s)
    r = t * s
    veff = channel.V_eff(r)
    if not modified:
        return -0.5 * d2u / t**2 + veff * u
    a = dollard_phase_dr(c, t, r)
    da = dollard_phase_d2r(c, t, r)
    du = packet.du(s)
    kinetic = 0.5 * (-d2u / t**2 + 2j * a * du / t + 1j * da * u + a * a * u)
    return kinetic + (veff - dollard_generator_correction(c, r)) * u


def cook_integrand(channel, packet, t, modified=False, c=None, epsrel=1e-10):
    """``I(t)`` by adaptive quadrature over the packet support."""
    if c is None:
        c = channel.tail_coefficient
    lo, hi = packet.support

    def dens(s):
        return abs(_cook_vector(channel, packet, t, np.array(s), modified, c)) ** 2

    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(dens, lo, hi, epsabs=0.0, epsrel=epsrel, limit=400)
        except integrate.IntegrationWarning as exc:
            raise QuadratureError(f"Cook quadrature failed at t={t}: {exc}") from exc
    return float(np.sqrt(val))


def cook_profile(channel, packet, t_grid, modified=False, c=None, window=None):
    """Cook integrand on ``t_grid`` with a power-law fit and integrability verdict.

    ``c`` is the Dollard constant used when ``modified`` is set; it defaults
    to the channel's measured tail coefficient.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(t_grid < 1):
        raise ValueError("Cook times must be >= 1")
    if c is None:
        c = channel.tail_coefficient
    values = np.array([cook_integrand(channel, packet, t, modified, c) for t in t_grid])
    fit = fit_decay(t_grid, values, window)
    return CookProfile(t_grid, values, fit, classify(fit.exponent), bool(modified), float(c if modified else 0.0))


def cook_integral(channel, packet, t0, t1, n=33, modified=False, c=None):
    """Trapezoid ``int_{t0}^{t1} I(t) dt`` on ``n`` geometric nodes."""
    ts = np.geomspace(t0, t1, n)
    vals = np.array([cook_integrand(channel, packet, t, modified, c) for t in ts])
    return float(np.trapezoid(vals, ts)) if hasattr(np, "trapezoid") else float(np.trapz(vals, ts))
