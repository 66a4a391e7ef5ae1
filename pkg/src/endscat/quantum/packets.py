"""Compactly supported test states with closed-form derivatives."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from ..errors import DomainError, QuadratureError

PACKET_FAMILIES = {
    "gaussian_bump": "exp(-(r-center)^2/(2 width^2) + i k r - beta L/((r-a)(b-r))) on (a, b), "
    "L = (b-a)^2/4; params center, width, k, beta, support",
}


@dataclass(frozen=True)
class WavePacket:
    """``u(r) = amp * exp(g(r))`` on ``support = (a, b)``, zero elsewhere."""

    center: float = 2.5
    width: float = 0.5
    k: float = 0.0
    beta: float = 1.0
    support: tuple = (1.0, 4.0)
    amp: float = 1.0
    norm: float = field(default=float("nan"), compare=False)

    def _parts(self, r):
        r = np.asarray(r, dtype=float)
        a, b = self.support
        inside = (r > a) & (r < b)
        rr = np.where(inside, r, 0.5 * (a + b))
        q = (rr - a) * (b - rr)
        dq = a + b - 2.0 * rr
        scale = self.beta * 0.25 * (b - a) ** 2
        g = -((rr - self.center) ** 2) / (2.0 * self.width**2) + 1j * self.k * rr - scale / q
        dg = -(rr - self.center) / self.width**2 + 1j * self.k + scale * dq / q**2
        d2g = -1.0 / self.width**2 - scale * (2.0 * q + 2.0 * dq**2) / q**3
        with np.errstate(under="ignore"):
            u = np.where(inside, self.amp * np.exp(g), 0.0)
        return u, np.where(inside, dg, 0.0), np.where(inside, d2g, 0.0)

    def u(self, r):
        return self._parts(r)[0]

    def du(self, r):
        u, dg, _ = self._parts(r)
        return dg * u

    def d2u(self, r):
        u, dg, d2g = self._parts(r)
        return (d2g + dg * dg) * u

    def quad_norm_sq(self):
        a, b = self.support
        val, err = integrate.quad(lambda s: abs(self.u(s)) ** 2, a, b, epsabs=0.0, epsrel=1e-13, limit=200)
        if err > 1e-10 * max(val, 1e-300):
            raise QuadratureError("packet norm quadrature did not converge")
        return val


def gaussian_bump(center=2.5, width=0.5, k=0.0, beta=1.0, support=(1.0, 4.0), normalize=True):
    """Gaussian times a smooth compactly supported cutoff, optionally boosted by ``e^{ikr}``."""
    a, b = (float(x) for x in support)
    if not 0 < a < b:
        raise DomainError("support must satisfy 0 < a < b")
    if not (width > 0 and beta > 0):
        raise DomainError("width and beta must be positive")
    pk = WavePacket(float(center), float(width), float(k), float(beta), (a, b), 1.0)
    n2 = pk.quad_norm_sq()
    amp = 1.0 / np.sqrt(n2) if normalize else 1.0
    pk = WavePacket(pk.center, pk.width, pk.k, pk.beta, (a, b), amp)
    return WavePacket(pk.center, pk.width, pk.k, pk.beta, (a, b), amp, float(np.sqrt(pk.quad_norm_sq())))


def build_packet(family="gaussian_bump", **params):
    if family != "gaussian_bump":
        raise DomainError(f"unknown packet family {family!r}")
    if "support" in params:
        params["support"] = tuple(params["support"])
    return gaussian_bump(**params)
