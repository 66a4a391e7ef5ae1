"""Radial channels of the conjugated Hamiltonian.

Multiplying by ``f^{(d-1)/4}`` maps ``L^2(M)`` on a warped end unitarily onto
``L^2(R_+, dr) x L^2(S)``, where the Hamiltonian becomes

    1/2 p_r^2 + V + (lap r)^2 / 8 + (d/dr lap r) / 4 - (1/2) f^{-1} lap_S .

On the spherical harmonics of degree ``ell`` the last term is
``lambda_ell / (2 f)`` with ``lambda_ell = ell (ell + d - 2)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DomainError
from ..geometry import build_potential

TAIL_RADIUS = 1e12


@dataclass(frozen=True)
class RadialChannel:
    metric: object = field(repr=False)
    ell: int
    lambda_ell: float
    V: object = field(repr=False)
    c_ell: float
    tail_coefficient: float

    @property
    def d(self):
        return self.metric.d

    def components(self, r, check=True):
        """The four summands ``(V, (lap r)^2/8, (lap r)'/4, lambda/(2f))`` at ``r``."""
        r = self.metric.check_domain(r) if check else np.asarray(r, dtype=float)
        prof = self.metric.profile
        k = self.metric.d - 1
        lap_r = k * prof.dphi(r)
        with np.errstate(under="ignore"):
            centrifugal = self.lambda_ell * 0.5 * np.exp(-2.0 * prof.phi(r))
        return self.V(r), 0.125 * lap_r**2, 0.25 * k * prof.d2phi(r), centrifugal

    def geometric_term(self, r, check=True):
        """``(lap r)^2/8 + (lap r)'/4`` summed in a form where the ``r^-2`` pole cancels exactly.

        With ``q = r phi'`` it equals
        ``(d-1)/(8 r^2) [(d-3) + (d-1)(q-1)(q+1) - 2(q-1) + 2 r q']``.
        """
        r = self.metric.check_domain(r) if check else np.asarray(r, dtype=float)
        prof = self.metric.profile
        k = self.metric.d - 1
        qm1 = prof.rphi_m1(r)
        bracket = (k - 2) + k * qm1 * (qm1 + 2.0) - 2.0 * qm1 + 2.0 * r * prof.d_rphi(r)
        return 0.125 * k * bracket / (r * r)

    def V_eff(self, r, check=True):
        v, _, _, c = self.components(r, check)
        return v + self.geometric_term(r, check) + c

    def decays(self):
        """``|V_eff(r_max)|`` is within 10x of its largest summand there."""
        parts = self.components(self.metric.r_max)
        return abs(sum(parts)) <= 10.0 * max(abs(p) for p in parts) + 1e-300


def build_channel(metric, V=None, ell=0):
    """Channel of angular degree ``ell``; ``V`` defaults to zero.

    ``tail_coefficient`` is ``lim r V_eff(r)``, the strength of the
    Coulomb-type tail that a Dollard phase has to absorb; it is read off the
    closed-form profile at a large radius (``r_max`` for tabulated profiles).
    """
    if ell < 0 or int(ell) != ell:
        raise DomainError("ell must be a non-negative integer")
    if not metric.second_derivative_exact and metric.profile.spline_order is not None and metric.profile.spline_order < 3:
        raise DomainError("effective potential needs a profile with second derivatives")
    if V is None:
        V = build_potential("zero")
    ell = int(ell)
    d = metric.d
    lam = float(ell * (ell + d - 2))
    c_ell = -0.5 * (ell + d / 2.0 - 1.0)
    chan = RadialChannel(metric, ell, lam, V, c_ell, 0.0)
    r_tail = TAIL_RADIUS if metric.family != "table" else metric.r_max
    tail = float(r_tail * chan.V_eff(np.array(r_tail), check=False))
    return RadialChannel(metric, ell, lam, V, c_ell, tail)
