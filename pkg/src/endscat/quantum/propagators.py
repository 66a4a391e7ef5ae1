"""Comparison dynamics in a radial channel.

The free comparison propagator acts as

    (U(t) u)(r) = exp(i r^2 / (2t)) t^{-1/2} u(r / t),

and its Dollard modification multiplies by ``exp(-i c t ln<r> / <r>)``.
Both are evaluated on the closed-form packet, never interpolated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DomainError
from ..geometry import japanese


@dataclass(frozen=True)
class PropagatorSpec:
    t: float
    kind: str = "free"
    c: float = 0.0
    shift: float = 0.0

    def __post_init__(self):
        if not self.t >= 1:
            raise DomainError("propagator time must be >= 1")
        if self.kind not in ("free", "dollard"):
            raise DomainError(f"unknown propagator kind {self.kind!r}")


def free_propagate(spec, packet, r):
    """``exp(i (r-a)^2/(2t)) t^{-1/2} u(a + (r-a)/t)`` with ``a = spec.shift`` (0 by default)."""
    t = float(spec.t)
    r = np.asarray(r, dtype=float)
    a = spec.shift
    x = r - a
    return np.exp(0.5j * x * x / t) * packet.u(a + x / t) / np.sqrt(t)


def dollard_phase(c, t, r):
    """``c t ln<r> / <r>``; the Dollard factor is ``exp(-i * dollard_phase)``."""
    jr = japanese(r)
    return c * t * np.log(jr) / jr


def dollard_phase_dr(c, t, r):
    r = np.asarray(r, dtype=float)
    jr = japanese(r)
    return c * t * r * (1.0 - np.log(jr)) / jr**3


def dollard_phase_d2r(c, t, r):
    r = np.asarray(r, dtype=float)
    jr = japanese(r)
    lg = np.log(jr)
    return c * t * ((1.0 - lg) * (jr**2 - 3.0 * r**2) - r**2) / jr**5


def dollard_generator_correction(c, r):
    """Extra multiplication term ``c ln<r>/<r>^3 + c r^2/<r>^3`` in the Dollard generator."""
    r = np.asarray(r, dtype=float)
    jr = japanese(r)
    return c * (np.log(jr) + r * r) / jr**3


def dollard_propagate(spec, packet, r):
    """Free propagation times the Dollard phase; equals :func:`free_propagate` when ``c = 0``."""
    free = free_propagate(spec, packet, r)
    if spec.c == 0.0:
        return free
    return free * np.exp(-1j * dollard_phase(spec.c, spec.t, r))


def propagate(spec, packet, r):
    if spec.kind == "dollard":
        return dollard_propagate(spec, packet, r)
    return free_propagate(spec, packet, r)


def apply_generator(F, dF, r, t, c=0.0):
    """Apply ``1/2 p^2 - 1/2 (p - r/t)^2 [+ Dollard correction]`` to ``F`` given ``F'``.

    With ``p = -i d/dr`` the first two terms reduce to the first-order operator
    ``-(i/2t)(F + 2 r F') - r^2 F / (2 t^2)``.
    """
    r = np.asarray(r, dtype=float)
    out = -0.5j / t * (F + 2.0 * r * dF) - r * r / (2.0 * t * t) * F
    if c:
        out = out + dollard_generator_correction(c, r) * F
    return out
