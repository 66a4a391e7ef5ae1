"""Uniform radial grids carrying a discretized wavefunction.

The grid includes both endpoints, which carry Dirichlet zeros.  The discrete
inner product is ``dx * sum(conj(u) v)``, a first-order-exact quadrature
since the endpoint values vanish.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from ..errors import BoundaryContamination, DomainError

DEFAULT_R_MIN = 1e-3
MAX_STEP = 0.02
EDGE_WIDTH = 8
ENTRY_EDGE_TOL = 1e-6
RUN_EDGE_TOL = 1e-4
# Below this r_min the left end sits at the pole, where every radial channel
# already carries a Dirichlet condition; it is not an artificial boundary.
POLE_RADIUS = 0.05


def grid_size(r_min, r_max, max_step=MAX_STEP):
    """Smallest node count whose spacing is at most ``max_step``."""
    return int(math.ceil((r_max - r_min) / max_step)) + 1


@dataclass(frozen=True)
class GridState:
    r_min: float
    r_max: float
    n: int
    values: np.ndarray = field(repr=False)
    t_label: float = 0.0

    def __post_init__(self):
        if not (self.r_max > self.r_min >= 0):
            raise DomainError("grid needs 0 <= r_min < r_max")
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != (self.n,) or self.n < 3:
            raise DomainError(f"values must have shape ({self.n},) with n >= 3")
        if not np.all(np.isfinite(vals)):
            raise DomainError("grid state has non-finite values")
        object.__setattr__(self, "values", vals)

    @property
    def dx(self):
        return (self.r_max - self.r_min) / (self.n - 1)

    @property
    def r(self):
        return np.linspace(self.r_min, self.r_max, self.n)

    def inner(self, other):
        return complex(self.dx * np.vdot(self.values, other.values))

    def norm(self):
        return float(math.sqrt(self.dx) * np.linalg.norm(self.values))

    def distance(self, other):
        self._check_same_grid(other)
        return float(math.sqrt(self.dx) * np.linalg.norm(self.values - other.values))

    def expectation(self, weight):
        """``<u, w u> / <u, u>`` for a multiplication operator ``w(r)``."""
        dens = np.abs(self.values) ** 2
        if not dens.any():
            raise DomainError("expectation in the zero state is undefined")
        return float(np.sum(weight(self.r) * dens) / np.sum(dens))

    def with_values(self, values, t_label=None):
        return replace(self, values=np.array(values, dtype=complex),
                       t_label=self.t_label if t_label is None else float(t_label))

    def edge_ratio(self, include_left=None):
        """Largest ``|u|`` over the nodes next to the artificial ends, relative to the norm."""
        nrm = self.norm()
        if nrm == 0:
            return 0.0
        if include_left is None:
            include_left = self.r_min > POLE_RADIUS
        edge = np.abs(self.values[-EDGE_WIDTH:]).max()
        if include_left:
            edge = max(edge, np.abs(self.values[:EDGE_WIDTH]).max())
        return float(edge / nrm)

    def check_boundary(self, tol=ENTRY_EDGE_TOL):
        ratio = self.edge_ratio()
        if ratio > tol:
            raise BoundaryContamination(
                f"boundary amplitude {ratio:.3e} x norm exceeds {tol:.1e} at t={self.t_label}",
                t=self.t_label, edge_ratio=ratio)
        return ratio

    def _check_same_grid(self, other):
        if (self.n, self.r_min, self.r_max) != (other.n, other.r_min, other.r_max):
            raise DomainError("states live on different grids")

    @classmethod
    def from_function(cls, func, r_min, r_max, n=None, t_label=0.0, max_step=MAX_STEP):
        if n is None:
            n = grid_size(r_min, r_max, max_step)
        r = np.linspace(r_min, r_max, n)
        vals = np.asarray(func(r), dtype=complex).copy()
        vals[0] = vals[-1] = 0.0
        return cls(float(r_min), float(r_max), int(n), vals, float(t_label))


def sample_propagated(spec, packet, r_min, r_max, n=None, max_step=MAX_STEP):
    """Sample ``U(t) u`` (free or Dollard) onto a grid; ``t_label`` is ``spec.t``."""
    from .propagators import propagate

    lo, hi = packet.support
    if spec.shift + spec.t * (hi - spec.shift) > r_max or spec.shift + spec.t * (lo - spec.shift) < r_min:
        raise DomainError(f"propagated support exceeds the grid [{r_min}, {r_max}] at t={spec.t}")
    return GridState.from_function(lambda r: propagate(spec, packet, r), r_min, r_max, n,
                                   t_label=spec.t, max_step=max_step)
