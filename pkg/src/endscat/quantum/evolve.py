"""Crank-Nicolson evolution of a radial channel on a uniform grid.

The discrete Hamiltonian on interior nodes is the three-point Laplacian
``-1/2 D2`` plus the diagonal ``V_eff``.  One step solves

    (I + i tau/2 H) psi_new = (I - i tau/2 H) psi_old,

which is unitary in exact arithmetic for any real ``tau``.
"""

from __future__ import annotations

import math

import numpy as np

from .. import _kernels
from ..errors import BoundaryContamination, DomainError, EndsError
from .grid import RUN_EDGE_TOL

MAX_DT = 0.1
DEFAULT_DT = 0.005
CHUNK_STEPS = 200
NORM_TOL_PER_STEP = 1e-12


def hamiltonian_bands(channel, state):
    """Diagonal and (constant) off-diagonal of the interior Hamiltonian."""
    r = state.r[1:-1]
    dx = state.dx
    veff = channel.V_eff(r) if channel is not None else np.zeros_like(r)
    return 1.0 / dx**2 + veff, -0.5 / dx**2


def apply_hamiltonian(channel, state):
    diag, off = hamiltonian_bands(channel, state)
    psi = state.values[1:-1]
    out = diag * psi
    out[1:] += off * psi[:-1]
    out[:-1] += off * psi[1:]
    full = np.zeros_like(state.values)
    full[1:-1] = out
    return full


def energy(channel, state):
    """``<u, H u> / <u, u>`` with the discrete Hamiltonian."""
    nrm2 = np.vdot(state.values, state.values).real
    if nrm2 == 0:
        raise DomainError("energy of the zero state is undefined")
    hv = apply_hamiltonian(channel, state)
    return float(np.vdot(state.values, hv).real / nrm2)


def step_count(t0, t1, dt):
    return int(math.ceil(abs(t1 - t0) / dt - 1e-9)) if t1 != t0 else 0


def evolve_cn(channel, state, t0, t1, dt=DEFAULT_DT, backend=None, check_every=CHUNK_STEPS,
              edge_tol=RUN_EDGE_TOL):
    """Evolve ``state`` from ``t0`` to ``t1`` (either direction) with steps of size at most ``dt``.

    Raises :class:`BoundaryContamination` if the amplitude next to an
    artificial end exceeds ``edge_tol`` times the norm at a chunk boundary.
    """
    if not (0 < dt <= MAX_DT):
        raise DomainError(f"dt must lie in (0, {MAX_DT}]")
    nsteps = step_count(t0, t1, dt)
    if nsteps == 0:
        return state.with_values(state.values, t_label=t1)
    tau = (t1 - t0) / nsteps
    diag, off = hamiltonian_bands(channel, state)
    half = 0.5j * tau
    stepper = _kernels.make_stepper(1.0 + half * diag, half * off, 1.0 - half * diag, backend)

    norm0 = state.norm()
    psi = np.ascontiguousarray(state.values[1:-1], dtype=complex).copy()
    done = 0
    while done < nsteps:
        chunk = min(check_every, nsteps - done)
        stepper.run(psi, chunk)
        done += chunk
        cur = state.with_values(np.concatenate(([0.0], psi, [0.0])), t_label=t0 + done * tau)
        ratio = cur.edge_ratio()
        if ratio > edge_tol:
            raise BoundaryContamination(
                f"boundary amplitude {ratio:.3e} x norm exceeds {edge_tol:.1e} at t={cur.t_label:.4g}",
                t=cur.t_label, edge_ratio=ratio)
    out = state.with_values(np.concatenate(([0.0], psi, [0.0])), t_label=t1)
    drift = abs(out.norm() - norm0)
    if drift > NORM_TOL_PER_STEP * nsteps * max(norm0, 1.0):
        raise EndsError(f"norm drift {drift:.3e} over {nsteps} steps breaks unitarity")
    return out
