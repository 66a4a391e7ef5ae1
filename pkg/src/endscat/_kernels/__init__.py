"""Crank-Nicolson stepping kernels.

The compiled Cython sweep is used when the extension is built; otherwise the
LAPACK fallback in :mod:`._cn_py` is selected at import.  Set
``ENDSCAT_BACKEND=lapack`` to force the fallback.
"""

import os

import numpy as np

from ._cn_py import NumpyStepper

try:
    from ._cn_cy import cn_steps as _cn_steps
except ImportError:  # extension not built
    _cn_steps = None


class CythonStepper:
    name = "cython"

    def __init__(self, a_diag, alpha, b_diag):
        a_diag = np.ascontiguousarray(a_diag, dtype=complex)
        n = a_diag.size
        self.alpha = complex(alpha)
        self.b_diag = np.ascontiguousarray(b_diag, dtype=complex)
        cp = np.empty(n, dtype=complex)
        inv_den = np.empty(n, dtype=complex)
        prev_cp = 0.0
        for j in range(n):
            den = a_diag[j] - self.alpha * prev_cp
            inv_den[j] = 1.0 / den
            prev_cp = self.alpha * inv_den[j]
            cp[j] = prev_cp
        self.cp, self.inv_den = cp, inv_den
        self.work = np.empty(n, dtype=complex)

    def run(self, psi, nsteps):
        _cn_steps(psi, self.b_diag, self.alpha, self.cp, self.inv_den, self.work, int(nsteps))
        return psi


AVAILABLE = {"lapack": NumpyStepper}
if _cn_steps is not None:
    AVAILABLE["cython"] = CythonStepper

_requested = os.environ.get("ENDSCAT_BACKEND", "").strip().lower()
if _requested and _requested not in AVAILABLE:
    raise ImportError(f"ENDSCAT_BACKEND={_requested!r} is not available; have {sorted(AVAILABLE)}")
DEFAULT_BACKEND = _requested or ("cython" if "cython" in AVAILABLE else "lapack")


def make_stepper(a_diag, alpha, b_diag, backend=None):
    cls = AVAILABLE[backend or DEFAULT_BACKEND]
    return cls(a_diag, alpha, b_diag)
