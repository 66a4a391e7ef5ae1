"""LAPACK-backed fallback for the Crank-Nicolson sweeps.

``A`` is factored once with ``zgttrf``; every step is one tridiagonal
matrix-vector product in numpy and one ``zgttrs`` solve.  Components far
below any meaningful amplitude are zeroed after each step so the solve never
runs on subnormal numbers.
"""

import numpy as np
from scipy.linalg import lapack

TINY = 1e-250


class NumpyStepper:
    name = "lapack"

    def __init__(self, a_diag, alpha, b_diag):
        n = a_diag.size
        self.alpha = complex(alpha)
        self.b_diag = np.ascontiguousarray(b_diag, dtype=complex)
        off = np.full(max(n - 1, 0), self.alpha, dtype=complex)
        dl, d, du, du2, ipiv, info = lapack.zgttrf(off, np.asarray(a_diag, dtype=complex), off.copy())
        if info != 0:
            raise np.linalg.LinAlgError(f"zgttrf failed with info={info}")
        self._lu = (dl, d, du, du2, ipiv)

    def run(self, psi, nsteps):
        dl, d, du, du2, ipiv = self._lu
        a, b = self.alpha, self.b_diag
        rhs = np.empty_like(psi)
        for _ in range(int(nsteps)):
            np.multiply(b, psi, out=rhs)
            rhs[1:] -= a * psi[:-1]
            rhs[:-1] -= a * psi[1:]
            x, info = lapack.zgttrs(dl, d, du, du2, ipiv, rhs)
            if info != 0:
                raise np.linalg.LinAlgError(f"zgttrs failed with info={info}")
            x[np.abs(x) < TINY] = 0.0
            psi[:] = x
        return psi
