# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Fused Crank-Nicolson sweeps for a constant symmetric tridiagonal Hamiltonian.

Each step forms ``B psi`` and solves ``A x = B psi`` with the Thomas
algorithm, reusing the elimination coefficients ``cp`` and ``inv_den``
computed once for ``A``.  Subnormal results are flushed to zero while the
sweeps run: dispersive tails otherwise fill the vector with denormals and
slow the loop by an order of magnitude.
"""

cdef extern from *:
    """
    #if defined(__SSE2__)
    #include <xmmintrin.h>
    static unsigned int endscat_ftz_on(void) { unsigned int old = _mm_getcsr(); _mm_setcsr(old | 0x8040u); return old; }
    static void endscat_ftz_restore(unsigned int old) { _mm_setcsr(old); }
    #else
    static unsigned int endscat_ftz_on(void) { return 0u; }
    static void endscat_ftz_restore(unsigned int old) { (void)old; }
    #endif
    """
    unsigned int endscat_ftz_on() nogil
    void endscat_ftz_restore(unsigned int old) nogil


def cn_steps(double complex[::1] psi, double complex[::1] b_diag, double complex alpha,
             double complex[::1] cp, double complex[::1] inv_den,
             double complex[::1] work, Py_ssize_t nsteps):
    cdef Py_ssize_t n = psi.shape[0]
    cdef Py_ssize_t j, s
    cdef double complex prev, cur, nxt, dprime
    cdef unsigned int csr
    if n == 0:
        return
    with nogil:
        csr = endscat_ftz_on()
        for s in range(nsteps):
            prev = 0.0
            dprime = 0.0
            for j in range(n):
                cur = psi[j]
                if j + 1 < n:
                    nxt = psi[j + 1]
                else:
                    nxt = 0.0
                dprime = (b_diag[j] * cur - alpha * (prev + nxt) - alpha * dprime) * inv_den[j]
                work[j] = dprime
                prev = cur
            psi[n - 1] = work[n - 1]
            for j in range(n - 2, -1, -1):
                psi[j] = work[j] - cp[j] * psi[j + 1]
        endscat_ftz_restore(csr)
