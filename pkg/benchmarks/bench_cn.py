"""Crank-Nicolson kernel benchmark: compiled sweep against the LAPACK fallback.

    python benchmarks/bench_cn.py [--nodes 6000] [--steps 10000] [--repeat 3]

Two workloads are timed: a compact packet (no tails below the normal range)
and a dispersed free packet whose far tails are subnormal, which is where
the fallback loses most ground.
"""

import argparse
import time

import numpy as np

from endscat import _kernels
from endscat.quantum.evolve import hamiltonian_bands
from endscat.quantum.grid import GridState


class _Flat:
    @staticmethod
    def V_eff(r):
        return np.zeros_like(r)


def _state(n, r_max, center, width, k=0.0):
    r = np.linspace(1e-3, r_max, n)[1:-1]
    return np.exp(-((r - center) ** 2) / (4 * width**2) + 1j * k * r).astype(complex)


def _time(backend, psi0, nodes, r_max, steps, dt, repeat):
    st = GridState(1e-3, r_max, nodes, np.r_[0, psi0, 0])
    diag, off = hamiltonian_bands(_Flat, st)
    half = 0.5j * dt
    stepper = _kernels.make_stepper(1 + half * diag, half * off, 1 - half * diag, backend)
    best, out = np.inf, None
    for _ in range(repeat):
        psi = psi0.copy()
        t0 = time.perf_counter()
        stepper.run(psi, steps)
        best = min(best, time.perf_counter() - t0)
        out = psi
    return best, out


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--nodes", type=int, default=6000)
    p.add_argument("--steps", type=int, default=10_000)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args(argv)

    backends = sorted(_kernels.AVAILABLE)
    workloads = [
        ("compact", args.nodes, 120.0, args.steps, _state(args.nodes, 120.0, 60.0, 5.0)),
        ("subnormal tails", 24001, 480.0, 400, _state(24001, 480.0, 10.0, 0.5, k=2.0)),
    ]
    print(f"backends: {backends} (default {_kernels.DEFAULT_BACKEND})")
    for name, nodes, r_max, steps, psi0 in workloads:
        results = {b: _time(b, psi0, nodes, r_max, steps, 0.005, args.repeat) for b in backends}
        line = ", ".join(f"{b} {t:.3f}s" for b, (t, _) in results.items())
        extra = ""
        if len(results) == 2:
            a, b = (results[k][1] for k in backends)
            extra = f", max diff {np.max(np.abs(a - b)):.1e}"
        print(f"{name:16s} nodes={nodes} steps={steps}: {line}{extra}")


if __name__ == "__main__":
    main()
