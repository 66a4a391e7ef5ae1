import warnings

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from scipy import integrate

from endscat.errors import DomainError, QuadratureError
from endscat.geometry import build_potential, build_warped, japanese, warped_from_table
from endscat.quantum import cook as cookmod
from endscat.quantum.channel import build_channel
from endscat.quantum.cook import classify, cook_integral, cook_integrand, cook_profile
from endscat.quantum.packets import build_packet, gaussian_bump
from endscat.quantum.propagators import (
    PropagatorSpec,
    apply_generator,
    dollard_phase,
    dollard_phase_dr,
    dollard_propagate,
    free_propagate,
)

PK = gaussian_bump()
R = np.geomspace(1e-2, 1e6, 400)
T_COOK = np.geomspace(1e3, 1e6, 16)


def l2(func, lo, hi):
    val, _ = integrate.quad(lambda s: abs(func(s)) ** 2, lo, hi, epsabs=0, epsrel=1e-12, limit=400)
    return np.sqrt(val)


class TestChannel:
    def test_flat_cancellation(self):
        ch = build_channel(build_warped("euclidean", r_max=1e7), None, 0)
        assert np.max(np.abs(ch.V_eff(np.geomspace(1e-3, 1e6, 500)))) <= 1e-12

    @pytest.mark.parametrize("fam,p", [("f1", (0.7,)), ("f2", (0.3,)), ("delta0", ()), ("kappa0", ())])
    def test_geometric_term_regrouping(self, fam, p):
        ch = build_channel(build_warped(fam, p, d=4, r_max=1e7), None, 0)
        r = np.geomspace(0.1, 1e5, 200)
        _, a, b, _ = ch.components(r)
        assert_allclose(ch.geometric_term(r), a + b, rtol=1e-9, atol=1e-14 * np.max(np.abs(a)))

    @pytest.mark.parametrize("d", [2, 4, 5, 7])
    def test_flat_dimension(self, d):
        ch = build_channel(build_warped("euclidean", d=d, r_max=1e7), None, 0)
        assert_allclose(ch.V_eff(R) * 8 * R**2 / ((d - 1) * (d - 3)), 1.0, rtol=1e-10)

    def test_delta0_centrifugal(self):
        ch = build_channel(build_warped("delta0", r_max=1e7), None, 1)
        # lambda_1 = 1 * (1 + d - 2) = 2 and 1/f = <r>/r^2
        assert ch.lambda_ell == 2.0
        cent = ch.components(R)[3]
        assert_allclose(cent, japanese(R) / R**2, rtol=1e-12)
        assert ch.c_ell == pytest.approx(-0.75)
        assert ch.tail_coefficient == pytest.approx(1.0, rel=1e-6)

    def test_tail_coefficients(self):
        assert build_channel(build_warped("kappa0", r_max=1e7), None, 0).tail_coefficient == pytest.approx(0.125, rel=1e-4)
        eta = build_channel(build_warped("euclidean", r_max=1e7), build_potential("coulomb", (0.3,)), 0)
        assert eta.tail_coefficient == pytest.approx(0.3, rel=1e-9)
        short = build_channel(build_warped("euclidean", r_max=1e7), build_potential("power", (1.0, 1.5)), 0)
        assert abs(short.tail_coefficient) < 1e-5

    @settings(max_examples=40, deadline=None)
    @given(fam=st.sampled_from([("f1", (0.5,)), ("f2", (0.3,)), ("delta0", ()), ("kappa0", ())]),
           ell=st.integers(1, 6), d=st.integers(2, 6))
    def test_channel_consistency(self, fam, ell, d):
        m = build_warped(fam[0], fam[1], d=d, r_max=1e7)
        a = build_channel(m, None, ell).V_eff(R)
        b = build_channel(m, None, 0).V_eff(R)
        lam = ell * (ell + d - 2)
        # difference can only be resolved down to rounding of V_eff itself
        err = np.abs((a - b) - lam / (2 * m.f(R)))
        assert np.all(err <= 1e-9 * lam / (2 * m.f(R)) + 1e-14 * (np.abs(a) + np.abs(b)))

    def test_bad_ell(self):
        with pytest.raises(DomainError):
            build_channel(build_warped("euclidean"), None, -1)

    def test_linear_spline_rejected(self):
        r = np.geomspace(1e-3, 10, 50)
        m = warped_from_table(r, np.log(r))
        object.__setattr__(m.profile, "spline_order", 1)
        with pytest.raises(DomainError):
            build_channel(m, None, 0)


class TestPackets:
    def test_normalized_and_supported(self):
        assert PK.norm == pytest.approx(1.0, abs=1e-12)
        assert np.all(PK.u(np.array([0.5, 1.0, 4.0, 4.5])) == 0)

    @pytest.mark.parametrize("s", [1.2, 2.0, 2.5, 3.3, 3.9])
    def test_derivatives(self, s):
        pk = gaussian_bump(center=2.2, width=0.6, k=1.5)
        L = 0.25 * 9.0

        def g(x):
            return pk.amp * mp.exp(-(x - 2.2) ** 2 / (2 * 0.36) + 1j * 1.5 * x - L / ((x - 1) * (4 - x)))

        assert complex(pk.du(s)) == pytest.approx(complex(mp.diff(g, s)), rel=1e-10)
        assert complex(pk.d2u(s)) == pytest.approx(complex(mp.diff(g, s, 2)), rel=1e-10)

    def test_bad(self):
        with pytest.raises(DomainError):
            build_packet("square")
        with pytest.raises(DomainError):
            gaussian_bump(support=(0.0, 2.0))
        with pytest.raises(DomainError):
            gaussian_bump(width=-1.0)


class TestPropagators:
    def test_unit_time(self):
        r = np.linspace(0.5, 5, 50)
        assert_allclose(free_propagate(PropagatorSpec(1.0), PK, r), np.exp(0.5j * r**2) * PK.u(r), rtol=1e-15)

    @pytest.mark.parametrize("t", [1.0, 3.7, 50.0, 1e3])
    def test_unitary(self, t):
        spec = PropagatorSpec(t)
        assert l2(lambda r: free_propagate(spec, PK, r), t * 1.0, t * 4.0) == pytest.approx(1.0, abs=1e-8)
        dspec = PropagatorSpec(t, "dollard", 0.7)
        assert l2(lambda r: dollard_propagate(dspec, PK, r), t * 1.0, t * 4.0) == pytest.approx(1.0, abs=1e-8)

    def test_support(self):
        t = 12.0
        r = np.linspace(0.0, 60.0, 6001)
        vals = free_propagate(PropagatorSpec(t), PK, r)
        nz = r[np.abs(vals) > 0]
        assert nz.min() >= t * 1.0 and nz.max() <= t * 4.0

    def test_dollard_zero(self):
        r = np.linspace(1, 40, 99)
        a = dollard_propagate(PropagatorSpec(10.0, "dollard", 0.0), PK, r)
        assert np.array_equal(a, free_propagate(PropagatorSpec(10.0), PK, r))

    def test_spec_validation(self):
        with pytest.raises(DomainError):
            PropagatorSpec(0.5)
        with pytest.raises(DomainError):
            PropagatorSpec(2.0, "weird")

    def test_phase_derivative(self):
        r = np.geomspace(0.1, 1e3, 20)
        h = 1e-6 * r
        fd = (dollard_phase(0.4, 7.0, r + h) - dollard_phase(0.4, 7.0, r - h)) / (2 * h)
        assert_allclose(dollard_phase_dr(0.4, 7.0, r), fd, rtol=1e-7)

    @pytest.mark.parametrize("c", [0.0, 0.3, -0.8])
    def test_generator(self, c):
        t, dt = 20.0, 1e-4
        r = np.linspace(21.0, 79.0, 300)

        def field(tt):
            return dollard_propagate(PropagatorSpec(tt, "dollard", c), PK, r)

        # analytic r-derivative of U_l(t) u
        s = r / t
        psi_r = r / t - dollard_phase_dr(c, t, r)
        F = field(t)
        with np.errstate(invalid="ignore", divide="ignore"):
            dF = F * 1j * psi_r + np.exp(1j * (r * r / (2 * t) - dollard_phase(c, t, r))) * PK.du(s) / t**1.5
        lhs = 1j * (field(t + dt) - field(t - dt)) / (2 * dt)
        rhs = apply_generator(F, dF, r, t, c)
        assert np.max(np.abs(lhs - rhs)) <= 1e-6 * np.max(np.abs(rhs))


class TestCook:
    def test_classify(self):
        assert classify(1.06) == "integrable"
        assert classify(1.05) == "borderline"
        assert classify(0.95) == "borderline"
        assert classify(0.94) == "divergent"

    def test_free_oracle(self):
        ch = build_channel(build_warped("euclidean", r_max=1e7), None, 0)
        norm2 = l2(PK.d2u, 1.0, 4.0)
        for t in (1.0, 10.0, 300.0):
            assert cook_integrand(ch, PK, t) == pytest.approx(0.5 * norm2 / t**2, rel=1e-8)
        prof = cook_profile(ch, PK, T_COOK)
        assert prof.fit.exponent == pytest.approx(2.0, abs=1e-8)
        assert prof.verdict == "integrable"

    def test_coulomb_dichotomy(self):
        ch = build_channel(build_warped("euclidean", r_max=1e7), build_potential("coulomb", (0.3,)), 0)
        plain = cook_profile(ch, PK, T_COOK)
        assert plain.fit.exponent == pytest.approx(1.0, abs=0.05)
        assert plain.verdict in ("borderline", "divergent")
        mod = cook_profile(ch, PK, T_COOK, modified=True, c=0.3)
        assert mod.fit.exponent >= 1.4
        assert mod.verdict == "integrable"
        assert mod.c == 0.3 and plain.c == 0.0

    def test_short_range(self):
        ch = build_channel(build_warped("euclidean", r_max=1e7), build_potential("power", (1.0, 1.5)), 0)
        assert cook_profile(ch, PK, T_COOK).fit.exponent >= 1.4

    def test_integral_converges(self):
        ch = build_channel(build_warped("euclidean", r_max=1e7), build_potential("power", (1.0, 1.5)), 0)
        coarse = cook_integral(ch, PK, 10.0, 20.0, n=9)
        fine = cook_integral(ch, PK, 10.0, 20.0, n=65)
        assert coarse == pytest.approx(fine, rel=1e-2)
        assert coarse >= fine  # trapezoid over-estimates a convex integrand

    def test_times_below_one(self):
        ch = build_channel(build_warped("euclidean", r_max=1e7), None, 0)
        with pytest.raises(ValueError):
            cook_profile(ch, PK, [0.5, 2.0, 4.0, 8.0])

    def test_quadrature_failure(self, monkeypatch):
        def bad_quad(*a, **k):
            warnings.warn("limit reached", integrate.IntegrationWarning)
            return 0.0, 0.0

        monkeypatch.setattr(cookmod.integrate, "quad", bad_quad)
        ch = build_channel(build_warped("euclidean", r_max=1e7), None, 0)
        with pytest.raises(QuadratureError):
            cook_integrand(ch, PK, 5.0)

    def test_rows(self):
        ch = build_channel(build_warped("euclidean", r_max=1e7), None, 0)
        prof = cook_profile(ch, PK, np.geomspace(1, 100, 5))
        assert [r["t"] for r in prof.rows()] == list(np.geomspace(1, 100, 5))
