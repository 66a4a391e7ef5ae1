import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from endscat.errors import DomainError
from endscat.geometry import (
    FAMILIES,
    build_potential,
    build_warped,
    check_conditions,
    conformal_build,
    hessian_r2,
    japanese,
    laplacian_quantities,
    probe_grid,
    warped_from_table,
)

mp.mp.dps = 40


# independent high-precision profiles phi(r) = ln(f)/2
def _phi_mp(family, p):
    if family == "f1":
        mu = mp.mpf(p)
        return lambda r: mp.log(r) + mu / 2 * mp.log(1 + r * r)
    nu = mp.mpf(p)
    return lambda r: mp.log(r) - 1 + (1 + r * r) ** (nu / 2)


CASES = [("f1", 0.0), ("f1", 1.0), ("f1", -0.5), ("f1", 0.3), ("f2", 0.25), ("f2", 0.5), ("f2", 0.1)]
RADII = [0.05, 0.7, 3.0, 41.0, 900.0]


class TestBuildWarped:
    def test_f1_zero_is_flat(self):
        m = build_warped("f1", [0.0])
        r = np.array([0.3, 1.0, 7.0])
        assert_allclose(m.phi(r), np.log(r), rtol=1e-14)
        assert_allclose(m.dphi(r), 1 / r, rtol=1e-14)
        e = build_warped("euclidean")
        assert_allclose(e.f(r), r**2, rtol=1e-13)

    def test_delta0_density(self):
        m = build_warped("f1", [-0.5])
        r = np.geomspace(1e-2, 1e3, 9)
        assert_allclose(m.f(r), r**2 / japanese(r), rtol=1e-12)
        assert_allclose(build_warped("delta0").f(r), m.f(r), rtol=1e-14)

    def test_kappa0_density(self):
        m = build_warped("f2", [0.5])
        r = np.geomspace(1e-2, 1e3, 9)
        assert_allclose(m.f(r), r**2 * np.exp(-2) * np.exp(2 * np.sqrt(japanese(r))), rtol=1e-12)

    @pytest.mark.parametrize("family,p", CASES)
    @pytest.mark.parametrize("r", RADII)
    def test_derivatives_match_high_precision_differences(self, family, p, r):
        m = build_warped(family, [p])
        phi = _phi_mp(family, p)
        d1 = float(mp.diff(phi, mp.mpf(r), 1))
        d2 = float(mp.diff(phi, mp.mpf(r), 2))
        drphi = float(mp.diff(lambda x: x * mp.diff(phi, x), mp.mpf(r)))
        assert float(m.dphi(r)) == pytest.approx(d1, rel=1e-10)
        assert float(m.d2phi(r)) == pytest.approx(d2, rel=1e-10, abs=1e-300)
        assert float(m.d_rphi(r)) == pytest.approx(drphi, rel=1e-10, abs=1e-18)

    def test_derivatives_consistent_with_float_differences(self):
        m = build_warped("f2", [0.3])
        r = np.geomspace(0.2, 200.0, 11)
        h = 1e-5 * r
        fd = (m.phi(r + h) - m.phi(r - h)) / (2 * h)
        assert_allclose(m.dphi(r), fd, rtol=1e-8)

    @pytest.mark.parametrize("kw", [
        dict(family="nope"),
        dict(family="f1", params=[]),
        dict(family="f1", params=[0.0], d=1),
        dict(family="f1", params=[0.0], r_max=0.0),
        dict(family="f2", params=[float("nan")]),
    ])
    def test_bad_arguments(self, kw):
        with pytest.raises(DomainError):
            build_warped(**kw)

    def test_domain_checked(self):
        m = build_warped("euclidean", r_max=10.0)
        with pytest.raises(DomainError):
            m.dphi(np.array([11.0]))
        with pytest.raises(DomainError):
            hessian_r2(m, 0.0)

    def test_pole_regular(self):
        r = np.geomspace(1e-3, 10, 200)
        warped_from_table(r, np.log(r), pole_regular=True)
        with pytest.raises(DomainError):
            warped_from_table(r, np.log(2 * r), pole_regular=True)

    def test_families_documented(self):
        assert "μ ≥ (δ−1)/2" in FAMILIES["f1"]["doc"]
        assert "0 ≤ ν ≤ 1/2−κ" in FAMILIES["f2"]["doc"]


class TestPointwise:
    def test_hessian_examples(self):
        assert_allclose(hessian_r2(build_warped("euclidean"), 5.0), (2.0, 2.0), rtol=1e-14)
        assert_allclose(hessian_r2(build_warped("f1", [1.0]), 1.0), (2.0, 3.0), rtol=1e-14)
        rad, ang = hessian_r2(build_warped("delta0"), 100.0)
        assert rad == 2.0
        # 2 - r^2/<r>^2 at r = 100
        assert ang == pytest.approx(2 - 1e4 / 10001, rel=1e-13)
        assert ang == pytest.approx(1.0001, abs=1e-6)

    def test_laplacian_examples(self):
        # lap r = (d-1)/r, so d(lap r)/dr = -(d-1)/r^2 = -1/2 at d = 3, r = 2
        assert_allclose(laplacian_quantities(build_warped("euclidean", d=3), 2.0), (6.0, 1.0, -0.5), rtol=1e-14)
        assert_allclose(laplacian_quantities(build_warped("euclidean", d=2), 1.0), (4.0, 1.0, -1.0), rtol=1e-14)

    @settings(max_examples=60, deadline=None)
    @given(
        fam=st.sampled_from([("f1", (0.4,)), ("f2", (0.3,)), ("delta0", ()), ("kappa0", ())]),
        d=st.integers(2, 7),
        r=st.floats(1e-3, 1e4),
    )
    def test_trace_identity(self, fam, d, r):
        m = build_warped(fam[0], fam[1], d=d)
        rad, ang = hessian_r2(m, r)
        lap_r2, _, _ = laplacian_quantities(m, r)
        assert lap_r2 == pytest.approx(rad + (d - 1) * ang, rel=1e-14, abs=1e-14)


class TestConditions:
    def test_euclidean_delta(self):
        rep = check_conditions(build_warped("euclidean"), probe=probe_grid(0.1, 100.0), requested=(1.0, 0, 0))
        assert abs(rep.delta_star - 1.0) <= 1e-9
        assert rep.all_passed
        assert rep.r0 == pytest.approx(0.1)

    def test_delta0_borderline(self):
        grid = probe_grid(0.1, 100.0)
        rep = check_conditions(build_warped("delta0"), probe=grid)
        oracle = np.min(1.0 / (1.0 + grid**2))  # 2 - r^2/<r>^2 - 1
        assert rep.delta_star == pytest.approx(oracle, rel=1e-9)
        assert rep.delta_star <= 1e-3

    def test_kappa0_kappa(self):
        grid = probe_grid(0.1, 1e4)
        rep = check_conditions(build_warped("kappa0"), probe=grid)
        # closed form (r phi')' = (r/2) <r>^{-7/2} (2 + r^2/2) ~ r^{-1/2}
        upper = grid[np.log(grid) >= 0.5 * (np.log(grid[0]) + np.log(grid[-1]))]
        vals = 0.5 * upper * japanese(upper) ** -3.5 * (2 + 0.5 * upper**2)
        slope = -np.polyfit(np.log(japanese(upper)), np.log(vals), 1)[0]
        assert rep.kappa_star == pytest.approx(slope - 0.5, abs=1e-9)
        assert abs(rep.kappa_star) < 0.01
        assert rep.kappa_fit.residual < 0.1

    def test_potential_decay(self):
        m = build_warped("euclidean")
        grid = probe_grid(0.1, 1e4)
        rep = check_conditions(m, build_potential("power", (1.0, 1.5)), grid, requested=(0, 0, 0.4))
        assert rep.eta_star == pytest.approx(0.5, abs=0.01)
        assert rep.passed["eta"]
        rep = check_conditions(m, build_potential("coulomb", (0.3,)), grid, requested=(0, 0, 0.1))
        assert abs(rep.eta_star) < 0.01
        assert not rep.passed["eta"]

    def test_violations_listed(self):
        grid = probe_grid(0.1, 100.0, 50)
        rep = check_conditions(build_warped("delta0"), probe=grid, requested=(0.5, 0, 0))
        assert not rep.passed["delta"]
        bad = np.array(rep.violations)
        # 1/<r>^2 >= 0.5 exactly for r <= 1
        assert_allclose(bad, grid[grid > 1.0])
        assert np.isnan(rep.r0)

    @settings(max_examples=30, deadline=None)
    @given(st.floats(10.0, 1e4), st.floats(1.0, 100.0))
    def test_monotone_refinement(self, r_max, factor):
        m = build_warped("delta0", r_max=1e7)
        small = check_conditions(m, probe=probe_grid(0.1, r_max, 100))
        big = check_conditions(m, probe=np.append(probe_grid(0.1, r_max, 100), r_max * factor * (1 + 1e-9)))
        assert big.delta_star <= small.delta_star

    @pytest.mark.parametrize("delta", [0.0, 0.4, 1.0])
    def test_mu_sweep_threshold(self, delta):
        edge = (delta - 1) / 2
        for mu in np.linspace(-0.6, 0.4, 20):
            rep = check_conditions(build_warped("f1", [mu]), probe=probe_grid(0.1, 1e4), requested=(delta, 0, 0))
            if abs(mu - edge) > 1e-3:
                assert rep.passed["delta"] == (mu >= edge), mu

    def test_kappa_equivalence_asymptotic(self):
        grid = probe_grid(0.1, 1e16, 400)
        for fam, p in [("euclidean", ()), ("f1", (1.0,)), ("f2", (0.25,)), ("delta0", ()), ("kappa0", ())]:
            rep = check_conditions(build_warped(fam, p, r_max=1e16), probe=grid)
            assert abs(rep.kappa_star - rep.kappa_from_dlap) <= 0.05, fam

    @pytest.mark.parametrize("probe", [np.array([]), np.array([1.0, 0.5]), np.array([1.0, 1e5])])
    def test_bad_probe(self, probe):
        with pytest.raises(DomainError):
            check_conditions(build_warped("euclidean", r_max=1e4), probe=probe)

    def test_table_profile_close_to_closed_form(self):
        r = np.geomspace(1e-3, 1e4, 4000)
        m = build_warped("f1", [0.5])
        tab = warped_from_table(r, m.phi(r), pole_regular=True)
        grid = probe_grid(0.1, 1e3)
        a = check_conditions(tab, probe=grid)
        b = check_conditions(m, probe=grid)
        assert a.delta_star == pytest.approx(b.delta_star, abs=1e-6)
        assert a.warnings


class TestConformal:
    def test_flat_potential(self):
        cm = conformal_build((1.0, 1.0, 0.0, 1.0), probe_grid(1e-2, 1e3))
        r = np.array([0.01, 1.0, 50.0])
        assert_allclose(cm.rho(r), np.sqrt(2) * r, rtol=1e-12)
        assert_allclose(cm.f_of_rho(np.sqrt(2) * r), 1.0, rtol=1e-9)
        assert_allclose(cm.h(r), 2.0, rtol=1e-12)
        assert cm.delta_inferred == pytest.approx(1.0, abs=1e-12)
        assert cm.bounds_ok and cm.sigma_ok

    def test_half_power_endpoints(self):
        cm = conformal_build((1.0, 1.0, 0.5, 1.0), probe_grid(1e-3, 1e8))
        assert float(cm.h(np.array(1e-6))) == pytest.approx(2.0, abs=1e-6)
        assert float(cm.h(np.array(1e8))) == pytest.approx(2.0, abs=1e-3)

    def test_unit_power_positive(self):
        cm = conformal_build((1.0, 1.0, 1.0, 1.0), probe_grid(1e-2, 1e4))
        assert cm.delta_inferred > 0

    def test_inverse_round_trip(self):
        cm = conformal_build((2.0, 3.0, 0.7, 1.0), probe_grid(1e-2, 1e4))
        r = np.geomspace(1e-2, 1e4, 50)
        rho = cm.rho(r)
        assert np.all(np.diff(rho) > 0)
        assert_allclose(cm.r_of_rho(rho), r, rtol=1e-8)

    def test_as_warped_inherits_delta(self):
        grid = probe_grid(1e-2, 1e3, 120)
        cm = conformal_build((1.0, 1.0, 1.0, 1.0), grid)
        wm = cm.as_warped(3)
        rep = check_conditions(wm, probe=cm.rho(grid), requested=(cm.delta_inferred, 0, 0))
        assert rep.passed["delta"]
        assert rep.delta_star == pytest.approx(cm.delta_inferred, abs=1e-7)

    @pytest.mark.parametrize("params", [(0.0, 1.0, 0.5, 1.0), (-1.0, 1.0, 0.5, 1.0), (1.0, 1.0, 2.0, 1.0)])
    def test_rejects(self, params):
        with pytest.raises(DomainError):
            conformal_build(params, probe_grid())
