import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import integrate

from endscat.errors import DomainError
from endscat.geometry import build_potential, build_warped
from endscat.quantum.channel import build_channel
from endscat.quantum.grid import GridState
from endscat.quantum.packets import gaussian_bump
from endscat.quantum.waveop import (
    BORDERLINE_CASES,
    TranslatedPacket,
    asymptotic_speed_check,
    boosted_state,
    borderline_channel,
    borderline_demo,
    cook_bounds,
    default_grid,
    intertwining_gap,
    phase_drift_witness,
    target_energy,
    translation_intertwiner,
    wave_operator,
)

PK = gaussian_bump()
METRIC = build_warped("euclidean", r_max=1e7)
FLAT = build_channel(METRIC, None, 0)


@pytest.fixture(scope="module")
def free_estimate():
    return wave_operator(FLAT, PK, [5.0, 10.0, 20.0], dx=0.02)


class TestWaveOperator:
    def test_default_grid(self):
        g = default_grid(PK, 20.0, dx=0.02)
        assert g["r_max"] == pytest.approx(120.0)
        assert (g["r_max"] - g["r_min"]) / (g["n"] - 1) <= 0.02

    def test_target_energy(self):
        # <u, s^2/2 u> by an independent fine trapezoid
        s = np.linspace(1.0, 4.0, 200001)
        dens = np.abs(PK.u(s)) ** 2
        expect = integrate.trapezoid(0.5 * s * s * dens, s) / integrate.trapezoid(dens, s)
        assert target_energy(PK) == pytest.approx(expect, rel=1e-9)

    def test_free_gaps_below_cook(self, free_estimate):
        bounds = cook_bounds(FLAT, PK, free_estimate.T_list)
        assert np.all(free_estimate.cauchy_gaps <= 1.1 * bounds)
        # I(t) ~ t^-2 so consecutive dyadic gaps halve
        assert free_estimate.cauchy_gaps[1] / free_estimate.cauchy_gaps[0] == pytest.approx(0.5, abs=0.05)

    def test_isometric(self, free_estimate):
        assert_allclose(free_estimate.norms, 1.0, atol=1e-6)
        assert free_estimate.energy_error() <= 0.05

    def test_rows(self, free_estimate):
        rows = free_estimate.rows()
        assert [r["T"] for r in rows] == [5.0, 10.0, 20.0]
        assert np.isnan(rows[0]["gap"]) and rows[2]["gap"] == free_estimate.cauchy_gaps[1]

    def test_sampling_error_second_order(self, free_estimate):
        (h1, e1), (h2, e2) = sorted(free_estimate.sampling_error.items())
        assert h2 == pytest.approx(2 * h1)
        assert e2 / e1 == pytest.approx(4.0, abs=0.3)

    def test_bad_times(self):
        with pytest.raises(DomainError):
            wave_operator(FLAT, PK, [10.0, 5.0])
        with pytest.raises(DomainError):
            wave_operator(FLAT, PK, [10.0, 20.0], grid=dict(r_min=1e-3, r_max=50.0))


class TestSpeed:
    def test_ratio_approaches_one(self):
        st = boosted_state(k=5.0, t_final=20.0)
        series = asymptotic_speed_check(FLAT, st, [2.0, 5.0, 10.0, 20.0])
        dev = np.abs(series.ratio - 1.0)
        assert np.all(np.diff(dev) < 0)
        assert dev[-1] <= 0.05
        # energy is conserved by the scheme
        assert_allclose(series.twice_energy, series.twice_energy[0], rtol=1e-10)
        assert len(series.rows()) == 4

    def test_bad_inputs(self):
        st = boosted_state(k=5.0, t_final=2.0)
        with pytest.raises(DomainError):
            asymptotic_speed_check(FLAT, st, [2.0, 1.0])
        zero = GridState(1e-3, 1.0, 11, np.zeros(11))
        with pytest.raises(DomainError):
            asymptotic_speed_check(FLAT, zero, [1.0])


class TestIntertwiner:
    def test_grid_translation(self):
        st = GridState.from_function(PK.u, 1e-3, 8.0, 4001)
        a = 0.4
        moved = translation_intertwiner(METRIC, a, st)
        expect = TranslatedPacket(PK, a).u(st.r)
        assert np.max(np.abs(moved.values - expect)) <= 1e-6
        # only a modulus shift
        assert_allclose(np.abs(moved.values[1:-1]), np.abs(PK.u(st.r[1:-1] + a)), atol=1e-6)
        assert moved.norm() == pytest.approx(st.norm(), abs=1e-6)

    def test_translated_packet_derivatives(self):
        tp = TranslatedPacket(gaussian_bump(k=1.0), 0.3)
        s = np.linspace(0.9, 3.5, 9)
        h = 1e-5
        assert_allclose(tp.du(s), (tp.u(s + h) - tp.u(s - h)) / (2 * h), rtol=1e-7)
        assert_allclose(tp.d2u(s), (tp.du(s + h) - tp.du(s - h)) / (2 * h), rtol=1e-7)
        assert tp.support == pytest.approx((0.7, 3.7))

    def test_errors(self):
        st = GridState.from_function(PK.u, 1e-3, 8.0, 801)
        with pytest.raises(DomainError):
            translation_intertwiner(METRIC, -0.1, st)
        with pytest.raises(DomainError):
            translation_intertwiner(METRIC, 2.0, st)
        assert np.array_equal(translation_intertwiner(METRIC, 0.0, st).values, st.values)

    def test_gap_shrinks(self):
        g10 = intertwining_gap(FLAT, PK, 0.25, 10.0)
        g20 = intertwining_gap(FLAT, PK, 0.25, 20.0)
        assert g20 < 0.75 * g10


class TestBorderline:
    @pytest.mark.parametrize("case", sorted(BORDERLINE_CASES))
    def test_dichotomy(self, case):
        rep = borderline_demo(case)
        assert 0.9 <= rep.unmodified.fit.exponent <= 1.1
        assert rep.modified.fit.exponent >= 1.4
        assert rep.passed
        assert rep.summary()["case"] == case

    @pytest.mark.parametrize("case,c", [("delta0", 1.0), ("kappa0", 0.125), ("eta0", 0.3)])
    def test_dollard_constant(self, case, c):
        assert borderline_channel(case).tail_coefficient == pytest.approx(c, rel=1e-5)

    def test_witness(self):
        # constant in t1: the phases differ by (c/s) ln 10 for every decade
        s = np.linspace(1.0, 4.0, 200001)
        dens = 4 * np.sin(0.15 * np.log(10.0) / s) ** 2 * np.abs(PK.u(s)) ** 2
        expect = np.sqrt(integrate.trapezoid(dens, s))
        for t1 in (10.0, 1e4):
            assert phase_drift_witness(PK, 0.3, t1) == pytest.approx(expect, rel=1e-8)

    def test_unknown_case(self):
        with pytest.raises(DomainError):
            borderline_channel("zeta0")

    def test_short_range_reference(self):
        ch = build_channel(build_warped("euclidean", r_max=1e13), build_potential("power", (1.0, 1.5)), 0)
        from endscat.quantum.cook import cook_profile

        assert cook_profile(ch, PK, np.geomspace(1e3, 1e6, 16)).fit.exponent >= 1.4
