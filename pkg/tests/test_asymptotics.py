import numpy as np
import pytest

import kirchhoffsim as ks
from kirchhoffsim import InsufficientTail
from kirchhoffsim.asymptotics import (
    estimate_limit,
    predicted_base_mass_limit,
    predicted_coefficient_limit,
    predicted_energy_norm_limit,
    predicted_energy_velocity_limit,
    predicted_operator_norm_limit,
    predicted_velocity_limit,
    tail_slope,
)


class TestEstimateLimit:
    def test_constant_series(self):
        t = np.geomspace(1, 1e4, 65)
        est = estimate_limit(t, np.full_like(t, 3.25))
        assert est.value == 3.25
        assert est.spread == 0.0

    def test_decaying_correction(self):
        t = np.geomspace(1e3, 1e5, 64)
        est = estimate_limit(t, 0.5 + 1.0 / t)
        assert est.value == pytest.approx(0.5, abs=5e-4)
        assert est.spread < 1e-4

    def test_insufficient_tail(self):
        t = np.geomspace(1, 10, 5)
        with pytest.raises(InsufficientTail):
            estimate_limit(t, np.ones_like(t))

    def test_window_controls_selection(self):
        t = np.geomspace(1, 1e4, 120)
        y = np.where(t < 1e3, 10.0, 1.0)
        est = estimate_limit(t, y, window_decades=1.0)
        assert est.value == pytest.approx(1.0)


class TestTailSlope:
    def test_power_law(self):
        t = np.geomspace(10, 1e4, 100)
        slope = tail_slope(t, -1.7 * np.log(t), window_decades=2.0)
        assert slope == pytest.approx(-1.7, rel=1e-9)

    def test_all_non_finite_is_vacuous(self):
        t = np.geomspace(10, 1e4, 50)
        assert tail_slope(t, np.full_like(t, -np.inf)) is None


class TestPredictedConstants:
    def test_reference_values_gamma1(self):
        assert predicted_coefficient_limit(1.0, 1.0) == pytest.approx(0.5)
        assert predicted_base_mass_limit(1.0, 1.0) == pytest.approx(0.5)
        assert predicted_energy_norm_limit(1.0, 1.0) == pytest.approx(0.5)
        assert predicted_operator_norm_limit(1.0, 1.0) == pytest.approx(0.5)
        assert predicted_velocity_limit(1.0, 1.0) == pytest.approx(0.125)
        assert predicted_energy_velocity_limit(1.0, 1.0) == pytest.approx(0.125)

    def test_reference_values_gamma_half(self):
        assert predicted_coefficient_limit(0.5, 1.0) == pytest.approx(1.0)
        assert predicted_energy_norm_limit(0.5, 1.0) == pytest.approx(1.0)
        assert predicted_base_mass_limit(0.5, 1.0) == pytest.approx(1.0)

    def test_nu_scaling(self):
        nu = 2.0
        assert predicted_coefficient_limit(1.0, nu) == pytest.approx(1 / 8)
        assert predicted_operator_norm_limit(1.0, nu) == pytest.approx(
            nu**2 * predicted_energy_norm_limit(1.0, nu))


class TestVerifiers:
    def test_theorem2_all_pass(self, gamma1_trace):
        rep = ks.verify_theorem_2(gamma1_trace)
        assert rep.passed
        ids = {c.id for c in rep.claims}
        assert ids == {"B1", "B2", "B31b", "B32b", "B4b", "B5", "LIM"}

    def test_theorem2_report_deterministic(self, gamma1_trace):
        a = ks.verify_theorem_2(gamma1_trace).to_text()
        b = ks.verify_theorem_2(gamma1_trace).to_text()
        assert a == b

    def test_tolerance_monotonicity(self, gamma1_trace):
        tight = ks.verify_theorem_2(gamma1_trace, tol=0.02)
        loose = ks.verify_theorem_2(gamma1_trace, tol=0.05)
        for ct, cl in zip(tight.claims, loose.claims):
            if ct.kind == "limit" and ct.passed:
                assert cl.passed

    def test_insufficient_tail_raised(self):
        p = ks.build_problem([1], 1.0, 0.1, [1], [0])
        tr = ks.evolve(p, 10.0)
        with pytest.raises(InsufficientTail):
            ks.verify_theorem_2(tr)

    def test_consistency_chain(self, gamma1_trace):
        # if the coefficient limit holds, the energy-norm limit is its
        # 1/gamma power measured on the same trace
        tr = gamma1_trace
        est_tb = estimate_limit(tr.t, (1 + tr.t) * tr.b)
        g = np.einsum("k,nk->n", tr.lam2, tr.u**2)
        est_en = estimate_limit(tr.t, (1 + tr.t) * g)
        assert est_en.value == pytest.approx(est_tb.value, rel=1e-3)

    def test_theorem_A(self, gamma1_trace):
        rep = ks.verify_theorem_A(gamma1_trace)
        assert rep.passed
        assert {c.id for c in rep.claims} == {"h1", "h11", "h12"}

    def test_theorem_1_empty_band_vacuous(self, gamma1_trace):
        rep = ks.verify_theorem_1(gamma1_trace, [99.0])
        assert rep.passed
        assert all("vacuous" in c.note for c in rep.claims)

    def test_theorem_1_bounded_bands(self, gamma1_trace):
        rep = ks.verify_theorem_1(gamma1_trace, [1.0, 2.0])
        assert rep.passed
        for c in rep.claims:
            if c.slope is not None:
                assert c.slope <= 0.05

    def test_propositions_pass(self, linear_power_trace):
        rep = ks.verify_propositions(linear_power_trace, sigma_M=1.0)
        assert rep.passed
        assert {c.id for c in rep.claims} == {"SL1b", "SL2b", "SL3b"}

    def test_propositions_vacuous_zero_data(self):
        spec = ks.Spectrum(np.array([1.0, 2.0]))
        tr = ks.evolve_linear(spec, ks.power_coefficient(1.0), 0.05,
                              [0, 0], [0, 0], 1e4)
        rep = ks.verify_propositions(tr, sigma_M=1.0)
        assert rep.passed

    def test_filter_claims(self, gamma1_trace):
        rep = ks.verify_theorem_2(gamma1_trace)
        only_b5 = rep.filter_claims(["B5"])
        assert len(only_b5.claims) == 1
        assert only_b5.claims[0].id == "B5"

    def test_b1_witnesses_positive(self, gamma1_trace):
        rep = ks.verify_theorem_2(gamma1_trace)
        b1 = [c for c in rep.claims if c.id == "B1"][0]
        assert "K1_hat=" in b1.note and "K2_hat=" in b1.note
        k1 = float(b1.note.split("K1_hat=")[1].split()[0])
        assert k1 > 0


class TestShiftedBaseFrequency:
    def test_inactive_low_mode_and_fractional_gamma(self):
        # data starts on the second frequency: nu = 2, the lambda = 1 mode
        # rides along as exact zeros and all constants follow nu
        p = ks.build_problem([1, 2, 3], 0.7, 0.05, [0, 1, 0.5], [0, 0, 0])
        assert p.nu == 2.0
        tr = ks.evolve(p, 1e5)
        assert np.all(tr.u[:, 0] == 0.0)
        est = estimate_limit(tr.t, (1 + tr.t) * tr.b)
        assert est.value == pytest.approx(
            predicted_coefficient_limit(0.7, 2.0), rel=0.02)
        assert ks.verify_theorem_2(tr).passed


class TestDataIndependence:
    def test_limits_match_across_initial_data(self, gamma1_trace):
        p2 = ks.build_problem([1, 2, 3], 1.0, 0.05, [0.3, 0.7, 0.1], [0, 0, 0])
        tr2 = ks.evolve(p2, 1e5)
        for series in ("b",):
            a = estimate_limit(gamma1_trace.t,
                               (1 + gamma1_trace.t) * gamma1_trace.b)
            b = estimate_limit(tr2.t, (1 + tr2.t) * tr2.b)
            assert a.value == pytest.approx(b.value, rel=0.02)
