import math
from dataclasses import dataclass

import numpy as np
import pytest

from measure_model import (CosineBump, FieldObservable, Moments, PlaneWave, QuadratureError, TruncatedGaussian,
                           VelocityLengthMeasure, apply_c, apply_p, diffusion_coefficient, effective_velocity,
                           gamma, gamma_matrix, length_mean, moments, second_moment, static_covariance,
                           static_covariance_spectral, transport_residual_variance, wiener_correlation)


def random_measure(rng):
    n = int(rng.integers(1, 7))
    return VelocityLengthMeasure(rng.normal(0.0, 2.0, n), rng.uniform(0.0, 2.0, n), rng.dirichlet(np.ones(n)),
                                 float(rng.uniform(0.1, 3.0)))


class TestMeasure:
    def test_setup_a_moments(self, setup_a):
        m = moments(setup_a)
        assert m.sigma == pytest.approx(0.5)
        assert m.pi == 0.0
        assert m.r2 == pytest.approx(0.25)

    def test_two_velocity_general(self):
        m = moments(VelocityLengthMeasure.two_velocity(2.0, 0.3, 1.5))
        assert m.sigma == pytest.approx(0.45)
        assert m.pi == pytest.approx(0.0, abs=1e-15)

    def test_zero_lengths(self):
        m = moments(VelocityLengthMeasure([0.7], [0.0], [1.0], 2.0))
        assert m.sigma == 0.0 and m.pi == 0.0

    def test_setup_b_moments(self, setup_b):
        m = moments(setup_b)
        assert m.sigma == pytest.approx(0.5)
        assert m.pi == pytest.approx(0.0, abs=1e-15)
        assert m.r2 == pytest.approx(0.25)

    def test_from_atoms_accepts_records_and_tuples(self):
        a = VelocityLengthMeasure.from_atoms([{"v": -1, "r": 0.5, "w": 0.5}, {"v": 1, "r": 0.5, "w": 0.5}], 1.0)
        b = VelocityLengthMeasure.from_atoms([(-1, 0.5, 0.5), (1, 0.5, 0.5)], 1.0)
        assert a.atoms == b.atoms
        assert a.v_span() == 2.0

    @pytest.mark.parametrize("v, r, w, rho", [
        ([0.0, 1.0], [0.5, 0.5], [0.5, 0.4], 1.0),
        ([0.0, 1.0], [0.5, 0.5], [1.1, -0.1], 1.0),
        ([0.0], [0.5], [1.0], 0.0),
        ([0.0], [-2.0], [1.0], 1.0),
        ([], [], [], 1.0),
        ([np.nan], [0.5], [1.0], 1.0),
    ])
    def test_invalid_measures_rejected(self, v, r, w, rho):
        with pytest.raises(ValueError):
            VelocityLengthMeasure(v, r, w, rho)

    def test_measure_arrays_are_read_only(self, setup_a):
        with pytest.raises(ValueError):
            setup_a.v[0] = 3.0


class TestVelocities:
    def test_effective_velocity(self):
        assert effective_velocity(1.0, Moments(0.5, 0.0, 0.25)) == 1.5
        assert effective_velocity(0.0, Moments(0.9, 0.0, 0.1)) == 0.0
        assert effective_velocity(2.0, Moments(0.5, 0.25, 0.1)) == 2.75

    def test_effective_velocity_is_affine(self, mixed_measure):
        m = moments(mixed_measure)
        vs = np.linspace(-3, 3, 7)
        slopes = np.diff(effective_velocity(vs, m)) / np.diff(vs)
        assert np.allclose(slopes, 1.0 + m.sigma)

    def test_diffusion_coefficients(self, setup_a, setup_b):
        assert diffusion_coefficient(1.0, setup_a) == pytest.approx(0.25)
        assert diffusion_coefficient(-1.0, setup_a) == pytest.approx(0.25)
        assert diffusion_coefficient(0.0, setup_b) == pytest.approx(1 / 6)
        assert diffusion_coefficient(1.0, setup_b) == pytest.approx(1 / 4)
        assert diffusion_coefficient(0.3, VelocityLengthMeasure([0.3], [1.0], [1.0], 1.0)) == 0.0

    def test_gamma_examples(self, setup_a, setup_b):
        assert gamma(1.0, -1.0, setup_a) == 0.0
        assert gamma(0.0, 1.0, setup_b) == pytest.approx(1 / 12)
        assert gamma(1.0, 0.0, setup_b) == pytest.approx(1 / 12)
        assert gamma(-1.0, 1.0, setup_b) == 0.0

    def test_gamma_diagonal_is_diffusion(self, setup_b, mixed_measure):
        for mu in (setup_b, mixed_measure):
            for v in mu.v:
                assert gamma(v, v, mu) == pytest.approx(diffusion_coefficient(v, mu), rel=1e-14)

    def test_gamma_forms_agree_on_random_measures(self):
        rng = np.random.default_rng(5)
        for _ in range(1000):
            mu = random_measure(rng)
            v, w = rng.normal(0.0, 2.0, 2)
            g = gamma(v, w, mu)
            assert g >= 0.0
            assert g <= math.sqrt(diffusion_coefficient(v, mu) * diffusion_coefficient(w, mu)) + 1e-12

    def test_gamma_matrix_is_positive_semidefinite(self, setup_b, mixed_measure):
        for mu in (setup_b, mixed_measure):
            g = gamma_matrix(mu)
            assert np.allclose(g, g.T)
            assert np.min(np.linalg.eigvalsh(g)) > -1e-12

    def test_wiener_correlation(self, setup_a, setup_b):
        assert wiener_correlation(1.0, -1.0, setup_a) == 0.0
        assert wiener_correlation(1.0, 1.0, setup_a) == pytest.approx(1.0)
        assert wiener_correlation(0.0, 1.0, setup_b) == pytest.approx((1 / 12) / math.sqrt(1 / 24))
        single = VelocityLengthMeasure([0.0], [1.0], [1.0], 1.0)
        assert wiener_correlation(0.0, 0.0, single) == 0.0


class TestObservables:
    def test_cosine_bump_shape(self):
        bump = CosineBump(1.0, 2.0)
        assert bump.support == (0.0, 2.0)
        assert bump(1.0) == pytest.approx(1.0)
        assert bump(0.5) == pytest.approx(0.5)
        assert bump(np.array([-1.0, 3.0])).tolist() == [0.0, 0.0]

    def test_truncated_gaussian_vanishes_at_cut(self):
        g = TruncatedGaussian(0.0, 0.5)
        assert g.support == (-3.0, 3.0)
        assert g(3.0) == pytest.approx(0.0, abs=1e-15)
        assert g(3.5) == 0.0
        assert g(0.0) == pytest.approx(1.0 - math.exp(-18.0))

    def test_observable_evaluation(self, setup_a):
        phi = FieldObservable(CosineBump(0.0, 2.0), [0.0, 2.0], r_power=1)
        vals = phi(np.array([0.0, 0.0, 0.5]), np.array([0, 1, 1]), setup_a.r)
        assert vals.tolist() == pytest.approx([0.0, 1.0, 0.5])

    def test_transported_support_and_values(self, setup_a):
        phi = FieldObservable.bump(0.0, 2.0, [1.0, 1.0])
        moved = phi.transported([-1.5, 1.5])
        assert moved.support == (-2.5, 2.5)
        assert moved(np.array([1.5]), np.array([0]), setup_a.r)[0] == pytest.approx(1.0)
        assert moved(np.array([-1.5]), np.array([1]), setup_a.r)[0] == pytest.approx(1.0)


class TestExpectations:
    def test_length_mean_and_second_moment(self, setup_a):
        phi = FieldObservable.bump(0.0, 2.0, [1.0, 1.0])
        assert length_mean(phi, setup_a) == pytest.approx(0.5, rel=1e-9)
        assert second_moment(phi, phi, setup_a) == pytest.approx(0.25 * 0.75, rel=1e-9)

    def test_disjoint_second_moment_is_zero(self, setup_a):
        phi = FieldObservable.bump(0.0, 2.0, [1.0, 1.0])
        psi = FieldObservable.bump(5.0, 2.0, [1.0, 1.0])
        assert second_moment(phi, psi, setup_a) == 0.0

    def test_plane_wave_mean_vanishes_on_whole_wavelengths(self, setup_a):
        phi = FieldObservable.on_atom(PlaneWave(2.0, CosineBump(5.0, 5.0)), 1, 2)
        assert abs(length_mean(phi, setup_a)) < 1e-8

    def test_quadrature_failure_is_reported(self, setup_a):
        @dataclass(frozen=True)
        class Wild:
            is_complex = False
            support = (0.0, 100.0)

            def __call__(self, y):
                return np.sin(1e5 * np.asarray(y, dtype=float)) + 1.0

        with pytest.raises(QuadratureError):
            length_mean(FieldObservable(Wild(), [1.0, 1.0]), setup_a)


class TestOperators:
    def test_p_two_velocity_example(self, setup_a, m_a):
        phi = FieldObservable.bump(0.0, 2.0, [0.3, 1.7])
        p = apply_p(phi, setup_a, m_a)
        expected = 0.5 / (2 * 1.5) * (0.3 + 1.7)
        assert p.selector.tolist() == pytest.approx([expected, expected])

    def test_c_two_velocity_example(self, setup_a, m_a):
        rho_a = 0.5
        alpha, beta = 0.3, 1.7
        c = apply_c(FieldObservable.bump(0.0, 2.0, [alpha, beta]), setup_a, m_a)
        keep = (2 + rho_a) / (2 * (1 + rho_a))
        swap = rho_a / (2 * (1 + rho_a))
        assert c.selector.tolist() == pytest.approx([keep * alpha - swap * beta, keep * beta - swap * alpha])

    def test_p_twice_scales_by_sigma_ratio(self, mixed_measure):
        m = moments(mixed_measure)
        phi = FieldObservable.bump(0.0, 1.0, [0.4, -1.0, 2.0])
        once = apply_p(phi, mixed_measure, m)
        twice = apply_p(once, mixed_measure, m)
        ys = np.linspace(-0.6, 0.6, 41)
        atoms = np.zeros(ys.size, dtype=int)
        assert np.allclose(twice(ys, atoms, mixed_measure.r),
                           m.sigma / (1 + m.sigma) * once(ys, atoms, mixed_measure.r), atol=1e-10)

    def test_c_of_velocity_blind_observable(self, mixed_measure):
        m = moments(mixed_measure)
        c = apply_c(FieldObservable.bump(0.0, 1.0, [1.0, 1.0, 1.0]), mixed_measure, m)
        assert np.allclose(c.selector, 1.0 / (1.0 + m.sigma))

    def test_zero_observable(self, setup_a, m_a):
        zero = FieldObservable.bump(0.0, 1.0, [0.0, 0.0])
        assert np.all(apply_p(zero, setup_a, m_a).selector == 0.0)
        assert np.all(apply_c(zero, setup_a, m_a).selector == 0.0)

    def test_operators_reject_transported_observables(self, setup_a, m_a):
        moved = FieldObservable.bump(0.0, 1.0, [1.0, 1.0]).transported([0.5, -0.5])
        with pytest.raises(ValueError):
            apply_p(moved, setup_a, m_a)
        with pytest.raises(ValueError):
            apply_c(moved, setup_a, m_a)


class TestStaticCovariance:
    def test_two_velocity_hand_expansion(self, setup_a, m_a):
        phi = FieldObservable.bump(3.0, 2.0, [0.0, 1.0])
        # C phi has weights -1/6 and 5/6 on the two atoms; the bump squared integrates to 3/4
        expected = 1.0 / 1.5 * (0.5 * 0.25) * ((1 / 6) ** 2 + (5 / 6) ** 2) * 0.75
        assert static_covariance(phi, phi, setup_a, m_a) == pytest.approx(expected, rel=1e-8)

    def test_zero_lengths_give_zero_covariance(self):
        mu = VelocityLengthMeasure([-1.0, 1.0], [0.0, 0.0], [0.5, 0.5], 1.0)
        phi = FieldObservable.bump(0.0, 1.0, [1.0, 0.0])
        assert static_covariance(phi, phi, mu, moments(mu)) == 0.0

    def test_symmetric(self, mixed_measure):
        m = moments(mixed_measure)
        phi = FieldObservable.bump(0.0, 2.0, [1.0, 0.0, 0.5])
        psi = FieldObservable(TruncatedGaussian(0.5, 0.3), [0.0, 1.0, 1.0])
        assert static_covariance(phi, psi, mixed_measure, m) == pytest.approx(
            static_covariance(psi, phi, mixed_measure, m), rel=1e-7)

    def test_spectral_form_agrees(self, setup_a, m_a, mixed_measure):
        phi = FieldObservable.bump(3.0, 2.0, [0.0, 1.0])
        assert static_covariance_spectral(phi, phi, setup_a, m_a) == pytest.approx(
            static_covariance(phi, phi, setup_a, m_a), rel=1e-6)
        m = moments(mixed_measure)
        a = FieldObservable.bump(0.0, 2.0, [1.0, -0.5, 0.2])
        b = FieldObservable.bump(0.7, 1.5, [0.3, 1.0, 0.0])
        assert static_covariance_spectral(a, b, mixed_measure, m) == pytest.approx(
            static_covariance(a, b, mixed_measure, m), rel=1e-6)

    def test_plane_wave_covariance_uses_modulus(self, setup_a, m_a):
        env = CosineBump(5.0, 5.0)
        wave = FieldObservable.on_atom(PlaneWave(2.0, env), 1, 2)
        plain = FieldObservable.on_atom(env, 1, 2)
        assert static_covariance(wave, wave, setup_a, m_a) == pytest.approx(
            static_covariance(plain, plain, setup_a, m_a), rel=1e-7)


def bump_overlap(width, shift):
    """Integral of a cosine bump against its copy shifted by `shift` < width."""
    a = 2 * math.pi / width
    return 0.25 * ((width - shift) * (1 + 0.5 * math.cos(a * shift)) + 1.5 * math.sin(a * shift) / a)


class TestTransportResidual:
    # Setup A: both atoms selected, crossing shift (1 + sigma) * 2 * t = 1.5 at t = 0.5
    @pytest.mark.parametrize("width", [2.0, 8.0])
    def test_two_velocity_closed_form(self, setup_a, m_a, width):
        phi = FieldObservable.bump(3.0, width, [1.0, 1.0])
        expected = (3 * width / 8 - bump_overlap(width, 1.5)) / 108
        assert transport_residual_variance(phi, setup_a, m_a, 0.5) == pytest.approx(expected, rel=1e-6)

    def test_narrow_bump_value(self, setup_a, m_a):
        phi = FieldObservable.bump(3.0, 2.0, [1.0, 1.0])
        expected = (0.75 - (0.125 - 0.375 / math.pi)) / 108
        assert transport_residual_variance(phi, setup_a, m_a, 0.5) == pytest.approx(expected, rel=1e-6)
        assert expected == pytest.approx(0.00689228, rel=1e-5)

    def test_small_against_field_for_wide_bump(self, setup_a, m_a):
        phi = FieldObservable.bump(0.0, 8.0, [1.0, 1.0])
        field = static_covariance(phi, phi, setup_a, m_a)
        assert transport_residual_variance(phi, setup_a, m_a, 0.5) < 0.05 * field

    def test_zero_time(self, setup_a, m_a):
        assert transport_residual_variance(FieldObservable.bump(0.0, 2.0, [1.0, 1.0]), setup_a, m_a, 0.0) == 0.0

    def test_single_velocity_has_no_residual(self):
        mu = VelocityLengthMeasure([1.0], [0.5], [1.0], 1.0)
        assert transport_residual_variance(FieldObservable.bump(0.0, 2.0), mu, moments(mu), 1.0) == 0.0

    def test_rejects_transported_complex_and_negative_time(self, setup_a, m_a):
        phi = FieldObservable.bump(0.0, 2.0, [1.0, 1.0])
        wave = FieldObservable.on_atom(PlaneWave(2.0, CosineBump(5.0, 5.0)), 1, 2)
        with pytest.raises(ValueError):
            transport_residual_variance(phi.transported(np.array([0.1, -0.1])), setup_a, m_a, 0.5)
        with pytest.raises(ValueError):
            transport_residual_variance(wave, setup_a, m_a, 0.5)
        with pytest.raises(ValueError):
            transport_residual_variance(phi, setup_a, m_a, -1.0)
