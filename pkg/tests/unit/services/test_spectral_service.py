"""
Tests for Monte Carlo moments and level-density histograms.
"""

import numpy as np
import pytest

from src.models.ensemble import EnsembleParams, HermitianMatrix
from src.models.fock import Statistics
from src.services import spectral_service
from src.services.ensemble_service import InvalidEnsembleParamsError
from src.services.spectral_service import EigensolverError, InsufficientSamplesError
from src.utils.errors import EmbeddedEnsembleError


class TestSpectra:
    def test_eigenvalues_ascending(self):
        matrix = HermitianMatrix(np.array([[0.0, 1.0], [1.0, 0.0]]))

        assert np.allclose(spectral_service.eigenvalues(matrix), [-1.0, 1.0])

    def test_non_finite_matrix_raises(self):
        """
        Protects against: NaN couplings surfacing as a LAPACK traceback.
        """
        matrix = HermitianMatrix(np.array([[np.nan, 0.0], [0.0, 1.0]]))

        with pytest.raises(EigensolverError):
            spectral_service.eigenvalues(matrix)

    def test_realization_traces(self):
        matrix = HermitianMatrix(np.diag([1.0, -1.0, 2.0, 0.0]))

        assert spectral_service.realization_traces(matrix, [1, 2, 4]) == pytest.approx([0.5, 1.5, 4.5])

    def test_sample_order_is_index_order(self, small_params: EnsembleParams):
        spectra = spectral_service.sample_spectra(small_params, 3, seed=5, workers=2)
        second = spectral_service.eigenvalues(spectral_service.ensemble_service.sample_hamiltonian(small_params, 5, 1))

        assert len(spectra) == 3
        assert np.array_equal(spectra[1], second)


class TestSemicircle:
    def test_lambda0(self):
        assert spectral_service.lambda0(4, 3, 12) == 660
        assert spectral_service.lambda0(3, 0, 6) == 1

    def test_lambda0_domain(self):
        with pytest.raises(InvalidEnsembleParamsError):
            spectral_service.lambda0(4, 5, 12)

    def test_radius_scales_with_v0(self):
        params = EnsembleParams(beta=2, k=3, m=4, l=12, v0=0.5)

        assert spectral_service.semicircle_radius(params) == pytest.approx(np.sqrt(660))

    def test_fermionic_second_moment_is_lambda0(self, small_params: EnsembleParams):
        assert spectral_service.second_moment_per_state(small_params) == 8.0

    def test_bosonic_second_moment_counts_occupations(self):
        """
        Protects against: Bosonic radii taken from the fermionic move count, which rejects m > l.

        States |3,0>, |2,1>, |1,2>, |0,3> give m^2 + m(l-1) = 12 each at k=1.
        """
        params = EnsembleParams(beta=2, k=1, m=3, l=2, statistics=Statistics.BOSONIC)

        assert spectral_service.second_moment_per_state(params) == pytest.approx(12.0)
        assert spectral_service.semicircle_radius(params) == pytest.approx(2.0 * np.sqrt(12.0))

    def test_bosonic_radius_matches_sampled_second_trace(self):
        # Given
        params = EnsembleParams(beta=2, k=1, m=3, l=2, statistics=Statistics.BOSONIC)

        # When
        spectra = spectral_service.sample_spectra(params, 400, seed=8)
        sampled = np.mean([spectral_service.normalized_traces(s, [2])[0] for s in spectra])

        # Then
        assert sampled == pytest.approx(spectral_service.second_moment_per_state(params), rel=0.15)

    def test_density_has_unit_mass(self):
        x = np.linspace(-2.5, 2.5, 100001)
        mass = float(np.sum(spectral_service.semicircle_density(x, 2.5)) * (x[1] - x[0]))

        assert mass == pytest.approx(1.0, abs=1e-3)
        assert np.diff(spectral_service._semicircle_cdf(np.array([-2.5, 2.5]), 2.5))[0] == pytest.approx(1.0)
        assert spectral_service.semicircle_density(3.0, 2.5) == 0.0


class TestMomentEstimates:
    """Test ratio-of-means moment estimates."""

    def test_ratio_estimate_and_error(self):
        """
        Test X = [2, 4], Y = [1, 1]: estimate 3 and standard error sqrt(2 / 2).
        """
        estimate = spectral_service._ratio_estimate(np.array([2.0, 4.0]), np.array([1.0, 1.0]), 1.0, 4)

        assert estimate.estimate == pytest.approx(3.0)
        assert estimate.std_error == pytest.approx(1.0)
        assert estimate.samples == 2

    def test_report_contents(self, small_params: EnsembleParams):
        report = spectral_service.estimate_moments(small_params, [4, 6], samples=6, seed=3)

        assert [e.order for e in report.estimates] == [4, 6]
        assert [e.order for e in report.odd_moments] == [1, 3]
        assert report.for_order(4).estimate > 1.0
        assert report.for_order(4).std_error >= 0.0
        with pytest.raises(KeyError):
            report.for_order(8)

    def test_results_independent_of_workers(self, small_params: EnsembleParams):
        """
        Protects against: Thread scheduling changing which stream feeds which sample.
        """
        serial = spectral_service.estimate_moments(small_params, [4], samples=8, seed=13, workers=1)
        pooled = spectral_service.estimate_moments(small_params, [4], samples=8, seed=13, workers=4)

        assert serial.to_dict() == pooled.to_dict()

    def test_standard_error_shrinks_like_inverse_root_samples(self, small_params: EnsembleParams):
        """
        Protects against: An error bar that ignores the sample count.
        """
        # Given
        few = spectral_service.estimate_moments(small_params, [4], samples=100, seed=21)
        many = spectral_service.estimate_moments(small_params, [4], samples=400, seed=21)

        # When
        ratio = few.for_order(4).std_error / many.for_order(4).std_error

        # Then
        assert 1.3 < ratio < 3.0

    def test_zero_coupling_scale_has_no_moments(self):
        params = EnsembleParams(beta=2, k=1, m=2, l=5, v0=0.0)

        with pytest.raises(InsufficientSamplesError, match="second trace is zero"):
            spectral_service.estimate_moments(params, [4], samples=4, seed=1)

    def test_too_few_samples(self, small_params: EnsembleParams):
        with pytest.raises(InsufficientSamplesError):
            spectral_service.estimate_moments(small_params, [4], samples=1, seed=1)

    def test_odd_order_rejected(self, small_params: EnsembleParams):
        with pytest.raises(InvalidEnsembleParamsError):
            spectral_service.estimate_moments(small_params, [3], samples=4, seed=1)

    def test_invalid_params_rejected_before_sampling(self):
        with pytest.raises(InvalidEnsembleParamsError, match="k exceeds m"):
            spectral_service.estimate_moments(EnsembleParams(beta=2, k=3, m=2, l=5), [4], samples=4, seed=1)


class TestDensity:
    """Test pooled-eigenvalue histograms."""

    def test_histogram_is_unit_normalised(self):
        params = EnsembleParams(beta=2, k=2, m=3, l=6)

        histogram = spectral_service.empirical_density(params, samples=3, bins=20, seed=2)

        assert histogram.total_mass() == pytest.approx(1.0)
        assert len(histogram.edges) == 21
        assert histogram.edges[0] == pytest.approx(-histogram.edges[-1])
        assert histogram.overlay_heights is not None
        assert np.sum(histogram.overlay_heights * histogram.widths) == pytest.approx(1.0)

    def test_overlay_outside_canonical_domain_warns(self, small_params: EnsembleParams, mocker):
        warning = mocker.patch("src.services.spectral_service.logger.warning")

        spectral_service.empirical_density(small_params, samples=2, bins=10, seed=2)

        assert any("canonical domain" in call.args[0] for call in warning.call_args_list)

    def test_zero_coupling_scale_puts_every_level_in_the_middle_bin(self):
        """
        Protects against: A zero radius producing empty edges or a division by zero.
        """
        params = EnsembleParams(beta=2, k=1, m=2, l=5, v0=0.0)

        histogram = spectral_service.empirical_density(params, samples=3, bins=5, seed=4)

        assert histogram.counts.tolist() == [0, 0, 30, 0, 0]
        assert histogram.radius is None
        assert histogram.overlay_heights is None
        assert histogram.total_mass() == pytest.approx(1.0)

    def test_eigenvalues_beyond_the_span_are_kept(self, small_params: EnsembleParams, mocker):
        """
        Protects against: Silently dropping tail eigenvalues, which inflates the normalised heights.
        """
        # Given
        mocker.patch.object(spectral_service.config, "get_float", return_value=0.1)
        warning = mocker.patch("src.services.spectral_service.logger.warning")
        pooled = np.concatenate(spectral_service.sample_spectra(small_params, 3, seed=6))

        # When
        histogram = spectral_service.empirical_density(small_params, samples=3, bins=8, seed=6)

        # Then
        assert histogram.counts.sum() == len(pooled)
        assert histogram.edges[-1] == pytest.approx(np.max(np.abs(pooled)))
        assert any("widening" in call.args[0] for call in warning.call_args_list)

    def test_no_overlay(self, small_params: EnsembleParams):
        histogram = spectral_service.empirical_density(small_params, samples=2, bins=10, seed=2, overlay=False)

        assert histogram.overlay_heights is None
        assert histogram.radius is None
        with pytest.raises(EmbeddedEnsembleError):
            spectral_service.l1_distance(histogram)

    def test_frame_columns(self, small_params: EnsembleParams):
        histogram = spectral_service.empirical_density(small_params, samples=2, bins=10, seed=2, overlay=False)

        frame = histogram.to_frame()

        assert list(frame.columns) == ["bin_lo", "bin_hi", "height", "overlay_height"]
        assert frame["overlay_height"].isna().all()

    def test_l1_distance_of_perfect_match_is_zero(self):
        edges = np.linspace(-1.0, 1.0, 5)
        heights = np.full(4, 0.5)
        histogram = spectral_service.DensityHistogram(
            edges=edges, counts=np.ones(4), heights=heights, radius=1.0, overlay_heights=heights.copy()
        )

        assert spectral_service.l1_distance(histogram) == 0.0

    def test_bad_arguments(self, small_params: EnsembleParams):
        with pytest.raises(InsufficientSamplesError):
            spectral_service.empirical_density(small_params, samples=0, bins=10, seed=1)
