import math

import numpy as np
import pytest

from cvqkdsec.fock import (
    DensityOperator,
    ResourceError,
    TruncationPolicy,
    coherent_trace_distance,
    coherent_vector,
    thermal_state,
    trace_distance,
)


def random_density(rng, dim):
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    m = a @ a.conj().T
    return DensityOperator(dim, m / np.trace(m).real)


def dephase(rho: DensityOperator) -> DensityOperator:
    """Projective dephasing onto the Fock basis (a pinching map)."""
    return DensityOperator(rho.dim, np.diag(np.diag(rho.matrix)))


class TestCoherentVector:
    def test_vacuum(self):
        v = coherent_vector(0.0)
        assert v.amps[0] == 1.0
        assert np.all(v.amps[1:] == 0.0)

    def test_unit_amplitude_ground_coefficient(self):
        # e^{-|alpha|^2 / 2} at alpha = 1
        v = coherent_vector(1.0)
        assert abs(v.amps[0] - math.exp(-0.5)) < 1e-15

    def test_norm_tail(self):
        # Poisson tail with mean 4 beyond n = 40 is far below 1e-9
        v = coherent_vector(2.0, TruncationPolicy(n_max=40))
        assert v.norm_squared() >= 1.0 - 1e-9

    def test_auto_norm_respects_tolerance(self):
        for alpha in (0.5, 2.0, 3.5 + 1.0j):
            v = coherent_vector(alpha, TruncationPolicy(tau_trunc=1e-9))
            assert v.norm_squared() >= 1.0 - 1e-9

    def test_amplitude_too_large(self):
        with pytest.raises(ResourceError):
            coherent_vector(80.0)  # needs n_max beyond the cap


class TestThermalState:
    def test_zero_photons_is_vacuum_projector(self):
        th = thermal_state(0.0)
        assert th.matrix[0, 0] == 1.0
        assert np.abs(th.matrix).sum() == 1.0

    def test_unit_mean_ground_entry(self):
        th = thermal_state(1.0)
        assert abs(th.matrix[0, 0].real - 0.5) < 1e-15

    def test_auto_trace(self):
        th = thermal_state(3.0, TruncationPolicy(tau_trunc=1e-9))
        assert th.trace() >= 1.0 - 1e-9

    def test_negative_mean_rejected(self):
        with pytest.raises(ValueError):
            thermal_state(-0.1)


class TestTraceDistance:
    def test_self_distance_zero(self):
        th = thermal_state(2.0)
        assert trace_distance(th, th) <= 1e-12

    def test_orthogonal_pure_states(self):
        a = DensityOperator(2, np.diag([1.0, 0.0]).astype(complex))
        b = DensityOperator(2, np.diag([0.0, 1.0]).astype(complex))
        assert abs(trace_distance(a, b) - 1.0) < 1e-12

    def test_dim_mismatch(self):
        a = DensityOperator(2, np.eye(2, dtype=complex) / 2)
        b = DensityOperator(3, np.eye(3, dtype=complex) / 3)
        with pytest.raises(ValueError):
            trace_distance(a, b)

    def test_hermiticity_enforced(self):
        m = np.array([[0.5, 0.1], [0.3, 0.5]], dtype=complex)
        with pytest.raises(ValueError):
            DensityOperator(2, m)

    def test_axioms_on_random_operators(self):
        rng = np.random.default_rng(20240811)
        for _ in range(100):
            dim = int(rng.integers(2, 17))
            rho, sig, tau = (random_density(rng, dim) for _ in range(3))
            d_rs = trace_distance(rho, sig)
            assert trace_distance(rho, rho) <= 1e-12
            assert abs(d_rs - trace_distance(sig, rho)) < 1e-12
            assert d_rs <= trace_distance(rho, tau) + trace_distance(tau, sig) + 1e-10
            assert -1e-12 <= d_rs <= 1.0 + 1e-12

    def test_pinching_monotonicity(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            dim = int(rng.integers(2, 17))
            rho, sig = random_density(rng, dim), random_density(rng, dim)
            assert (trace_distance(dephase(rho), dephase(sig))
                    <= trace_distance(rho, sig) + 1e-10)


class TestCoherentTraceDistance:
    def test_identical(self):
        assert coherent_trace_distance(0.7 + 0.1j, 0.7 + 0.1j) == 0.0

    def test_half_overlap_point(self):
        # |alpha - alpha'|^2 = ln 2 makes e^{-x} = 1/2 exactly
        sep = math.sqrt(math.log(2.0))
        assert abs(coherent_trace_distance(0.0, sep) - math.sqrt(0.5)) < 1e-12

    def test_distant_states_saturate(self):
        assert abs(coherent_trace_distance(0.0, 30.0) - 1.0) < 1e-12

    @pytest.mark.parametrize("pair", [
        (0.0, 0.3), (1.0, 1.2 + 0.4j), (-2.0 + 1.0j, -1.7 + 0.8j),
        (3.5, 4.0), (2.0j, 1.5j), (4.0, -4.0),
    ])
    def test_matches_matrix_computation(self, pair):
        a, b = pair
        policy = TruncationPolicy(tau_trunc=1e-12)
        dim = max(coherent_vector(a, policy).dim, coherent_vector(b, policy).dim)
        fixed = TruncationPolicy(n_max=dim - 1)
        pa = coherent_vector(a, fixed).projector()
        pb = coherent_vector(b, fixed).projector()
        assert abs(trace_distance(pa, pb) - coherent_trace_distance(a, b)) < 1e-6

    def test_truncation_stability(self):
        # +25% cutoff moves the matrix-side distance by far less than 10 tau
        policy = TruncationPolicy(tau_trunc=1e-9)
        dim = coherent_vector(2.0 + 1.0j, policy).dim
        vals = []
        for d in (dim, int(dim * 1.25) + 1):
            fixed = TruncationPolicy(n_max=d - 1)
            pa = coherent_vector(2.0 + 1.0j, fixed).projector()
            pb = coherent_vector(1.4 + 0.9j, fixed).projector()
            vals.append(trace_distance(pa, pb))
        assert abs(vals[1] - vals[0]) < 10e-9


class TestTruncationPolicy:
    def test_explicit_cutoff_passthrough(self):
        assert TruncationPolicy(n_max=25).resolve(thermal_mean=100.0) == 25

    def test_auto_meets_both_tails(self):
        from scipy import stats

        pol = TruncationPolicy(tau_trunc=1e-9)
        n = pol.resolve(thermal_mean=3.0, max_mean_photons=100.0)
        assert (3.0 / 4.0) ** (n + 1) < 1e-9
        assert stats.poisson.sf(n, 100.0) < 1e-9

    def test_psd_warning_path(self):
        bad = np.diag([1.0, -1e-6]).astype(complex)
        with pytest.warns(RuntimeWarning):
            DensityOperator(2, bad).validate()
