import io
import math

import numpy as np
import pytest

from cvqkdsec.constellation import (
    ConstellationSpec,
    build_grid,
    epsilon_a,
    epsilon_p_closed,
    epsilon_p_numeric,
    epsilon_tail,
    grid_to_csv,
)
from cvqkdsec.fock import TruncationPolicy


def riemann_epsilon_p(spec, n_off=800):
    """Independent midpoint-Riemann oracle for the symbol-error integral."""
    d = spec.d
    delta = spec.delta_A
    mid = (2.0 * np.arange(d) + 1.0 - d) * (delta / 2.0)
    x = (np.arange(n_off) + 0.5) / n_off * delta - delta / 2.0
    w = delta / n_off
    dens = np.exp(-((mid[None, :] + x[:, None]) ** 2) / (2 * spec.N))
    g = dens.sum(axis=1) / math.sqrt(2 * math.pi * spec.N)
    r2 = (x[:, None] ** 2 + x[None, :] ** 2) / 2.0
    s = np.sqrt(-np.expm1(-r2))
    return w * w * np.einsum("a,b,ab->", g, g, s)


class TestGrid:
    def test_single_bit_grid(self):
        spec = ConstellationSpec(N=1.0, R_A=2.0, b=1)
        grid = build_grid(spec)
        assert grid.n_points == 4
        # points at (+-R_A/2 +- i R_A/2)/sqrt(2), all weights 1/4
        assert np.allclose(np.sort(grid.midpoints), [-1.0, 1.0])
        assert np.allclose(grid.probabilities(), 0.25)

    def test_reference_grid_shape(self, ref_spec, ref_grid):
        assert ref_grid.n_points == 4096
        assert abs(ref_spec.delta_A - 0.32475952641916450) < 1e-14
        step = np.diff(ref_grid.midpoints)
        assert np.allclose(step, ref_spec.delta_A, rtol=0, atol=1e-12)
        assert abs(ref_grid.midpoints[-1] - (ref_spec.R_A - ref_spec.delta_A / 2)) < 1e-12

    def test_probabilities_normalized(self):
        for b in (1, 3, 6, 9):
            grid = build_grid(ConstellationSpec(N=2.0, R_A=5.0, b=b))
            assert abs(grid.probabilities().sum() - 1.0) < 1e-12

    def test_symmetries_exact(self, ref_grid):
        p = ref_grid.probabilities()
        assert np.array_equal(p, p[::-1, :])
        assert np.array_equal(p, p[:, ::-1])
        assert np.array_equal(p, p.T)
        assert np.array_equal(ref_grid.midpoints, -ref_grid.midpoints[::-1])

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            ConstellationSpec(N=0.0, R_A=1.0, b=4)
        with pytest.raises(ValueError):
            ConstellationSpec(N=1.0, R_A=-1.0, b=4)
        with pytest.raises(ValueError):
            ConstellationSpec(N=1.0, R_A=1.0, b=21)


class TestEpsilonA:
    def test_reference_value(self, ref_eps_a):
        # dominated by the Gaussian mass outside the six-sigma range (~4e-9)
        assert ref_eps_a <= 1e-5
        assert ref_eps_a > 0.0

    def test_truncation_stability(self, ref_grid, ref_eps_a):
        pol = TruncationPolicy(tau_trunc=1e-9)
        n_auto = pol.resolve(thermal_mean=ref_grid.spec.N,
                             max_mean_photons=ref_grid.max_mean_photons)
        bumped = epsilon_a(ref_grid, TruncationPolicy(n_max=int(n_auto * 1.25)))
        assert abs(bumped - ref_eps_a) < 1e-8

    def test_gross_undersampling(self):
        spec = ConstellationSpec(N=3.0, R_A=0.1, b=1)
        assert epsilon_a(build_grid(spec)) > 0.1

    def test_monotone_in_bits(self):
        vals = []
        for b in range(2, 9):
            spec = ConstellationSpec(N=3.0, R_A=6 * math.sqrt(3.0), b=b)
            vals.append(epsilon_a(build_grid(spec)))
        for lo, hi in zip(vals[1:], vals[:-1]):
            assert lo <= hi + 1e-8

    def test_identical_mixture_distance_zero(self):
        # the distance machinery itself returns 0 for a state against itself
        from cvqkdsec.fock import DensityOperator, coherent_amplitudes, trace_distance

        grid = build_grid(ConstellationSpec(N=1.0, R_A=3.0, b=2))
        dim = 24
        sig = np.zeros((dim, dim), dtype=complex)
        for a, p in zip(grid.alphas().ravel(), grid.probabilities().ravel()):
            c = coherent_amplitudes(a, dim)
            sig += p * np.outer(c, c.conj())
        op = DensityOperator(dim, 0.5 * (sig + sig.conj().T))
        assert trace_distance(op, op) <= 1e-12


class TestEpsilonP:
    def test_closed_reference(self, ref_spec):
        val = epsilon_p_closed(ref_spec)
        assert 0.155 <= val <= 0.170
        assert abs(val - ref_spec.delta_A / 2) == 0.0

    def test_closed_eleven_bits(self):
        spec = ConstellationSpec(N=3.0, R_A=6 * math.sqrt(3.0), b=11)
        assert abs(epsilon_p_closed(spec) - 0.0050743676) < 1e-9

    def test_closed_trivial(self):
        assert epsilon_p_closed(ConstellationSpec(N=1.0, R_A=1.0, b=1)) == 0.5

    def test_numeric_matches_independent_riemann(self, ref_spec):
        gl = epsilon_p_numeric(ref_spec)
        oracle = riemann_epsilon_p(ref_spec)
        assert abs(gl - oracle) < 2e-6

    def test_numeric_order_doubling(self, ref_spec):
        assert abs(epsilon_p_numeric(ref_spec, 16) - epsilon_p_numeric(ref_spec, 8)) < 1e-6

    def test_numeric_fine_grid_limit(self):
        spec = ConstellationSpec(N=3.0, R_A=6 * math.sqrt(3.0), b=14)
        val = epsilon_p_numeric(spec)
        assert val < 0.002
        # small-bin asymptote: mean in-bin distance = 0.27055 delta_A
        assert abs(val - 0.27055 * spec.delta_A) < 0.01 * spec.delta_A

    def test_numeric_within_closed_envelope(self):
        prev = None
        for b in (4, 6, 8, 10):
            spec = ConstellationSpec(N=3.0, R_A=6 * math.sqrt(3.0), b=b)
            num = epsilon_p_numeric(spec)
            assert num <= epsilon_p_closed(spec) * 1.2
            if prev is not None:
                assert num < prev
            prev = num

    def test_eps_a_below_eps_p(self):
        for b in range(2, 7):
            spec = ConstellationSpec(N=3.0, R_A=6 * math.sqrt(3.0), b=b)
            assert epsilon_a(build_grid(spec)) <= epsilon_p_numeric(spec) + 1e-6

    def test_order_validation(self, ref_spec):
        with pytest.raises(ValueError):
            epsilon_p_numeric(ref_spec, 1)


class TestEpsilonTail:
    def test_reference_value(self):
        # sqrt(3/2pi) e^{-18}, frozen from a 40-digit evaluation
        assert abs(epsilon_tail(6 * math.sqrt(3.0), 3.0) - 1.052373779673031e-08) < 1e-20

    def test_limits(self):
        assert epsilon_tail(1e3, 3.0) == 0.0  # underflows to exactly zero
        assert abs(epsilon_tail(0.0, 3.0) - math.sqrt(3.0 / (2 * math.pi))) < 1e-15

    def test_validation(self):
        with pytest.raises(ValueError):
            epsilon_tail(-1.0, 3.0)
        with pytest.raises(ValueError):
            epsilon_tail(1.0, 0.0)


class TestCsvExport:
    def test_roundtrip(self):
        grid = build_grid(ConstellationSpec(N=2.0, R_A=4.0, b=3))
        buf = io.StringIO()
        grid_to_csv(grid, buf)
        lines = buf.getvalue().splitlines()
        assert lines[0].startswith("# schema=cvqkdsec-grid-")
        assert lines[1] == "j,k,q_Aj,p_Ak,re_alpha,im_alpha,p_jk"
        rows = [line.split(",") for line in lines[2:]]
        assert len(rows) == 64
        total = sum(float(r[6]) for r in rows)
        assert abs(total - 1.0) < 1e-12
        # amplitude convention: re(alpha) = q / sqrt(2)
        r0 = rows[0]
        assert abs(float(r0[4]) - float(r0[2]) / math.sqrt(2)) < 1e-15
