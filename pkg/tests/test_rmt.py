"""Matrix ensembles: sampling variances, the Jacobi eigensolver, both
spacing constructions, the joint eigenvalue density, and the OU step.

numpy.linalg.eigvalsh appears only as a cross-check oracle for the
hand-rolled Jacobi solver.
"""

import math
from dataclasses import replace

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.stats import ks_2samp

from spacinglab import densities as dn
from spacinglab import rmt
from spacinglab.errors import DomainError, UnsupportedKindError
from spacinglab.streams import stream


def hist_l1(samples, model, bins=50, lo=0.0, hi=4.0):
    counts, edges = np.histogram(samples, bins=bins, range=(lo, hi))
    width = edges[1] - edges[0]
    emp = counts / (len(samples) * width)
    mids = 0.5 * (edges[:-1] + edges[1:])
    return float(np.sum(np.abs(emp - model.pdf(mids)) * width))


class TestEnsembleSpec:
    @pytest.mark.parametrize("beta,n,count", [
        (1, 4, 10), (2, 3, 9), (4, 2, 6), (1, 2, 3), (2, 2, 4),
    ])
    def test_independent_component_count(self, beta, n, count):
        assert rmt.EnsembleSpec(beta, n).independent_count == count

    def test_validation(self):
        with pytest.raises(DomainError):
            rmt.EnsembleSpec(3, 2)
        with pytest.raises(DomainError):
            rmt.EnsembleSpec(1, 1)
        with pytest.raises(DomainError):
            rmt.EnsembleSpec(1, 2, scale2=0.0)
        with pytest.raises(DomainError):
            rmt.EnsembleSpec(1, 2, friction=-1.0)

    def test_quaternion_spec_above_dim2_is_constructible(self):
        # the restriction is on sampling, not on the parameter set
        assert rmt.EnsembleSpec(4, 3).independent_count == 15


class TestMatrixState:
    def test_rejects_non_hermitian(self):
        with pytest.raises(DomainError):
            rmt.MatrixState(1, np.array([[0.0, 1.0], [0.5, 0.0]]))

    def test_rejects_complex_for_orthogonal_class(self):
        m = np.eye(2, dtype=complex)
        with pytest.raises(DomainError):
            rmt.MatrixState(1, m)

    def test_immutable(self):
        state = rmt.MatrixState(1, np.eye(3))
        with pytest.raises(ValueError):
            state.matrix[0, 0] = 5.0

    def test_quaternion_dim(self):
        state = rmt.sample_matrix(rmt.EnsembleSpec(4, 2), stream(0))
        assert state.matrix.shape == (4, 4)
        assert state.dim == 2


class TestSampleMatrix:
    def test_exact_symmetry(self):
        m = rmt.sample_matrix(rmt.EnsembleSpec(1, 5), stream(1)).matrix
        assert np.array_equal(m, m.T)
        h = rmt.sample_matrix(rmt.EnsembleSpec(2, 5), stream(1)).matrix
        assert np.array_equal(h, h.conj().T)

    def test_quaternion_needs_dim2(self):
        with pytest.raises(UnsupportedKindError):
            rmt.sample_matrix(rmt.EnsembleSpec(4, 3), stream(0))

    def test_determinism(self):
        a = rmt.sample_matrix(rmt.EnsembleSpec(2, 4), stream(11)).matrix
        b = rmt.sample_matrix(rmt.EnsembleSpec(2, 4), stream(11)).matrix
        assert np.array_equal(a, b)

    def test_orthogonal_variances(self):
        # Var(diag) = a^2, Var(offdiag) = a^2 / 2
        a2, n_draws = 1.3, 20000
        rng = stream(2)
        draws = np.array([rmt.sample_matrix(rmt.EnsembleSpec(1, 2, a2), rng).matrix
                          for _ in range(n_draws)])
        se = a2 * math.sqrt(2.0 / n_draws)
        assert abs(np.var(draws[:, 0, 0]) - a2) < 3 * se
        assert abs(np.var(draws[:, 1, 1]) - a2) < 3 * se
        assert abs(np.var(draws[:, 0, 1]) - a2 / 2) < 3 * se / 2

    def test_unitary_variances(self):
        a2, n_draws = 0.8, 20000
        rng = stream(3)
        draws = np.array([rmt.sample_matrix(rmt.EnsembleSpec(2, 3, a2), rng).matrix
                          for _ in range(n_draws)])
        se = a2 * math.sqrt(2.0 / n_draws)
        assert abs(np.var(draws[:, 0, 0].real) - a2 / 2) < 3 * se / 2
        assert abs(np.var(draws[:, 0, 1].real) - a2 / 4) < 3 * se / 4
        assert abs(np.var(draws[:, 1, 2].imag) - a2 / 4) < 3 * se / 4
        assert np.all(draws[:, 0, 0].imag == 0.0)

    def test_quaternion_variances(self):
        a2, n_draws = 1.0, 20000
        rng = stream(4)
        draws = np.array([rmt.sample_matrix(rmt.EnsembleSpec(4, 2, a2), rng).matrix
                          for _ in range(n_draws)])
        se = a2 * math.sqrt(2.0 / n_draws)
        # diag blocks carry a^2/4, each quaternion component a^2/8
        assert abs(np.var(draws[:, 0, 0].real) - a2 / 4) < 3 * se / 4
        assert abs(np.var(draws[:, 2, 2].real) - a2 / 4) < 3 * se / 4
        assert abs(np.var(draws[:, 0, 2].real) - a2 / 8) < 3 * se / 8
        assert abs(np.var(draws[:, 0, 3].imag) - a2 / 8) < 3 * se / 8


class TestEigenvalues:
    def test_identity(self):
        assert_allclose(rmt.eigenvalues(rmt.MatrixState(1, np.eye(3))),
                        (1.0, 1.0, 1.0), atol=1e-15)

    def test_exact_two_by_two(self):
        state = rmt.MatrixState(1, np.array([[0.0, 1.0], [1.0, 0.0]]))
        assert_allclose(rmt.eigenvalues(state), (-1.0, 1.0), atol=1e-14)

    def test_tridiagonal_closed_form(self):
        m = np.array([[2.0, 1.0, 0.0], [1.0, 2.0, 1.0], [0.0, 1.0, 2.0]])
        want = (2.0 - math.sqrt(2.0), 2.0, 2.0 + math.sqrt(2.0))
        assert_allclose(rmt.eigenvalues(rmt.MatrixState(1, m)), want, atol=1e-12)

    def test_zero_matrix(self):
        assert_allclose(rmt.eigenvalues(rmt.MatrixState(1, np.zeros((4, 4)))),
                        np.zeros(4), atol=0.0)

    def test_trace_identities_random_symmetric(self):
        rng = stream(5)
        g = rng.normal(size=(8, 8))
        m = g + g.T
        eigs = rmt.eigenvalues(rmt.MatrixState(1, m))
        assert abs(np.sum(eigs) - np.trace(m)) < 1e-10
        assert abs(np.sum(eigs ** 2) - np.trace(m @ m)) < 1e-10
        assert_allclose(eigs, np.linalg.eigvalsh(m), atol=1e-10)

    def test_hermitian_against_library(self):
        rng = stream(6)
        g = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
        m = g + g.conj().T
        eigs = rmt.eigenvalues(rmt.MatrixState(2, m))
        assert eigs.shape == (6,)
        assert_allclose(eigs, np.linalg.eigvalsh(m), atol=1e-10)
        assert abs(np.sum(eigs) - np.trace(m).real) < 1e-10

    def test_large_case_converges(self):
        rng = stream(7)
        g = rng.normal(size=(64, 64))
        m = g + g.T
        eigs = rmt.eigenvalues(rmt.MatrixState(1, m))
        assert_allclose(eigs, np.linalg.eigvalsh(m), atol=1e-8)

    def test_dimension_cap(self):
        m = np.eye(65)
        with pytest.raises(DomainError):
            rmt.eigenvalues(rmt.MatrixState(1, m))

    def test_cache_wins(self):
        state = rmt.MatrixState(1, np.eye(2))
        cached = replace(state, eigenvalues=(5.0, 7.0))
        assert_allclose(rmt.eigenvalues(cached), (5.0, 7.0))

    def test_quaternion_kramers_levels(self):
        rng = stream(8)
        spec = rmt.EnsembleSpec(4, 2)
        for _ in range(200):
            state = rmt.sample_matrix(spec, rng)
            eigs = rmt.eigenvalues(state)
            assert eigs.shape == (2,)
            m = state.matrix
            half = (m[0, 0].real - m[2, 2].real) / 2.0
            q2 = abs(m[0, 2]) ** 2 + abs(m[0, 3]) ** 2
            gap = 2.0 * math.sqrt(half * half + q2)
            assert abs((eigs[1] - eigs[0]) - gap) < 1e-12
            mean = (m[0, 0].real + m[2, 2].real) / 2.0
            assert abs((eigs[0] + eigs[1]) / 2.0 - mean) < 1e-12


class TestSpacingFromMatrix:
    def test_needs_dim_two(self):
        with pytest.raises(DomainError):
            rmt.spacing_from_matrix(rmt.EnsembleSpec(1, 3), stream(0), 10)

    def test_count_validation(self):
        with pytest.raises(DomainError):
            rmt.spacing_from_matrix(rmt.EnsembleSpec(1, 2), stream(0), 0)

    def test_unit_mean(self):
        s = rmt.spacing_from_matrix(rmt.EnsembleSpec(2, 2), stream(9), 4000)
        assert abs(s.mean() - 1.0) < 1e-12
        assert np.all(s >= 0.0)

    @pytest.mark.parametrize("beta,label,seed", [
        (1, "GOE", 101), (2, "GUE", 102), (4, "GSE", 104),
    ])
    def test_histogram_matches_surmise(self, beta, label, seed):
        s = rmt.spacing_from_matrix(rmt.EnsembleSpec(beta, 2), stream(seed), 100000)
        assert hist_l1(s, dn.surmise_catalog()[label]) < 0.02

    def test_scale_invariance(self):
        # unit-mean rescale removes a^2 entirely
        a = rmt.spacing_from_matrix(rmt.EnsembleSpec(1, 2, scale2=1.0), stream(10), 2000)
        b = rmt.spacing_from_matrix(rmt.EnsembleSpec(1, 2, scale2=9.0), stream(10), 2000)
        assert_allclose(a, b, atol=1e-12)

    def test_gap_algebra_matches_eigensolver(self):
        rng = stream(12)
        for beta in (1, 2, 4):
            spec = rmt.EnsembleSpec(beta, 2, scale2=0.7)
            for _ in range(100):
                state = rmt.sample_matrix(spec, rng)
                eigs = rmt.eigenvalues(state)
                m = state.matrix
                if beta == 1:
                    gap = math.sqrt((m[0, 0] - m[1, 1]) ** 2 + 4.0 * m[0, 1] ** 2)
                elif beta == 2:
                    gap = math.sqrt((m[0, 0].real - m[1, 1].real) ** 2
                                    + 4.0 * abs(m[0, 1]) ** 2)
                else:
                    gap = math.sqrt((m[0, 0].real - m[2, 2].real) ** 2
                                    + 4.0 * (abs(m[0, 2]) ** 2 + abs(m[0, 3]) ** 2))
                assert abs((eigs[-1] - eigs[0]) - gap) < 1e-12


class TestSpacingFromComponents:
    def test_validation(self):
        with pytest.raises(DomainError):
            rmt.spacing_from_components(1, stream(0), 10)
        with pytest.raises(DomainError):
            rmt.spacing_from_components(6, stream(0), 10)

    def test_unit_mean(self):
        s = rmt.spacing_from_components(3, stream(13), 5000)
        assert abs(s.mean() - 1.0) < 1e-12

    @pytest.mark.parametrize("k,label,seed", [
        (2, "GOE", 201), (3, "GUE", 202), (4, "Ginibre", 203), (5, "GSE", 204),
    ])
    def test_histogram_matches_surmise(self, k, label, seed):
        s = rmt.spacing_from_components(k, stream(seed), 100000)
        assert hist_l1(s, dn.surmise_catalog()[label]) < 0.02

    @pytest.mark.parametrize("beta,k,seed", [(1, 2, 301), (2, 3, 302), (4, 5, 304)])
    def test_routes_agree_in_distribution(self, beta, k, seed):
        a = rmt.spacing_from_matrix(rmt.EnsembleSpec(beta, 2), stream(seed, 0), 100000)
        b = rmt.spacing_from_components(k, stream(seed, 1), 100000)
        assert ks_2samp(a, b).statistic < 0.01


class TestJointLogDensity:
    def test_coincident_pair(self):
        spec = rmt.EnsembleSpec(1, 2)
        assert rmt.joint_eigen_logdensity(spec, (0.5, 0.5)) == -math.inf

    def test_out_of_order(self):
        spec = rmt.EnsembleSpec(1, 3)
        assert rmt.joint_eigen_logdensity(spec, (1.0, 0.0, 2.0)) == -math.inf

    def test_two_level_value(self):
        spec = rmt.EnsembleSpec(1, 2, scale2=1.0)
        got = rmt.joint_eigen_logdensity(spec, (-1.0, 1.0))
        assert_allclose(got, math.log(2.0) - 1.0, atol=1e-15)

    def test_symmetry_index_scales_linearly(self):
        lam = (-1.3, 0.2, 0.9, 2.4)
        v1 = rmt.joint_eigen_logdensity(rmt.EnsembleSpec(1, 4, 1.7), lam)
        v2 = rmt.joint_eigen_logdensity(rmt.EnsembleSpec(2, 4, 1.7), lam)
        assert_allclose(v2, 2.0 * v1, atol=1e-12)

    def test_translation_moves_only_confinement(self):
        spec = rmt.EnsembleSpec(2, 4, scale2=1.7)
        lam = np.array([-1.1, -0.2, 0.7, 1.9])
        c = 0.63
        shift = (rmt.joint_eigen_logdensity(spec, lam + c)
                 - rmt.joint_eigen_logdensity(spec, lam))
        want = -spec.dyson_index * (2.0 * c * lam.sum() + lam.size * c * c) / (2.0 * 1.7)
        assert_allclose(shift, want, atol=1e-10)

    def test_length_mismatch(self):
        with pytest.raises(DomainError):
            rmt.joint_eigen_logdensity(rmt.EnsembleSpec(1, 3), (0.0, 1.0))


class TestMatrixOuStep:
    def test_duration_validation(self):
        spec = rmt.EnsembleSpec(1, 2)
        state = rmt.sample_matrix(spec, stream(0))
        with pytest.raises(DomainError):
            rmt.matrix_ou_step(spec, state, 0.0, stream(1))

    def test_class_mismatch(self):
        state = rmt.sample_matrix(rmt.EnsembleSpec(1, 2), stream(0))
        with pytest.raises(DomainError):
            rmt.matrix_ou_step(rmt.EnsembleSpec(2, 2), state, 1.0, stream(1))

    def test_symmetry_preserved(self):
        spec = rmt.EnsembleSpec(2, 3)
        state = rmt.sample_matrix(spec, stream(14))
        out = rmt.matrix_ou_step(spec, state, 0.4, stream(15))
        assert np.array_equal(out.matrix, out.matrix.conj().T)

    def test_short_step_continuity(self):
        spec = rmt.EnsembleSpec(1, 3)
        state = rmt.sample_matrix(spec, stream(16))
        out = rmt.matrix_ou_step(spec, state, 1e-9, stream(17))
        assert np.linalg.norm(out.matrix - state.matrix) < 1e-3

    def test_long_step_forgets_start(self):
        # q underflows to zero, so the output is exactly the fresh draw
        spec = rmt.EnsembleSpec(1, 2)
        a = rmt.sample_matrix(spec, stream(18, 0))
        b = rmt.MatrixState(1, 100.0 * np.eye(2))
        out_a = rmt.matrix_ou_step(spec, a, 1e6, stream(19))
        out_b = rmt.matrix_ou_step(spec, b, 1e6, stream(19))
        assert np.array_equal(out_a.matrix, out_b.matrix)

    def test_mean_decay_and_semigroup(self):
        # E M(t) = q(t) M', and two half steps compose to one full step
        spec = rmt.EnsembleSpec(1, 2, scale2=1.0, friction=2.0)
        start = rmt.MatrixState(1, np.array([[1.5, -0.7], [-0.7, -0.9]]))
        t, n_trials = 0.8, 20000
        q = math.exp(-t / (spec.scale2 * spec.friction))
        rng = stream(20)
        one = np.zeros((2, 2))
        two = np.zeros((2, 2))
        for _ in range(n_trials):
            one += rmt.matrix_ou_step(spec, start, t, rng).matrix
            mid = rmt.matrix_ou_step(spec, start, t / 2, rng)
            two += rmt.matrix_ou_step(spec, mid, t / 2, rng).matrix
        one /= n_trials
        two /= n_trials
        se_diag = math.sqrt((1.0 - q * q) * spec.scale2 / n_trials)
        want = q * start.matrix
        assert np.all(np.abs(one - want) < 4 * se_diag)
        assert np.all(np.abs(two - want) < 4 * se_diag)

    def test_stationarity_of_element_variances(self):
        # started in equilibrium, any t leaves Var(diag) = a^2, Var(off) = a^2/2
        spec = rmt.EnsembleSpec(1, 2, scale2=1.0)
        rng = stream(21)
        n_trials = 20000
        outs = np.array([
            rmt.matrix_ou_step(spec, rmt.sample_matrix(spec, rng), 0.7, rng).matrix
            for _ in range(n_trials)])
        se = math.sqrt(2.0 / n_trials)
        assert abs(np.var(outs[:, 0, 0]) - 1.0) < 3 * se
        assert abs(np.var(outs[:, 1, 1]) - 1.0) < 3 * se
        assert abs(np.var(outs[:, 0, 1]) - 0.5) < 3 * se / 2
        assert abs(np.mean(outs[:, 0, 0])) < 3 * se

    def test_deterministic(self):
        spec = rmt.EnsembleSpec(4, 2)
        state = rmt.sample_matrix(spec, stream(22))
        a = rmt.matrix_ou_step(spec, state, 0.3, stream(23)).matrix
        b = rmt.matrix_ou_step(spec, state, 0.3, stream(23)).matrix
        assert np.array_equal(a, b)
