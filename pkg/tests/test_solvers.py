import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import csr_from_dense, random_csr
from gmres_sv.krylov import run_cycle
from gmres_sv.solvers import (
    AugmentationSet,
    SolverConfig,
    extract_harmonic_directions,
    extract_singular_directions,
    paper_mvp_increment,
    solve,
)
from gmres_sv.sparse import csr_from_coo, gen_bidiagonal, gen_laplacian_1d, identity, spmv


def cyclic_shift(n):
    """Permutation sending e_i to e_{i+1}; its projected pencil is singular."""
    rows = [(i + 1) % n for i in range(n)]
    cols = list(range(n))
    return csr_from_coo(list(zip(rows, cols, [1.0] * n)), n, n)


class TestPaperMvpIncrement:
    def test_augmented_later_cycle(self):
        assert paper_mvp_increment("sv", 30, 4) == 26

    def test_plain(self):
        assert paper_mvp_increment("plain", 30, 0) == 30

    def test_zero_augmentation_degenerates(self):
        assert paper_mvp_increment("sv", 17, 0) == 17

    def test_first_cycle_always_full(self):
        assert paper_mvp_increment("sv", 30, 4, first_cycle=True) == 30
        assert paper_mvp_increment("hr", 20, 2, first_cycle=True) == 20

    def test_invalid_variant(self):
        with pytest.raises(ValueError):
            paper_mvp_increment("cg", 10, 0)


class TestSolverConfig:
    def test_plain_requires_zero_k(self):
        with pytest.raises(ValueError, match="k=0"):
            SolverConfig("plain", m=10, k=2)

    def test_k_below_m(self):
        with pytest.raises(ValueError):
            SolverConfig("sv", m=5, k=5)

    def test_positive_tolerance(self):
        with pytest.raises(ValueError):
            SolverConfig("sv", m=5, k=1, tol=0.0)


class TestExtractSingularDirections:
    def test_identity_matrix_gives_unit_values(self):
        A = identity(6)
        rng = np.random.default_rng(0)
        b = rng.standard_normal(6)
        cycle = run_cycle(A, b, np.zeros(6), None, m=3)
        aug = extract_singular_directions(cycle, 2)
        assert aug.size == 1  # identity breaks down after one column
        assert_allclose(aug.sigma_sq, [1.0], atol=1e-12)
        y = aug.Y[:, 0]
        assert np.linalg.norm(spmv(A, y) - y) <= 1e-10

    def test_full_space_matches_svd_oracle(self):
        rng = np.random.default_rng(1)
        dense = rng.standard_normal((30, 30)) + 3.0 * np.eye(30)
        A = csr_from_dense(dense)
        b = rng.standard_normal(30)
        cycle = run_cycle(A, b, np.zeros(30), None, m=30)
        aug = extract_singular_directions(cycle, 2)
        svals = np.sort(np.linalg.svd(dense, compute_uv=False))
        assert_allclose(aug.sigma_sq, svals[:2] ** 2, rtol=1e-6)

    def test_cached_products_consistent_with_spmv(self):
        rng = np.random.default_rng(2)
        A, _ = random_csr(rng, 70, 70, density=0.25, shift=3.0)
        b = rng.standard_normal(70)
        cycle = run_cycle(A, b, np.zeros(70), None, m=12)
        aug = extract_singular_directions(cycle, 4)
        a_fro = np.sqrt(np.sum(A.values**2))
        for i in range(aug.size):
            gap = np.linalg.norm(spmv(A, aug.Y[:, i]) - aug.AY[:, i])
            assert gap <= 1e-8 * a_fro * np.linalg.norm(aug.Y[:, i])

    def test_values_ascend(self):
        rng = np.random.default_rng(3)
        A, _ = random_csr(rng, 40, 40, density=0.3, shift=2.0)
        b = rng.standard_normal(40)
        cycle = run_cycle(A, b, np.zeros(40), None, m=10)
        aug = extract_singular_directions(cycle, 5)
        assert np.all(np.diff(aug.sigma_sq) >= 0)

    def test_negligible_directions_discarded(self):
        # Nearly singular matrix: the full-space search contains a direction
        # whose squared value falls below the relative cutoff and is dropped.
        A = csr_from_dense(np.diag([3e-7, 1.0, 2.0, 3.0, 4.0, 5.0]))
        b = np.ones(6)
        cycle = run_cycle(A, b, np.zeros(6), None, m=6)
        aug = extract_singular_directions(cycle, 2)
        assert aug.size == 1
        assert aug.sigma_sq[0] > 1e-10


class TestExtractHarmonicDirections:
    def test_spd_full_space_matches_eigensolver_oracle(self):
        A = gen_laplacian_1d(12)
        rng = np.random.default_rng(4)
        b = rng.standard_normal(12)
        cycle = run_cycle(A, b, np.zeros(12), None, m=12)
        eigs = np.linalg.eigvalsh(A.to_dense())
        small = extract_harmonic_directions(cycle, 2, select="smallest")
        assert abs(small.sigma_sq[0] - eigs[0]) <= 1e-6
        large = extract_harmonic_directions(cycle, 2, select="largest")
        assert abs(large.sigma_sq[-1] - eigs[-1]) <= 1e-6

    def test_identity_reduces_to_singular_extraction(self):
        A = identity(5)
        b = np.arange(1.0, 6.0)
        cycle = run_cycle(A, b, np.zeros(5), None, m=2)
        sv = extract_singular_directions(cycle, 1)
        hr = extract_harmonic_directions(cycle, 1)
        assert_allclose(hr.sigma_sq, sv.sigma_sq, atol=1e-12)

    def test_cached_products_consistent_with_spmv(self):
        rng = np.random.default_rng(5)
        A, _ = random_csr(rng, 60, 60, density=0.25, shift=4.0)
        b = rng.standard_normal(60)
        cycle = run_cycle(A, b, np.zeros(60), None, m=10)
        aug = extract_harmonic_directions(cycle, 3)
        a_fro = np.sqrt(np.sum(A.values**2))
        assert aug.size > 0
        for i in range(aug.size):
            gap = np.linalg.norm(spmv(A, aug.Y[:, i]) - aug.AY[:, i])
            assert gap <= 1e-8 * a_fro * np.linalg.norm(aug.Y[:, i])

    def test_singular_pencil_returns_empty_set(self):
        A = cyclic_shift(8)
        b = np.zeros(8)
        b[0] = 1.0
        cycle = run_cycle(A, b, np.zeros(8), None, m=3)
        aug = extract_harmonic_directions(cycle, 2)
        assert aug.size == 0


class TestSolve:
    def test_identity_converges_in_one_cycle(self):
        A = identity(7)
        b = np.arange(1.0, 8.0)
        report = solve(A, b, None, SolverConfig("plain", m=3), x_ref=b)
        assert report.converged
        assert len(report.record) == 1
        assert_allclose(report.x, b, atol=1e-12)
        assert report.final_error_norm <= 1e-12

    def test_converged_iff_final_relres_below_tol(self):
        A = gen_laplacian_1d(30)
        b = np.ones(30)
        good = solve(A, b, None, SolverConfig("plain", m=30))
        assert good.converged == (good.final_relres <= 1e-8)
        assert good.converged
        bad = solve(A, b, None, SolverConfig("plain", m=3, max_cycles=2))
        assert bad.converged == (bad.final_relres <= 1e-8)
        assert not bad.converged

    def test_budget_exhaustion_is_not_an_error(self):
        A = gen_laplacian_1d(40)
        b = np.ones(40)
        report = solve(A, b, None, SolverConfig("plain", m=4, max_cycles=3))
        assert not report.converged
        assert len(report.record) == 3

    def test_true_matvec_budget(self):
        A = gen_laplacian_1d(40)
        b = np.ones(40)
        report = solve(A, b, None, SolverConfig("plain", m=4, max_cycles=50, max_true_matvecs=12))
        assert not report.converged
        assert report.record.entries[-1].true_mvp >= 12
        assert len(report.record) < 50

    def test_zero_rhs(self):
        A = gen_laplacian_1d(5)
        report = solve(A, np.zeros(5), None, SolverConfig("plain", m=2))
        assert report.converged
        assert report.final_relres == 0.0
        assert_allclose(report.x, np.zeros(5), atol=0)

    def test_starting_iterate_already_converged(self):
        A = gen_laplacian_1d(6)
        x = np.arange(1.0, 7.0)
        b = spmv(A, x)
        report = solve(A, b, x, SolverConfig("plain", m=3))
        assert report.converged
        assert len(report.record) == 0

    def test_matvec_accounting_matches_convention(self):
        A = gen_laplacian_1d(50)
        b = np.ones(50)
        config = SolverConfig("sv", m=8, k=2, max_cycles=6, tol=1e-14)
        report = solve(A, b, None, config)
        paper = [e.paper_mvp for e in report.record]
        true = [e.true_mvp for e in report.record]
        increments = np.diff([0] + paper)
        expected = [paper_mvp_increment("sv", 8, 2, first_cycle=(i == 0)) for i in range(len(paper))]
        assert list(increments) == expected
        # the true counter additionally charges one restart residual per
        # cycle plus the initial residual
        assert true[0] == paper[0] + 2
        assert all(t - p == 1 + i + 2 for i, (t, p) in enumerate(zip(true[1:], paper[1:])))

    def test_record_monotone_and_counters_increasing(self):
        A = gen_bidiagonal(200, 0.1)
        b = np.ones(200)
        report = solve(A, b, None, SolverConfig("sv", m=10, k=2, max_cycles=40))
        relres = [e.relres for e in report.record]
        assert all(b2 <= a2 + 1e-12 for a2, b2 in zip(relres, relres[1:]))
        for key in ("paper_mvp", "true_mvp"):
            seq = [getattr(e, key) for e in report.record]
            assert all(b2 > a2 for a2, b2 in zip(seq, seq[1:]))

    def test_error_norm_logged_against_reference(self):
        A = gen_laplacian_1d(25)
        x_ref = np.linspace(0.0, 1.0, 25)
        b = spmv(A, x_ref)
        report = solve(A, b, None, SolverConfig("plain", m=25), x_ref=x_ref)
        assert report.record.entries[-1].error_norm <= 1e-8
        assert report.final_error_norm == report.record.entries[-1].error_norm

    def test_stagnation_guard_stops_stalled_run(self):
        # A pure shift permutation makes every restarted cycle identical, so
        # the residual improvement is exactly zero until the guard trips.
        A = cyclic_shift(8)
        b = np.zeros(8)
        b[0] = 1.0
        report = solve(A, b, None, SolverConfig("plain", m=3, max_cycles=100))
        assert not report.converged
        assert len(report.record) == 10

    def test_harmonic_falls_back_on_singular_pencil(self):
        A = cyclic_shift(8)
        b = np.zeros(8)
        b[0] = 1.0
        report = solve(A, b, None, SolverConfig("hr", m=3, k=1, max_cycles=100))
        assert not report.converged
        assert len(report.record) == 10

    def test_on_cycle_hook_sees_every_cycle(self):
        A = gen_laplacian_1d(30)
        b = np.ones(30)
        seen = []
        report = solve(
            A,
            b,
            None,
            SolverConfig("sv", m=6, k=2, max_cycles=10),
            on_cycle=lambda c, res: seen.append((c, res.n_cols)),
        )
        assert [c for c, _ in seen] == [e.cycle for e in report.record]

    def test_sv_beats_or_ties_plain_on_graded_diagonal(self):
        A = gen_bidiagonal(1000, 0.1)
        b = np.ones(1000)

        def cycles(variant, m, k):
            rep = solve(A, b, None, SolverConfig(variant, m=m, k=k, max_cycles=120))
            return len(rep.record) if rep.converged else np.inf

        for k in (2, 4):
            assert cycles("sv", 20, k) <= cycles("plain", 20, 0)
