import math
from fractions import Fraction

import numpy as np
import pytest

from permsolve.adversarial import lemma3_counterexample
from permsolve.errors import GuardViolationError, InvalidParameterError, UndefinedSNRError
from permsolve.filters import FilterMatrix, SparseSpec, generate_sparse_matrix
from permsolve.sparsity import (
    EXACT_MATCH_SNR_DB,
    WellPosedness,
    alpha,
    alpha_caratheodory,
    alpha_weak,
    check_uncertainty_budget,
    delta,
    is_equivalent,
    is_prime,
    lp_norm,
    snr,
)
from permsolve.spectral import CombSpec, dft, make_comb


def one_row(*columns):
    return FilterMatrix(np.stack([np.asarray(c, dtype=complex) for c in columns])[None])


class TestLpNorm:
    def test_zero_matrix(self):
        z = FilterMatrix(np.zeros((2, 2, 3), dtype=complex))
        for p in (0, 0.5, 1, 2, math.inf):
            assert lp_norm(z, p) == 0.0

    def test_small_vector_arithmetic(self):
        m = one_row([3.0, 4.0, 0.0])
        assert lp_norm(m, 1) == 7.0
        assert lp_norm(m, 0) == 2.0
        assert lp_norm(m, 2) == 25.0  # power sum, not the root
        assert lp_norm(m, math.inf) == 4.0

    def test_comb_counting(self):
        for k in (2, 3, 6):
            comb = make_comb(CombSpec(L=12, q=k))
            assert lp_norm(one_row(comb), 0) == k

    def test_explicit_zero_tol(self):
        m = one_row([1.0, 1e-6, 0.0])
        assert lp_norm(m, 0, zero_tol=1e-7) == 2.0
        assert lp_norm(m, 0, zero_tol=1e-3) == 1.0

    def test_rejects_negative_order(self):
        with pytest.raises(InvalidParameterError):
            lp_norm(one_row([1.0]), -1)


class TestAlphaConstants:
    @pytest.mark.parametrize("N,expected", [(2, Fraction(1, 4)), (3, Fraction(1, 8)), (4, Fraction(1, 12))])
    def test_alpha_values(self, N, expected):
        assert alpha(N) == expected

    @pytest.mark.parametrize("N,expected", [(2, Fraction(1, 4)), (3, Fraction(1, 12))])
    def test_alpha_weak_values(self, N, expected):
        assert alpha_weak(N) == expected

    def test_alpha_caratheodory_value(self):
        assert alpha_caratheodory(3) == Fraction(1, 10)

    def test_weaker_constants_are_dominated(self):
        for N in range(2, 11):
            assert alpha_weak(N) <= alpha(N)
            assert alpha_caratheodory(N) <= alpha(N)


class TestDelta:
    def test_identical_matrices(self):
        A = generate_sparse_matrix(2, 2, 8, SparseSpec(k=2), seed=1)
        report = delta(A, A)
        assert report.delta == 0
        assert report.best_global_perm == (0, 1)
        assert np.all(report.per_pair == 0)

    def test_global_swap_is_absorbed(self):
        A = generate_sparse_matrix(2, 2, 8, SparseSpec(k=2), seed=2)
        swapped = FilterMatrix(A.entries[:, [1, 0], :])
        report = delta(swapped, A)
        assert report.delta == 0
        assert report.best_global_perm == (1, 0)

    def test_lemma3_bundle_size(self):
        # 2k * delta = L at L=8, k=2: the permuted pair differs on 2 bins
        bundle = lemma3_counterexample(8, 2)
        report = delta(bundle.a_tilde, bundle.a)
        assert report.delta == 2

    def test_symmetry(self):
        from permsolve.spectral import apply_frequency_permutations, random_permutation_sequence

        for seed in range(5):
            A = generate_sparse_matrix(2, 2, 12, SparseSpec(k=2), seed=seed)
            s = random_permutation_sequence(12, 2, seed=seed + 50)
            At = apply_frequency_permutations(A, s)
            assert delta(At, A).delta == delta(A, At).delta

    def test_bounds(self):
        A = generate_sparse_matrix(1, 2, 8, SparseSpec(k=2), seed=3)
        B = generate_sparse_matrix(1, 2, 8, SparseSpec(k=2), seed=4)
        report = delta(A, B)
        assert 0 <= report.delta <= 8
        assert report.delta == report.per_pair.max()

    def test_enumeration_guard(self):
        A = FilterMatrix(np.ones((1, 9, 2), dtype=complex))
        with pytest.raises(GuardViolationError):
            delta(A, A)


class TestIsEquivalent:
    def test_identity(self):
        A = generate_sparse_matrix(2, 3, 8, SparseSpec(k=2), seed=5)
        assert is_equivalent(A, A) == (0, 1, 2)

    def test_reversed_columns(self):
        A = generate_sparse_matrix(2, 3, 8, SparseSpec(k=2), seed=6)
        rev = FilterMatrix(A.entries[:, ::-1, :])
        assert is_equivalent(rev, A) == (2, 1, 0)

    def test_lemma3_pair_not_equivalent(self):
        bundle = lemma3_counterexample(8, 2)
        assert is_equivalent(bundle.a_tilde, bundle.a) is None


class TestSNR:
    def test_exact_recovery_is_infinite(self):
        A = generate_sparse_matrix(2, 2, 8, SparseSpec(k=2), seed=7)
        db, perm = snr(A, A)
        assert math.isinf(db) and perm == (0, 1)
        assert db > EXACT_MATCH_SNR_DB

    def test_calibrated_perturbation(self):
        A = generate_sparse_matrix(2, 2, 16, SparseSpec(k=3), seed=8)
        A_hat = FilterMatrix(A.entries * (1 + 1e-5))
        db, _ = snr(A, A_hat)
        assert db == pytest.approx(100.0, abs=1e-6)

    def test_column_swap_recovered_by_best_permutation(self):
        A = generate_sparse_matrix(1, 2, 8, SparseSpec(k=2), seed=9)
        swapped = FilterMatrix(A.entries[:, [1, 0], :])
        db, perm = snr(A, swapped)
        assert math.isinf(db) and perm == (1, 0)

    def test_invariances(self):
        A = generate_sparse_matrix(2, 3, 8, SparseSpec(k=2), seed=10)
        E = generate_sparse_matrix(2, 3, 8, SparseSpec(k=1), seed=11)
        A_hat = FilterMatrix(A.entries + 0.01 * E.entries)
        base, _ = snr(A, A_hat)
        perm = [2, 0, 1]
        db, _ = snr(FilterMatrix(A.entries[:, perm, :]), FilterMatrix(A_hat.entries[:, perm, :]))
        assert db == pytest.approx(base, rel=1e-12)
        db, _ = snr(FilterMatrix(-3.5 * A.entries), FilterMatrix(-3.5 * A_hat.entries))
        assert db == pytest.approx(base, rel=1e-12)

    def test_zero_reference_rejected(self):
        z = FilterMatrix(np.zeros((1, 2, 4), dtype=complex))
        with pytest.raises(UndefinedSNRError):
            snr(z, z)


class TestUncertaintyBudget:
    def test_prime_additive_budget(self):
        assert check_uncertainty_budget(1, 29, 31, prime=True) is WellPosedness.WELL_POSED

    def test_composite_sharp_boundary(self):
        # 2*2*2 = 8 is not < 8: exactly the non-improvable boundary
        assert check_uncertainty_budget(2, 2, 8, prime=False) is WellPosedness.NOT_GUARANTEED

    def test_composite_strictly_inside(self):
        assert check_uncertainty_budget(1, 3, 8, prime=False) is WellPosedness.WELL_POSED

    def test_false_prime_claim_rejected(self):
        with pytest.raises(InvalidParameterError):
            check_uncertainty_budget(1, 1, 8, prime=True)

    def test_is_prime(self):
        assert [n for n in range(2, 32) if is_prime(n)] == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31]


class TestFourierUncertainty:
    @pytest.mark.parametrize("L", [12, 31])
    def test_product_principle(self, L):
        rng = np.random.default_rng(123)
        for _ in range(200):
            k = int(rng.integers(1, L + 1))
            u = np.zeros(L, dtype=complex)
            supp = rng.choice(L, size=k, replace=False)
            u[supp] = rng.standard_normal(k)
            n0 = lp_norm(u[None, None, :], 0)
            f0 = lp_norm(dft(u)[None, None, :], 0)
            assert n0 * f0 >= L
            if is_prime(L):
                assert n0 + f0 >= L + 1

    def test_combs_achieve_equality(self):
        for L, q in [(12, 3), (12, 4), (16, 2)]:
            comb = make_comb(CombSpec(L, q, n=1 % (L // q), m=1 % q))
            n0 = lp_norm(comb[None, None, :], 0)
            f0 = lp_norm(dft(comb)[None, None, :], 0)
            assert n0 * f0 == L
