import numpy as np
import pytest

from odia.errors import SingularMatrixError
from odia.numerics import (
    Rng,
    invert,
    mix64,
    sample_gaussian_matrix,
    sample_orthonormal_columns,
    svd,
)


def gram_eigenvalues_2x2(m):
    """Closed-form eigenvalues of the 2x2 Gram matrix m^H m (independent oracle)."""
    g = m.conj().T @ m
    tr = np.real(g[0, 0] + g[1, 1])
    det = np.real(g[0, 0] * g[1, 1] - g[0, 1] * g[1, 0])
    disc = np.sqrt(max(tr * tr / 4.0 - det, 0.0))
    return tr / 2.0 + disc, tr / 2.0 - disc


class TestSvd:
    def test_identity(self):
        res = svd(np.eye(3, dtype=complex))
        assert np.allclose(res.singular_values, [1, 1, 1])
        # Right vectors are identity columns up to phase; the phase fix makes
        # them exactly real positive.
        assert np.allclose(np.abs(res.right), np.eye(3), atol=1e-12)

    def test_diagonal(self):
        res = svd(np.diag([2.0, 1.0]).astype(complex))
        assert np.allclose(res.singular_values, [2, 1])
        assert np.allclose(np.abs(res.right), np.eye(2), atol=1e-12)

    def test_gram_eigenvalue_oracle_4x2(self):
        rng = Rng(7)
        for _ in range(20):
            m = sample_gaussian_matrix(rng, 4, 2)
            res = svd(m)
            lam_hi, lam_lo = gram_eigenvalues_2x2(m)
            assert res.singular_values[0] ** 2 == pytest.approx(lam_hi, rel=1e-8)
            assert res.singular_values[1] ** 2 == pytest.approx(lam_lo, rel=1e-8)

    def test_result_invariants(self):
        rng = Rng(3)
        for rows, cols in [(1, 1), (2, 5), (5, 2), (6, 4)]:
            m = sample_gaussian_matrix(rng, rows, cols)
            res = svd(m)
            p = min(rows, cols)
            sv = res.singular_values
            assert sv.shape == (p,)
            assert np.all(sv >= 0) and np.all(np.diff(sv) <= 0)
            assert np.allclose(res.left.conj().T @ res.left, np.eye(p), atol=1e-9)
            assert np.allclose(res.right.conj().T @ res.right, np.eye(p), atol=1e-9)
            err = np.linalg.norm(res.reconstruct() - m) / np.linalg.norm(m)
            assert err < 1e-8

    def test_unitary_invariance_of_singular_values(self):
        rng = Rng(11)
        m = sample_gaussian_matrix(rng, 4, 3)
        left_u = sample_orthonormal_columns(rng, 4, 4)
        right_u = sample_orthonormal_columns(rng, 3, 3)
        s0 = svd(m).singular_values
        s1 = svd(left_u @ m @ right_u).singular_values
        assert np.allclose(s0, s1, atol=1e-9)

    def test_batched_matches_single(self):
        rng = Rng(5)
        batch = np.stack([sample_gaussian_matrix(rng, 4, 2) for _ in range(6)])
        res = svd(batch)
        for i in range(6):
            single = svd(batch[i])
            assert np.array_equal(res.singular_values[i], single.singular_values)
            assert np.array_equal(res.right[i], single.right)

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            svd(np.zeros((0, 2)))
        bad = np.ones((2, 2), dtype=complex)
        bad[0, 0] = np.nan
        with pytest.raises(ValueError):
            svd(bad)


class TestInvert:
    def test_identity(self):
        assert np.allclose(invert(np.eye(3, dtype=complex)), np.eye(3))

    def test_diagonal(self):
        assert np.allclose(invert(np.diag([2.0, 4.0]).astype(complex)),
                           np.diag([0.5, 0.25]))

    def test_residual_oracle(self):
        rng = Rng(13)
        for _ in range(10):
            m = sample_gaussian_matrix(rng, 3, 3)
            res = m @ invert(m)
            assert np.allclose(res, np.eye(3), atol=1e-8)

    def test_involution(self):
        rng = Rng(17)
        m = sample_gaussian_matrix(rng, 4, 4)
        assert np.allclose(invert(invert(m)), m, atol=1e-7)

    def test_singular_raises_with_condition(self):
        m = np.array([[1.0, 2.0], [2.0, 4.0]], dtype=complex)
        with pytest.raises(SingularMatrixError) as info:
            invert(m)
        assert info.value.condition > 1e12

    def test_condition_cap(self):
        m = np.diag([1.0, 1e-8]).astype(complex)
        invert(m)  # cond 1e8, under the default cap
        with pytest.raises(SingularMatrixError):
            invert(m, condition_cap=1e6)

    def test_rejects_nonsquare(self):
        with pytest.raises(ValueError):
            invert(np.ones((2, 3), dtype=complex))


class TestGaussianSampling:
    def test_moments(self):
        m = sample_gaussian_matrix(Rng(1), 400, 250)  # 1e5 entries
        flat = m.ravel()
        assert abs(flat.mean()) < 0.02
        assert abs(np.mean(np.abs(flat) ** 2) - 1.0) < 0.02

    def test_determinism(self):
        a = sample_gaussian_matrix(Rng(42), 2, 2)
        b = sample_gaussian_matrix(Rng(42), 2, 2)
        assert np.array_equal(a, b)

    def test_distinct_seeds_differ(self):
        a = sample_gaussian_matrix(Rng(1), 2, 2)
        b = sample_gaussian_matrix(Rng(2), 2, 2)
        assert np.any(a != b)

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            sample_gaussian_matrix(Rng(0), 0, 3)


class TestOrthonormalSampling:
    def test_scalar_case(self):
        q = sample_orthonormal_columns(Rng(0), 1, 1)
        assert abs(np.abs(q[0, 0]) - 1.0) < 1e-12

    def test_gram_identity(self):
        q = sample_orthonormal_columns(Rng(9), 4, 2)
        assert np.allclose(q.conj().T @ q, np.eye(2), atol=1e-10)

    def test_isotropy_first_entry(self):
        # Haar symmetry: E|q[0,0]|^2 = 1/rows.
        rng = Rng(23)
        vals = [np.abs(sample_orthonormal_columns(rng, 4, 2)[0, 0]) ** 2
                for _ in range(10_000)]
        assert abs(np.mean(vals) - 0.25) < 0.02

    def test_rejects_wide(self):
        with pytest.raises(ValueError):
            sample_orthonormal_columns(Rng(0), 2, 3)


class TestRng:
    def test_mix64_deterministic(self):
        assert mix64(1, 2, 3) == mix64(1, 2, 3)
        assert mix64(1, 2, 3) != mix64(1, 3, 2)

    def test_derive_streams_differ(self):
        base = Rng(5)
        a = base.derive(0).standard_normal(4)
        b = base.derive(1).standard_normal(4)
        assert np.any(a != b)

    def test_derive_reproducible(self):
        a = Rng(5).derive(7, 9).standard_normal(4)
        b = Rng(5).derive(7, 9).standard_normal(4)
        assert np.array_equal(a, b)

    def test_choice_uniform_and_bounded(self):
        rng = Rng(2)
        picks = [rng.choice([3, 5, 8]) for _ in range(300)]
        assert set(picks) == {3, 5, 8}

    def test_choice_empty_raises(self):
        with pytest.raises(ValueError):
            Rng(0).choice([])
