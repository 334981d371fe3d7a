import numpy as np
import pytest

from odia.codebook import Codebook, random_codebook
from odia.errors import SingularMatrixError
from odia.numerics import Rng, complex_gaussian
from odia.precoder import (
    partial_zero_forcing_precoder,
    quantized_precoder,
    reconstruct_channel,
    zero_forcing_precoder,
)
from odia.receiver import QuantizedChannel, quantize_channel


def cofactor_inverse_2x2(m):
    """Independent closed-form 2x2 inverse for the gain oracle."""
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]]) / det


def random_channels(rng, count, dim):
    return [complex_gaussian(rng, (dim,)) for _ in range(count)]


class TestZeroForcing:
    def test_identity_basis(self):
        pre = zero_forcing_precoder([np.array([1.0, 0.0]), np.array([0.0, 1.0])])
        assert np.allclose(pre.matrix, np.eye(2))
        assert np.allclose(pre.gains, [1.0, 1.0])

    def test_diagonal_basis(self):
        pre = zero_forcing_precoder([np.array([2.0, 0.0]), np.array([0.0, 1.0])])
        assert np.allclose(pre.matrix, np.eye(2))
        assert np.allclose(pre.gains, [4.0, 1.0])
        assert np.allclose(pre.basis @ pre.matrix, np.diag([2.0, 1.0]))

    def test_gain_matches_gram_inverse_oracle(self):
        rng = Rng(0)
        for _ in range(25):
            fs = random_channels(rng, 2, 2)
            pre = zero_forcing_precoder(fs)
            f_mat = pre.basis
            gram_inv = cofactor_inverse_2x2(f_mat @ f_mat.conj().T)
            for j in range(2):
                expected = 1.0 / np.real(gram_inv[j, j])
                assert pre.gains[j] == pytest.approx(expected, rel=1e-8)

    def test_columns_unit_norm_and_diagonalization(self):
        rng = Rng(1)
        fs = random_channels(rng, 3, 3)
        pre = zero_forcing_precoder(fs)
        assert np.allclose(np.linalg.norm(pre.matrix, axis=0), 1.0, atol=1e-9)
        product = pre.basis @ pre.matrix
        assert np.allclose(product, np.diag(np.sqrt(pre.gains)), atol=1e-8)

    def test_intra_cell_cancellation(self):
        rng = Rng(2)
        fs = random_channels(rng, 2, 2)
        pre = zero_forcing_precoder(fs)
        for j, f in enumerate(fs):
            for s in range(2):
                if s != j:
                    leak = abs(f.conj() @ pre.matrix[:, s])
                    assert leak <= 1e-8 * np.linalg.norm(f)

    def test_singular_basis_raises(self):
        f = np.array([1.0, 1.0], dtype=complex)
        with pytest.raises(SingularMatrixError):
            zero_forcing_precoder([f, 2.0 * f])


class TestPartialZeroForcing:
    def test_single_user_two_streams(self):
        f = np.array([3.0, 4.0], dtype=complex)
        pre = partial_zero_forcing_precoder([f])
        assert pre.matrix.shape == (2, 1)
        assert np.linalg.norm(pre.matrix[:, 0]) == pytest.approx(1.0)
        # Matched direction: gain is the full channel power.
        assert pre.gains[0] == pytest.approx(25.0, rel=1e-9)

    def test_two_of_three_streams(self):
        rng = Rng(3)
        fs = random_channels(rng, 2, 3)
        pre = partial_zero_forcing_precoder(fs)
        product = np.stack([f.conj() for f in fs]) @ pre.matrix
        assert np.allclose(product, np.diag(np.sqrt(pre.gains)), atol=1e-8)


class TestQuantizedPrecoder:
    def test_infinite_resolution_matches_exact(self):
        rng = Rng(4)
        fs = random_channels(rng, 2, 2)
        # Codebook containing the exact normalized channels: zero distortion.
        words = np.stack([f / np.linalg.norm(f) for f in fs])
        cb = Codebook(2, 2, words, "random")
        reports = []
        for f in fs:
            idx, gain, dist = quantize_channel(f, cb)
            assert dist == pytest.approx(0.0, abs=1e-12)
            reports.append(QuantizedChannel(idx, gain, dist))
        exact = zero_forcing_precoder(fs)
        quant = quantized_precoder(reports, cb)
        # Same columns up to the codeword's global phase.
        for s in range(2):
            alignment = np.abs(np.vdot(exact.matrix[:, s], quant.matrix[:, s]))
            assert alignment == pytest.approx(1.0, abs=1e-9)

    def test_aligned_standard_basis(self):
        cb = Codebook(2, 2, np.eye(2, dtype=complex), "random")
        reports = [QuantizedChannel(0, 4.0, 0.0), QuantizedChannel(1, 9.0, 0.0)]
        pre = quantized_precoder(reports, cb)
        assert np.allclose(np.abs(pre.matrix), np.eye(2), atol=1e-12)

    def test_gain_exponent_changes_gains_not_directions(self):
        rng = Rng(5)
        fs = random_channels(rng, 2, 2)
        cb = random_codebook(Rng(6), 2, 16)
        reports = [QuantizedChannel(*quantize_channel(f, cb)) for f in fs]
        pre2 = quantized_precoder(reports, cb, gain_exponent=2)
        pre1 = quantized_precoder(reports, cb, gain_exponent=1)
        assert np.allclose(pre1.matrix, pre2.matrix, atol=1e-10)
        assert not np.allclose(pre1.gains, pre2.gains)

    def test_reconstruct_channel_magnitudes(self):
        cb = Codebook(2, 1, np.array([[1.0, 0.0]], dtype=complex), "random")
        q = QuantizedChannel(0, 4.0, 0.0)
        assert np.linalg.norm(reconstruct_channel(q, cb, 2)) == pytest.approx(4.0)
        assert np.linalg.norm(reconstruct_channel(q, cb, 1)) == pytest.approx(2.0)
        with pytest.raises(ValueError):
            reconstruct_channel(q, cb, 3)

    def test_residual_leak_shrinks_with_codebook_size(self):
        # Monte Carlo: expected off-stream leakage through the quantized
        # precoder drops as the codebook doubles from 2^4 to 2^8.
        rng = Rng(7)
        leaks = {}
        for bits in (4, 8):
            total = 0.0
            for trial in range(1000):
                cb = random_codebook(rng.derive(bits, trial), 2, 2**bits)
                fs = random_channels(rng.derive(bits, trial, 1), 2, 2)
                try:
                    reports = [QuantizedChannel(*quantize_channel(f, cb)) for f in fs]
                    pre = quantized_precoder(reports, cb)
                except SingularMatrixError:
                    continue
                total += sum(
                    abs(fs[j].conj() @ pre.matrix[:, s]) ** 2
                    for j in range(2) for s in range(2) if s != j
                )
            leaks[bits] = total / 1000
        assert leaks[8] < leaks[4]
