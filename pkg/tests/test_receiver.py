import numpy as np
import pytest

from odia.channel import NetworkConfig, generate_realization
from odia.codebook import Codebook, random_codebook
from odia.errors import DegenerateInputError
from odia.numerics import Rng, complex_gaussian, sample_gaussian_matrix
from odia.receiver import (
    CellReports,
    QuantizedChannel,
    build_report,
    cell_reports,
    effective_channel,
    interference_profile,
    optimal_beamformer,
    quantize_channel,
    stack_interference_matrix,
)

CFG = NetworkConfig(K=3, M=4, L=2, N=20, S=2, snr=100.0)


def random_unit_vectors(rng, count, dim):
    v = complex_gaussian(rng, (count, dim))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


class TestStackInterferenceMatrix:
    def test_single_interferer(self):
        cfg = NetworkConfig(K=2, M=3, L=1, N=2, S=1, snr=1.0)
        real = generate_realization(cfg, Rng(0))
        g = stack_interference_matrix(real, 0, 1)
        assert g.shape == (1, 1)
        expected = (real.channels[0, 1, 1] @ real.reference_beamformers[1]).conj().T
        assert np.allclose(g, expected)

    def test_block_order(self):
        real = generate_realization(CFG, Rng(1))
        g = stack_interference_matrix(real, 1, 0)
        assert g.shape == (4, 2)
        lower = (real.channels[1, 0, 0] @ real.reference_beamformers[0]).conj().T
        upper = (real.channels[1, 0, 2] @ real.reference_beamformers[2]).conj().T
        assert np.allclose(g[:2], lower)
        assert np.allclose(g[2:], upper)

    def test_entries_unit_variance(self):
        # Reference beams mix Gaussian columns unitarily, so stacked entries
        # stay CN(0,1).
        cfg = NetworkConfig(K=2, M=4, L=2, N=10, S=2, snr=1.0)
        rng = Rng(2)
        entries = []
        for _ in range(140):
            real = generate_realization(cfg, rng)
            for j in range(cfg.N):
                entries.append(stack_interference_matrix(real, 0, j).ravel())
        flat = np.concatenate(entries)  # 140*10*4 = 5600 matrices, 22400 entries
        assert abs(np.mean(np.abs(flat) ** 2) - 1.0) < 0.02

    def test_single_cell_empty(self):
        cfg = NetworkConfig(K=1, M=2, L=2, N=2, S=2, snr=1.0)
        real = generate_realization(cfg, Rng(0))
        assert stack_interference_matrix(real, 0, 0).shape == (0, 2)


class TestOptimalBeamformer:
    def test_diagonal(self):
        u, metric = optimal_beamformer(np.diag([2.0, 1.0]).astype(complex))
        assert metric == pytest.approx(1.0)
        assert abs(u[1]) == pytest.approx(1.0)
        assert abs(u[0]) < 1e-12

    def test_rank_deficient_null_space(self):
        g = np.array([[1.0, 0.0]], dtype=complex)  # spans only column 1
        u, metric = optimal_beamformer(g)
        assert metric == pytest.approx(0.0, abs=1e-15)
        assert np.linalg.norm(g @ u) < 1e-12

    def test_sampling_lower_bound_oracle(self):
        rng = Rng(3)
        g = sample_gaussian_matrix(rng, 4, 2)
        u, metric = optimal_beamformer(g)
        probes = random_unit_vectors(rng, 10_000, 2)
        values = np.sum(np.abs(probes @ g.T) ** 2, axis=1)
        assert metric <= values.min() + 1e-9

    def test_metric_matches_filter_output(self):
        rng = Rng(4)
        g = sample_gaussian_matrix(rng, 4, 2)
        u, metric = optimal_beamformer(g)
        assert np.linalg.norm(g @ u) ** 2 == pytest.approx(metric, abs=1e-9)
        assert np.linalg.norm(u) == pytest.approx(1.0, abs=1e-10)

    def test_scale_behavior(self):
        rng = Rng(5)
        g = sample_gaussian_matrix(rng, 4, 2)
        u1, m1 = optimal_beamformer(g)
        u2, m2 = optimal_beamformer(3.0 * g)
        assert m2 == pytest.approx(9.0 * m1, rel=1e-9)
        assert abs(np.abs(np.vdot(u1, u2)) - 1.0) < 1e-9  # same direction up to phase


class TestEffectiveChannel:
    def test_selector_case(self):
        cfg = NetworkConfig(K=2, M=3, L=2, N=2, S=2, snr=1.0)
        real = generate_realization(cfg, Rng(0))
        h = np.zeros((2, 3), dtype=complex)
        h[0, 0], h[0, 1], h[0, 2] = 1.0, 2.0 + 1j, 3.0
        h[1, 0] = 5.0
        real.channels[0, 0, 0] = h
        real.reference_beamformers[0][:] = np.eye(3)[:, :2]
        u = np.array([1.0, 0.0], dtype=complex)
        f = effective_channel(real, 0, 0, u)
        assert np.allclose(f, h[0, :2].conj())

    def test_norm_bound(self):
        real = generate_realization(CFG, Rng(1))
        u = random_unit_vectors(Rng(2), 1, 2)[0]
        f = effective_channel(real, 0, 0, u)
        sigma_max = np.linalg.svd(real.channels[0, 0, 0], compute_uv=False)[0]
        assert np.linalg.norm(f) <= sigma_max + 1e-12

    def test_entries_unit_variance(self):
        # Through the optimal filter the desired channel keeps CN(0,1) entries:
        # the filter is independent of the serving-cell channel.
        rng = Rng(6)
        entries = []
        cfg = NetworkConfig(K=3, M=4, L=2, N=10, S=2, snr=1.0)
        for _ in range(250):
            real = generate_realization(cfg, rng)
            reps = cell_reports(real, 0)
            entries.append(reps.effective.ravel())
        flat = np.concatenate(entries)  # 5000 vectors
        assert abs(np.mean(np.abs(flat) ** 2) - 1.0) < 0.03
        assert abs(np.mean(flat)) < 0.03


class TestQuantize:
    def test_exact_codeword(self):
        cb = random_codebook(Rng(0), 2, 8)
        f = 1.7 * cb.codewords[2]
        index, gain, distortion = quantize_channel(f, cb)
        assert index == 2
        assert gain == pytest.approx(1.7**2)
        assert distortion == pytest.approx(0.0, abs=1e-12)

    def test_symmetric_tie_lowest_index(self):
        cb = Codebook(2, 2, np.eye(2, dtype=complex), "random")
        f = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2)
        index, gain, distortion = quantize_channel(f, cb)
        assert index == 0
        assert distortion == pytest.approx(0.5)

    def test_zero_vector_raises(self):
        cb = random_codebook(Rng(0), 2, 4)
        with pytest.raises(DegenerateInputError):
            quantize_channel(np.zeros(2, dtype=complex), cb)

    def test_dimension_mismatch(self):
        cb = random_codebook(Rng(0), 3, 4)
        with pytest.raises(ValueError):
            quantize_channel(np.ones(2, dtype=complex), cb)

    def test_distortion_cdf_matches_closed_form(self):
        # Fresh isotropic codebook per draw: min of N_f independent
        # Beta-type alignments, so P(d^2 <= z) = 1 - (1 - z^(S-1))^N_f.
        rng = Rng(9)
        n, size, dim = 10_000, 16, 2
        f = random_unit_vectors(rng, n, dim)
        books = complex_gaussian(rng, (n, size, dim))
        books /= np.linalg.norm(books, axis=2, keepdims=True)
        align = np.abs(np.einsum("nkd,nd->nk", books, f.conj())) ** 2
        d2 = np.sort(1.0 - align.max(axis=1))
        theory = 1.0 - (1.0 - d2 ** (dim - 1)) ** size
        ks = np.max(np.abs(theory - (np.arange(n) + 1) / n))
        assert ks < 0.02


class TestReports:
    def test_exact_passthrough(self):
        real = generate_realization(CFG, Rng(10))
        rep = build_report(real, 0, 0)
        f = effective_channel(real, 0, 0, rep.beamformer)
        assert np.allclose(rep.effective_channel, f)

    def test_quantized_report(self):
        real = generate_realization(CFG, Rng(11))
        cb = random_codebook(Rng(1), 2, 16)
        rep = build_report(real, 0, 0, codebook=cb)
        assert isinstance(rep.effective_channel, QuantizedChannel)
        exact = build_report(real, 0, 0)
        idx, gain, dist = quantize_channel(exact.effective_channel, cb)
        assert rep.effective_channel.index == idx
        assert rep.effective_channel.gain == pytest.approx(gain)

    def test_metric_equals_profile_sum(self):
        real = generate_realization(CFG, Rng(12))
        rep = build_report(real, 1, 3)
        profile = interference_profile(real, 1, 3, rep.beamformer)
        assert profile.total == pytest.approx(rep.metric, abs=1e-10 * max(rep.metric, 1))
        assert set(profile.by_cell) == {0, 2}

    def test_batched_matches_per_user(self):
        real = generate_realization(CFG, Rng(13))
        reps = cell_reports(real, 2)
        for j in (0, 7, 19):
            single = build_report(real, 2, j)
            assert reps.metrics[j] == pytest.approx(single.metric, abs=1e-12)
            assert np.allclose(reps.beamformers[j], single.beamformer, atol=1e-12)
            assert np.allclose(reps.effective[j], single.effective_channel, atol=1e-12)

    def test_batched_quantized_matches_per_user(self):
        real = generate_realization(CFG, Rng(14))
        cb = random_codebook(Rng(2), 2, 32)
        reps = cell_reports(real, 0, codebook=cb)
        assert reps.is_quantized
        for j in (1, 5):
            single = build_report(real, 0, j, codebook=cb)
            got = reps.report(j).effective_channel
            assert got.index == single.effective_channel.index
            assert got.gain == pytest.approx(single.effective_channel.gain)

    def test_from_reports_roundtrip(self):
        real = generate_realization(CFG, Rng(15))
        singles = [build_report(real, 0, j) for j in range(CFG.N)]
        reps = CellReports.from_reports(singles)
        assert np.allclose(reps.metrics, [r.metric for r in singles])

    def test_unit_norm_beamformers(self):
        real = generate_realization(CFG, Rng(16))
        reps = cell_reports(real, 0)
        assert np.allclose(np.linalg.norm(reps.beamformers, axis=1), 1.0, atol=1e-10)


def test_metric_tail_slope_scalar_case():
    # K=2, S=1, L=1: the metric is |g|^2, a unit-mean exponential, so the CDF
    # tail exponent is 1.
    from odia.validation import fit_tail_exponent

    cfg = NetworkConfig(K=2, M=2, L=1, N=25, S=1, snr=1.0)
    rng = Rng(21)
    samples = []
    while len(samples) < 30_000:
        real = generate_realization(cfg, rng)
        samples.extend(cell_reports(real, 0).metrics.tolist())
        samples.extend(cell_reports(real, 1).metrics.tolist())
    report = fit_tail_exponent(np.asarray(samples), cfg)
    assert report.theoretical_exponent == 1.0
    assert abs(report.fitted_exponent - 1.0) <= 0.15
