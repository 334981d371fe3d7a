"""Network geometry and per-block channel generation.

One :class:`NetworkRealization` holds everything a single transmission block
needs: the cross-cell Rayleigh channel matrices for every (serving cell,
user, source cell) triple and the per-cell reference beamforming matrices.
Fading is quasi-static and frequency flat: coefficients are constant within
a block and redrawn independently for the next one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .numerics import Rng, complex_gaussian, sample_orthonormal_columns


def db_to_linear(db: float) -> float:
    return float(10.0 ** (db / 10.0))


def linear_to_db(linear: float) -> float:
    return float(10.0 * np.log10(linear))


@dataclass(frozen=True)
class NetworkConfig:
    """Static network parameters.

    K cells, each with an M-antenna base station serving S single-stream
    users picked from N candidates with L antennas each.  ``snr`` is the
    linear transmit-power to noise ratio; noise variance is 1/snr and each
    stream carries symbol power 1/S.

    K = 1 is accepted as a degenerate single-cell setup (useful in tests);
    the receive-dimension constraint L < (K-1)S + 1 only binds for K >= 2.
    """

    K: int
    M: int
    L: int
    N: int
    S: int
    snr: float

    def __post_init__(self):
        if self.K < 1:
            raise ConfigError("need at least one cell")
        if not (1 <= self.S <= self.M):
            raise ConfigError(f"need 1 <= S <= M, got S={self.S}, M={self.M}")
        if self.N < self.S:
            raise ConfigError(f"need N >= S, got N={self.N}, S={self.S}")
        if self.L < 1:
            raise ConfigError("users need at least one antenna")
        if self.K >= 2 and self.L >= (self.K - 1) * self.S + 1:
            raise ConfigError(
                f"need L < (K-1)*S + 1 so receivers cannot null all interference "
                f"(got K={self.K}, S={self.S}, L={self.L})"
            )
        if not (self.snr > 0 and np.isfinite(self.snr)):
            raise ConfigError(f"snr must be positive and finite, got {self.snr}")

    @property
    def noise_variance(self) -> float:
        return 1.0 / self.snr

    @property
    def symbol_power(self) -> float:
        return 1.0 / self.S

    def with_snr(self, snr: float) -> "NetworkConfig":
        return NetworkConfig(self.K, self.M, self.L, self.N, self.S, snr)

    def with_users(self, n: int) -> "NetworkConfig":
        return NetworkConfig(self.K, self.M, self.L, n, self.S, self.snr)


@dataclass(frozen=True)
class NetworkRealization:
    """Channels and reference beamformers for one transmission block.

    ``channels[i, j, k]`` is the L x M matrix from the k-th base station to
    the j-th user of cell i.  ``reference_beamformers[k]`` is the M x S
    orthonormal outer precoder of cell k, known to every user.
    """

    config: NetworkConfig
    channels: np.ndarray              # (K, N, K, L, M) complex
    reference_beamformers: np.ndarray  # (K, M, S) complex

    def channel(self, serving_cell: int, user: int, source_cell: int) -> np.ndarray:
        return self.channels[serving_cell, user, source_cell]


def generate_realization(cfg: NetworkConfig, rng: Rng) -> NetworkRealization:
    """Draw one transmission block.

    Channel entries are i.i.d. CN(0,1).  Reference beamformers are redrawn
    per block from the same seeded stream: base stations and users agree on
    them through the shared pseudo-random seed, so no broadcast is modeled.
    """
    channels = complex_gaussian(rng, (cfg.K, cfg.N, cfg.K, cfg.L, cfg.M))
    reference = np.stack(
        [sample_orthonormal_columns(rng, cfg.M, cfg.S) for _ in range(cfg.K)]
    )
    return NetworkRealization(config=cfg, channels=channels, reference_beamformers=reference)
