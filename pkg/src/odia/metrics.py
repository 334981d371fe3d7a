"""Post-scheduling signal accounting: SINR, rates, interference, DoF slope.

Rates come straight from the per-realization SINR expression, not from
symbol-level transmission: with per-stream symbol power 1/S and noise
variance 1/snr, the rate of a served user is

    log2(1 + gamma / (S/snr + inter_cell + residual_intra)),

where gamma is the realized desired-signal gain |f_i^H v|^2 and the two
interference terms are realized powers through the applied precoders.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .channel import NetworkRealization
from .errors import ConfigError
from .precoder import PrecoderSet
from .receiver import CellReports
from .scheduler import ScheduleDecision


def per_user_rate(gamma: float, inter_cell: float, residual_intra: float,
                  snr: float, streams: int) -> float:
    """Achievable rate of one served user in bits/s/Hz."""
    if min(gamma, inter_cell, residual_intra) < 0 or snr <= 0:
        raise ValueError("powers must be nonnegative and snr positive")
    return float(np.log2(1.0 + gamma / (streams / snr + inter_cell + residual_intra)))


@dataclass(frozen=True)
class UserOutcome:
    """Realized signal decomposition for one served user."""

    cell: int
    user: int
    stream: int
    rate: float
    gamma: float
    inter_cell: float          # sum_k!=i sum_s |f_k^H v_{k,s}|^2
    residual_intra: float      # sum_s!=j |f_i^H v_{i,s}|^2
    normalized_interference: float  # S * snr * sum_k!=i ||f_k||^2


@dataclass(frozen=True)
class TrialMetrics:
    """All per-user outcomes of one transmission block plus aggregates."""

    users: Tuple[UserOutcome, ...]
    sum_rate: float
    sum_interference: float
    outage_count: int
    resamples: int = 0

    @property
    def normalized_sum_interference(self) -> float:
        return self.sum_interference / max(len(self.users), 1)


def trial_metrics(
    real: NetworkRealization,
    decisions: Sequence[ScheduleDecision],
    precoders: Sequence[PrecoderSet],
    reports: Sequence[CellReports],
) -> TrialMetrics:
    """Evaluate the realized rates of every served user.

    ``decisions``, ``precoders`` and ``reports`` are indexed by cell.  All
    power terms are recomputed from the true channels and the applied
    precoders, so quantized feedback shows up as residual interference and
    gain mismatch rather than as bookkeeping.
    """
    cfg = real.config
    if not (len(decisions) == len(precoders) == len(reports) == cfg.K):
        raise ValueError("need one decision, precoder, and report set per cell")
    snr = cfg.snr
    outcomes: List[UserOutcome] = []
    total_outage = 0

    for i in range(cfg.K):
        decision = decisions[i]
        total_outage += decision.outage_count
        for stream, user in enumerate(decision.selected):
            u = reports[i].beamformers[user]
            # True effective channels from every base station through filter u.
            f_all = np.einsum(
                "l,klm,kms->ks",
                u.conj(),
                real.channels[i, user],
                real.reference_beamformers,
            ).conj()  # (K, S)

            own_row = f_all[i].conj() @ precoders[i].matrix  # (S',)
            gamma = float(np.abs(own_row[stream]) ** 2)
            residual = float(np.sum(np.abs(own_row) ** 2) - np.abs(own_row[stream]) ** 2)

            inter = 0.0
            norm_leak = 0.0
            for k in range(cfg.K):
                if k == i:
                    continue
                inter += float(np.sum(np.abs(f_all[k].conj() @ precoders[k].matrix) ** 2))
                norm_leak += float(np.sum(np.abs(f_all[k]) ** 2))

            outcomes.append(
                UserOutcome(
                    cell=i,
                    user=user,
                    stream=stream,
                    rate=per_user_rate(gamma, inter, max(residual, 0.0), snr, cfg.S),
                    gamma=gamma,
                    inter_cell=inter,
                    residual_intra=max(residual, 0.0),
                    normalized_interference=cfg.S * snr * norm_leak,
                )
            )

    return TrialMetrics(
        users=tuple(outcomes),
        sum_rate=float(sum(o.rate for o in outcomes)),
        sum_interference=float(sum(o.normalized_interference for o in outcomes)),
        outage_count=total_outage,
    )


@dataclass(frozen=True)
class DofEstimate:
    """Sum-rate samples over an SNR grid, for slope (pre-log) estimation."""

    snr_grid: Tuple[float, ...]   # linear SNR values, strictly increasing
    sum_rates: Tuple[float, ...]

    def __post_init__(self):
        if len(self.snr_grid) != len(self.sum_rates):
            raise ConfigError("snr grid and rate list must have equal length")
        if len(self.snr_grid) < 3:
            raise ConfigError("need at least 3 SNR points")
        grid = np.asarray(self.snr_grid)
        if np.any(np.diff(grid) <= 0):
            raise ConfigError("snr grid must be strictly increasing")
        if np.log10(grid[-1] / grid[0]) < 2.0 - 1e-9:
            raise ConfigError("snr grid must span at least 20 dB")


def dof_slope(points: DofEstimate) -> float:
    """Least-squares slope of network sum-rate versus log2(snr).

    The slope is the empirical pre-log factor: bits per 3.01 dB of SNR for
    the whole network.
    """
    x = np.log2(np.asarray(points.snr_grid))
    y = np.asarray(points.sum_rates)
    return float(np.polyfit(x, y, 1)[0])
