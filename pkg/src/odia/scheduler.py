"""User selection algorithms.

Four schedulers share the same decision shape:

* ``odia``    -- pick the S users with the smallest interference-leakage
  metric (pure degrees-of-freedom play).
* ``se_odia`` -- semiorthogonal variant: per stream, pick at random among
  pool users that pass an interference cap (C1) and a projected-gain floor
  (C2), then shrink the pool to users sufficiently orthogonal to the picks.
* ``max_snr`` -- pick the S users with the largest matched-filter signal
  power (greedy on desired power, blind to interference).
* ``min_inr`` -- per stream, pick the user whose receive filter best nulls
  inter-cell plus off-stream intra-cell leakage.

Selection is decoupled from precoding: every algorithm hands the selected
users' effective channels to the same zero-forcing transmit precoder.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .channel import NetworkRealization
from .errors import ConfigError
from .numerics import Rng, svd
from .receiver import CellReports

OUTAGE_POLICIES = ("fallback-min-eta", "skip-stream")


@dataclass(frozen=True)
class ScheduleDecision:
    """Selected user indices in stream order, plus outage accounting.

    ``outage_count`` is the number of stream slots that no eligible user
    could fill; under the fallback policy those slots are still served.
    Under skip-stream the selected tuple is shorter than S.
    """

    cell: int
    selected: Tuple[int, ...]
    outage_count: int
    algorithm: str
    trace: Optional["SeOdiaTrace"] = None

    def __post_init__(self):
        if len(set(self.selected)) != len(self.selected):
            raise ValueError("selected user indices must be distinct")


@dataclass(frozen=True)
class SeOdiaParams:
    """Thresholds for semiorthogonal selection.

    ``eta_I`` caps the interference metric (condition C1), ``eta_D`` floors
    the projected channel gain (condition C2), and ``alpha`` in (0, 1] is
    the semiorthogonality cosine threshold.  The effective-gain guarantee
    only holds when (S-1) * alpha^2 < 1; alpha = 1 is still accepted because
    it turns the orthogonality filter off (the plain-scheduler compat
    settings need it).  ``eta_I_pool_min`` replaces eta_I with the smallest
    metric in the current pool at every step, which reduces the selection to
    the plain smallest-metric scheduler when eta_D = 0 and alpha = 1.
    """

    eta_I: float
    eta_D: float
    alpha: float
    eta_I_pool_min: bool = False

    def __post_init__(self):
        if not (0.0 < self.alpha <= 1.0):
            raise ConfigError(f"alpha must be in (0, 1], got {self.alpha}")
        if self.eta_D < 0:
            raise ConfigError(f"eta_D must be >= 0, got {self.eta_D}")
        if self.eta_I < 0:
            raise ConfigError(f"eta_I must be >= 0, got {self.eta_I}")

    @classmethod
    def odia_compat(cls) -> "SeOdiaParams":
        """Settings under which SE selection degenerates to min-metric order."""
        return cls(eta_I=math.inf, eta_D=0.0, alpha=1.0, eta_I_pool_min=True)

    @classmethod
    def theorem_schedule(cls, epsilon_D: float, epsilon_I: float, snr: float,
                         alpha: float = 0.8) -> "SeOdiaParams":
        """Threshold schedule tied to the operating SNR: the gain floor grows
        like log(snr) and the interference cap shrinks like 1/snr."""
        if epsilon_D <= 0 or epsilon_I <= 0:
            raise ConfigError("epsilon_D and epsilon_I must be positive")
        return cls(eta_I=epsilon_I / snr, eta_D=epsilon_D * math.log(snr), alpha=alpha)

    def gain_bound_divisor(self, streams: int) -> float:
        """Divisor in the guaranteed-gain bound; requires (S-1) alpha^2 < 1."""
        slack = 1.0 - (streams - 1) * self.alpha**2
        if slack <= 0:
            raise ConfigError(
                f"gain bound needs (S-1)*alpha^2 < 1, got S={streams}, alpha={self.alpha}"
            )
        return 1.0 + ((streams - 1) ** 4) * self.alpha**2 / slack


@dataclass
class OrthogonalBasisState:
    """Gram-Schmidt residual directions of the users selected so far."""

    vectors: List[np.ndarray] = field(default_factory=list)

    def append(self, b: np.ndarray) -> None:
        self.vectors.append(np.asarray(b, dtype=np.complex128))

    def __len__(self):
        return len(self.vectors)


@dataclass
class SeOdiaTrace:
    """Per-step diagnostics of one semiorthogonal selection run."""

    pool_sizes: List[int] = field(default_factory=list)
    eligible_sizes: List[int] = field(default_factory=list)
    c1_fractions: List[float] = field(default_factory=list)
    c2_fractions: List[float] = field(default_factory=list)
    projection_norms_sq: List[float] = field(default_factory=list)
    outage_flags: List[bool] = field(default_factory=list)


def orthogonal_projection(f: np.ndarray, basis: OrthogonalBasisState) -> np.ndarray:
    """Residual of f after removing its components along the basis vectors."""
    residual = np.asarray(f, dtype=np.complex128).copy()
    for b in basis.vectors:
        norm_sq = np.real(np.vdot(b, b))
        if norm_sq == 0.0:
            raise ValueError("basis vectors must be nonzero")
        residual -= (np.vdot(b, f) / norm_sq) * b
    return residual


def _stable_smallest(values: np.ndarray, count: int) -> Tuple[int, ...]:
    order = np.argsort(values, kind="stable")  # ties resolve to the lower index
    return tuple(int(j) for j in order[:count])


def schedule_odia(reports: CellReports, streams: Optional[int] = None) -> ScheduleDecision:
    """Select the users with the S smallest leakage metrics, in metric order."""
    s = streams if streams is not None else reports.effective.shape[1]
    if len(reports) < s:
        raise ValueError(f"need at least {s} users, got {len(reports)}")
    return ScheduleDecision(
        cell=reports.cell,
        selected=_stable_smallest(reports.metrics, s),
        outage_count=0,
        algorithm="odia",
    )


def schedule_se_odia(
    reports: CellReports,
    params: SeOdiaParams,
    rng: Rng,
    outage_policy: str = "fallback-min-eta",
    streams: Optional[int] = None,
    collect_trace: bool = False,
) -> ScheduleDecision:
    """Semiorthogonal selection with interference and gain thresholds.

    Requires exact effective channels in the reports.  At each step the pool
    is the set of users orthogonal enough (cosine < alpha) to every already
    selected direction; among pool users satisfying C1 (metric <= eta_I) and
    C2 (projected gain >= eta_D) one is picked uniformly at random.  An
    empty eligible set is a scheduling outage, resolved by the policy:
    ``fallback-min-eta`` serves the smallest-metric pool user anyway,
    ``skip-stream`` leaves the slot silent.
    """
    if reports.is_quantized:
        raise ValueError("semiorthogonal selection needs exact effective channels")
    if outage_policy not in OUTAGE_POLICIES:
        raise ConfigError(f"unknown outage policy {outage_policy!r}")
    s_total = streams if streams is not None else reports.effective.shape[1]
    n = len(reports)
    if n < s_total:
        raise ValueError(f"need at least {s_total} users, got {n}")

    eta = reports.metrics
    f = reports.effective
    f_norms = np.linalg.norm(f, axis=1)
    pool = np.ones(n, dtype=bool)
    selected: List[int] = []
    basis: List[np.ndarray] = []
    outages = 0
    trace = SeOdiaTrace() if collect_trace else None

    for step in range(s_total):
        pool_idx = np.flatnonzero(pool)

        # Projected residuals of every pool user against the chosen basis.
        residual = f[pool_idx].copy()
        for b in basis:
            coeff = residual @ b.conj() / np.real(np.vdot(b, b))
            residual -= coeff[:, None] * b[None, :]
        res_norm_sq = np.sum(np.abs(residual) ** 2, axis=1)

        if pool_idx.size:
            eta_cap = float(np.min(eta[pool_idx])) if params.eta_I_pool_min else params.eta_I
            c1 = eta[pool_idx] <= eta_cap
            c2 = res_norm_sq >= params.eta_D
            eligible = pool_idx[c1 & c2]
        else:
            c1 = c2 = np.zeros(0, dtype=bool)
            eligible = pool_idx

        if trace is not None:
            trace.pool_sizes.append(int(pool_idx.size))
            trace.eligible_sizes.append(int(eligible.size))
            trace.c1_fractions.append(float(np.mean(c1)) if pool_idx.size else 0.0)
            trace.c2_fractions.append(float(np.mean(c2)) if pool_idx.size else 0.0)

        if eligible.size:
            pick = int(rng.choice(eligible))
            outage = False
        else:
            outages += 1
            outage = True
            if outage_policy == "skip-stream":
                if trace is not None:
                    trace.outage_flags.append(True)
                break
            candidates = pool_idx if pool_idx.size else np.setdiff1d(np.arange(n), selected)
            pick = int(candidates[int(np.argmin(eta[candidates]))])

        if pick in pool_idx:
            b_pick = residual[np.flatnonzero(pool_idx == pick)[0]]
        else:
            # Fallback pick from outside the pool: recompute its residual.
            state = OrthogonalBasisState(list(basis))
            b_pick = orthogonal_projection(f[pick], state)

        selected.append(pick)
        basis.append(b_pick)
        if trace is not None:
            trace.projection_norms_sq.append(float(np.sum(np.abs(b_pick) ** 2)))
            trace.outage_flags.append(outage)

        # Next pool: drop the pick, keep users nearly orthogonal to it.
        pool[pick] = False
        b_norm = np.linalg.norm(b_pick)
        if b_norm > 0:
            cosines = np.abs(f @ b_pick.conj()) / np.where(f_norms > 0, f_norms, 1.0) / b_norm
            pool &= cosines < params.alpha

    return ScheduleDecision(
        cell=reports.cell,
        selected=tuple(selected),
        outage_count=outages,
        algorithm="se_odia",
        trace=trace,
    )


def max_snr_reports(real: NetworkRealization, cell: int) -> CellReports:
    """Matched-filter reports: each user aims its filter at the strongest
    direction of its own desired channel and reports the captured power."""
    cfg = real.config
    hp = np.einsum("nlm,ms->nls", real.channels[cell, :, cell], real.reference_beamformers[cell])
    res = svd(hp)  # (N, L, S) batch
    u = res.left[:, :, 0]
    metrics = res.singular_values[:, 0] ** 2
    f = np.einsum("nl,nls->ns", u.conj(), hp).conj()
    return CellReports(cell=cell, metrics=metrics, beamformers=u, effective=f)


def schedule_max_snr(
    real: NetworkRealization,
    cell: int,
    reports: Optional[CellReports] = None,
    streams: Optional[int] = None,
) -> ScheduleDecision:
    """Select the S users with the largest matched-filter power."""
    if reports is None:
        reports = max_snr_reports(real, cell)
    s = streams if streams is not None else real.config.S
    if len(reports) < s:
        raise ValueError(f"need at least {s} users, got {len(reports)}")
    order = np.argsort(-reports.metrics, kind="stable")
    return ScheduleDecision(
        cell=cell,
        selected=tuple(int(j) for j in order[:s]),
        outage_count=0,
        algorithm="max_snr",
    )


def min_inr_stream_reports(real: NetworkRealization, cell: int):
    """Per-user, per-stream leakage minimization for the min-INR baseline.

    For stream m the user nulls the stack of all inter-cell beams plus its
    own cell's beams other than m.  Returns ``(metrics, filters, effective)``
    with shapes (N, S), (N, S, L), (N, S, S); ``effective[j, m]`` is user j's
    desired channel through the full reference beamformer when it uses its
    stream-m filter.
    """
    cfg = real.config
    h_all = real.channels[cell]
    hp = np.einsum("nklm,kms->nkls", h_all, real.reference_beamformers)  # (N, K, L, S)
    others = [k for k in range(cfg.K) if k != cell]
    inter = hp[:, others]  # (N, K-1, L, S)
    inter_rows = np.swapaxes(inter, -2, -1).conj().reshape(cfg.N, (cfg.K - 1) * cfg.S, cfg.L)
    own = hp[:, cell]  # (N, L, S)

    metrics = np.zeros((cfg.N, cfg.S))
    filters = np.zeros((cfg.N, cfg.S, cfg.L), dtype=np.complex128)
    effective = np.zeros((cfg.N, cfg.S, cfg.S), dtype=np.complex128)
    for m in range(cfg.S):
        keep = [s for s in range(cfg.S) if s != m]
        intra_rows = np.swapaxes(own[:, :, keep], -2, -1).conj()  # (N, S-1, L)
        stack = np.concatenate([intra_rows, inter_rows], axis=1)
        rows = stack.shape[1]
        if rows < cfg.L:
            pad = np.zeros((cfg.N, cfg.L - rows, cfg.L), dtype=np.complex128)
            stack = np.concatenate([stack, pad], axis=1)
        res = svd(stack)
        u = res.right[:, :, -1]
        metrics[:, m] = res.singular_values[:, -1] ** 2
        filters[:, m] = u
        effective[:, m] = np.einsum("nl,nls->ns", u.conj(), own).conj()
    return metrics, filters, effective


def schedule_min_inr(
    real: NetworkRealization,
    cell: int,
    stream_reports=None,
    streams: Optional[int] = None,
):
    """Greedy per-stream assignment of the smallest min-INR metrics.

    Streams are filled in order m = 1..S; a user already holding a stream is
    skipped (one stream per user per block).  Returns the decision plus a
    :class:`CellReports` view in which each selected user carries the filter
    and effective channel of its assigned stream.
    """
    cfg = real.config
    if stream_reports is None:
        stream_reports = min_inr_stream_reports(real, cell)
    metrics, filters, effective = stream_reports
    s_total = streams if streams is not None else cfg.S
    n = metrics.shape[0]
    if n < s_total:
        raise ValueError(f"need at least {s_total} users, got {n}")

    selected: List[int] = []
    view_metrics = metrics[:, 0].copy()
    view_filters = filters[:, 0].copy()
    view_effective = effective[:, 0].copy()
    for m in range(s_total):
        costs = metrics[:, m].copy()
        if selected:
            costs[selected] = np.inf
        pick = int(np.argmin(costs))  # ties resolve to the lower index
        selected.append(pick)
        view_metrics[pick] = metrics[pick, m]
        view_filters[pick] = filters[pick, m]
        view_effective[pick] = effective[pick, m]

    decision = ScheduleDecision(
        cell=cell,
        selected=tuple(selected),
        outage_count=0,
        algorithm="min_inr",
    )
    reports = CellReports(
        cell=cell,
        metrics=view_metrics,
        beamformers=view_filters,
        effective=view_effective,
    )
    return decision, reports
