"""Per-user receive processing, done with local channel knowledge only.

Each user stacks the cross-cell interference it would receive through the
reference beams, picks the unit-norm receive filter that minimizes that
leakage (smallest right-singular vector of the stack), and reports back a
scheduling metric (the leakage power), plus its effective desired channel,
either exactly or quantized against a shared codebook.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .channel import NetworkRealization
from .codebook import Codebook
from .errors import DegenerateInputError
from .numerics import svd


@dataclass(frozen=True)
class QuantizedChannel:
    """Codebook feedback: codeword index, channel gain ||f||^2, and the
    squared chordal distance between f and the chosen codeword."""

    index: int
    gain: float
    distortion: float


@dataclass(frozen=True)
class UserReport:
    """What one user feeds back to its serving base station."""

    cell: int
    user: int
    metric: float
    beamformer: np.ndarray  # (L,) unit norm
    effective_channel: Union[np.ndarray, QuantizedChannel]


@dataclass(frozen=True)
class InterferenceProfile:
    """Received interference power per interfering cell; sums to the metric."""

    cell: int
    user: int
    by_cell: dict  # source cell -> leakage power through that cell's beams

    @property
    def total(self) -> float:
        return float(sum(self.by_cell.values()))


@dataclass(frozen=True)
class CellReports:
    """All N reports of one cell, stored column-wise for vectorized access.

    ``effective`` always holds the exact receiver-side channel vectors; when
    the cell operates with limited feedback, the base station only sees the
    ``quantized`` triple and :meth:`report` reflects that.
    """

    cell: int
    metrics: np.ndarray       # (N,)
    beamformers: np.ndarray   # (N, L)
    effective: np.ndarray     # (N, S) exact vectors
    quantized_indices: Optional[np.ndarray] = None    # (N,) int
    quantized_gains: Optional[np.ndarray] = None      # (N,)
    quantized_distortions: Optional[np.ndarray] = None  # (N,)

    def __len__(self):
        return self.metrics.shape[0]

    @property
    def is_quantized(self) -> bool:
        return self.quantized_indices is not None

    def report(self, user: int) -> UserReport:
        if self.is_quantized:
            eff: Union[np.ndarray, QuantizedChannel] = QuantizedChannel(
                index=int(self.quantized_indices[user]),
                gain=float(self.quantized_gains[user]),
                distortion=float(self.quantized_distortions[user]),
            )
        else:
            eff = self.effective[user]
        return UserReport(
            cell=self.cell,
            user=user,
            metric=float(self.metrics[user]),
            beamformer=self.beamformers[user],
            effective_channel=eff,
        )

    @classmethod
    def from_reports(cls, reports) -> "CellReports":
        """Build the columnar form from individual exact-CSI reports."""
        reports = list(reports)
        if not reports:
            raise ValueError("need at least one report")
        if any(isinstance(r.effective_channel, QuantizedChannel) for r in reports):
            raise ValueError("from_reports only supports exact effective channels")
        return cls(
            cell=reports[0].cell,
            metrics=np.array([r.metric for r in reports]),
            beamformers=np.stack([r.beamformer for r in reports]),
            effective=np.stack([r.effective_channel for r in reports]),
        )


def stack_interference_matrix(real: NetworkRealization, cell: int, user: int) -> np.ndarray:
    """Stack (H_k P_k)^H row blocks for all interfering cells k != cell.

    Returns a ((K-1)S, L) matrix; blocks appear in ascending k.  For a
    single-cell network the stack is empty (0 rows).
    """
    cfg = real.config
    blocks = []
    for k in range(cfg.K):
        if k == cell:
            continue
        hp = real.channels[cell, user, k] @ real.reference_beamformers[k]  # (L, S)
        blocks.append(hp.conj().T)
    if not blocks:
        return np.zeros((0, cfg.L), dtype=np.complex128)
    return np.concatenate(blocks, axis=0)


def optimal_beamformer(g: np.ndarray):
    """Unit receive filter minimizing ||g @ u||^2, and that minimum.

    The filter is the right-singular vector of the smallest singular value.
    Wide inputs (fewer rows than columns) are zero-padded so the null space
    is reachable and the metric is exactly the minimized leakage power.
    """
    g = np.asarray(g, dtype=np.complex128)
    rows, cols = g.shape
    if rows == 0:
        # No interferers at all: any unit filter gives zero leakage.
        u = np.zeros(cols, dtype=np.complex128)
        u[0] = 1.0
        return u, 0.0
    if rows < cols:
        g = np.concatenate([g, np.zeros((cols - rows, cols), dtype=np.complex128)], axis=0)
    res = svd(g)
    u = res.right[:, -1]
    metric = float(res.singular_values[-1] ** 2)
    return u, metric


def effective_channel(real: NetworkRealization, cell: int, user: int, u: np.ndarray) -> np.ndarray:
    """Desired channel seen through the receive filter: (u^H H_i P_i)^H, length S."""
    hp = real.channels[cell, user, cell] @ real.reference_beamformers[cell]  # (L, S)
    return (u.conj() @ hp).conj()


def interference_profile(real: NetworkRealization, cell: int, user: int, u: np.ndarray) -> InterferenceProfile:
    """Leakage power received from each other cell's reference beams."""
    cfg = real.config
    by_cell = {}
    for k in range(cfg.K):
        if k == cell:
            continue
        hp = real.channels[cell, user, k] @ real.reference_beamformers[k]
        by_cell[k] = float(np.sum(np.abs(u.conj() @ hp) ** 2))
    return InterferenceProfile(cell=cell, user=user, by_cell=by_cell)


def quantize_channel(f: np.ndarray, cb: Codebook):
    """Quantize a nonzero channel vector against a codebook.

    Picks the codeword maximizing |f^H c|^2 / ||f||^2 (ties go to the lowest
    index); returns ``(index, gain, distortion)`` with gain = ||f||^2 and
    distortion the squared chordal distance, in [0, 1].
    """
    f = np.asarray(f, dtype=np.complex128)
    gain = float(np.sum(np.abs(f) ** 2))
    if gain == 0.0:
        raise DegenerateInputError("cannot quantize a zero channel vector")
    if cb.dimension != f.shape[0]:
        raise ValueError(
            f"codeword dimension {cb.dimension} does not match channel length {f.shape[0]}"
        )
    alignment = np.abs(cb.codewords @ f.conj()) ** 2 / gain  # (N_f,)
    index = int(np.argmax(alignment))
    distortion = float(min(max(1.0 - alignment[index], 0.0), 1.0))
    return index, gain, distortion


def build_report(
    real: NetworkRealization,
    cell: int,
    user: int,
    codebook: Optional[Codebook] = None,
) -> UserReport:
    """Full per-user feedback: optimal filter, metric, effective channel."""
    g = stack_interference_matrix(real, cell, user)
    u, metric = optimal_beamformer(g)
    f = effective_channel(real, cell, user, u)
    if codebook is None:
        eff: Union[np.ndarray, QuantizedChannel] = f
    else:
        index, gain, distortion = quantize_channel(f, codebook)
        eff = QuantizedChannel(index=index, gain=gain, distortion=distortion)
    return UserReport(cell=cell, user=user, metric=metric, beamformer=u, effective_channel=eff)


def cell_reports(
    real: NetworkRealization,
    cell: int,
    codebook: Optional[Codebook] = None,
) -> CellReports:
    """Reports for every user of one cell, computed in a single batch.

    Equivalent to calling :func:`build_report` per user (the SVD path and
    phase conventions are shared), but batches the per-user decompositions.
    """
    cfg = real.config
    h_all = real.channels[cell]  # (N, K, L, M)
    hp = np.einsum("nklm,kms->nkls", h_all, real.reference_beamformers)  # (N, K, L, S)
    others = [k for k in range(cfg.K) if k != cell]

    if others:
        g = hp[:, others]                                  # (N, K-1, L, S)
        g = np.swapaxes(g, -2, -1).conj()                  # (N, K-1, S, L)
        g = g.reshape(cfg.N, (cfg.K - 1) * cfg.S, cfg.L)   # ascending k blocks
        if g.shape[1] < cfg.L:
            pad = np.zeros((cfg.N, cfg.L - g.shape[1], cfg.L), dtype=np.complex128)
            g = np.concatenate([g, pad], axis=1)
        res = svd(g)
        u = res.right[:, :, -1]                            # (N, L)
        metrics = res.singular_values[:, -1] ** 2
    else:
        u = np.zeros((cfg.N, cfg.L), dtype=np.complex128)
        u[:, 0] = 1.0
        metrics = np.zeros(cfg.N)

    own = hp[:, cell]                                      # (N, L, S)
    f = np.einsum("nl,nls->ns", u.conj(), own).conj()      # (N, S)

    if codebook is None:
        return CellReports(cell=cell, metrics=metrics, beamformers=u, effective=f)

    gains = np.sum(np.abs(f) ** 2, axis=1)
    if np.any(gains == 0.0):
        raise DegenerateInputError("cannot quantize a zero channel vector")
    alignment = np.abs(f.conj() @ codebook.codewords.T) ** 2 / gains[:, None]  # (N, N_f)
    indices = np.argmax(alignment, axis=1)
    distortions = np.clip(1.0 - alignment[np.arange(cfg.N), indices], 0.0, 1.0)
    return CellReports(
        cell=cell,
        metrics=metrics,
        beamformers=u,
        effective=f,
        quantized_indices=indices.astype(np.int64),
        quantized_gains=gains,
        quantized_distortions=distortions,
    )
