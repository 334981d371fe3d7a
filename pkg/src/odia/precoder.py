"""Per-cell zero-forcing transmit precoding with unit-power columns.

The base station stacks the selected users' effective channels (rows f^H),
inverts, and scales columns to unit norm.  With exact feedback this cancels
intra-cell interference exactly; with quantized feedback the same recipe is
applied to the reconstructed channel matrix and a residual leak survives.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .codebook import Codebook
from .numerics import DEFAULT_CONDITION_CAP, invert
from .receiver import QuantizedChannel


@dataclass(frozen=True)
class PrecoderSet:
    """User-specific beamforming for one cell.

    ``matrix`` columns are the unit-norm per-user beam vectors; ``gains``
    are the effective channel gains gamma (the diagonal of basis @ matrix,
    squared) and ``basis`` is the stacked channel matrix the inversion used.
    """

    cell: int
    matrix: np.ndarray  # (S, S), unit-norm columns
    gains: np.ndarray   # (S,)
    basis: np.ndarray   # (S, S), rows are conjugated effective channels

    @property
    def streams(self) -> int:
        return self.matrix.shape[1]


def zero_forcing_precoder(
    effective_channels: Sequence[np.ndarray],
    cell: int = 0,
    condition_cap: float = DEFAULT_CONDITION_CAP,
) -> PrecoderSet:
    """Invert the stacked effective channels and normalize per-stream power.

    ``effective_channels`` holds one length-S vector per selected user, in
    stream order.  gamma_j equals 1 / [(F F^H)^-1]_{jj}; it is computed from
    the column norms of F^-1, which is the same quantity.  Raises
    :class:`~odia.errors.SingularMatrixError` when F is near singular
    (scheduler policy decides whether to resample or skip).
    """
    f_matrix = np.stack([np.asarray(f, dtype=np.complex128).conj() for f in effective_channels])
    streams, dim = f_matrix.shape
    if streams != dim:
        raise ValueError(
            f"need exactly {dim} users for a {dim}-stream zero-forcing precoder, got {streams}"
        )
    inv = invert(f_matrix, condition_cap)
    col_norms = np.linalg.norm(inv, axis=0)
    gains = 1.0 / col_norms**2
    matrix = inv / col_norms[None, :]
    return PrecoderSet(cell=cell, matrix=matrix, gains=gains, basis=f_matrix)


def partial_zero_forcing_precoder(
    effective_channels: Sequence[np.ndarray],
    cell: int = 0,
    condition_cap: float = DEFAULT_CONDITION_CAP,
) -> PrecoderSet:
    """Zero forcing for fewer users than streams (skip-stream outage policy).

    Uses the right pseudo-inverse of the S' x S channel stack, so the S'
    served users still see no intra-cell interference; unserved stream slots
    simply stay silent (per-stream symbol power is unchanged).
    """
    f_matrix = np.stack([np.asarray(f, dtype=np.complex128).conj() for f in effective_channels])
    streams, dim = f_matrix.shape
    if streams == dim:
        return zero_forcing_precoder(effective_channels, cell, condition_cap)
    gram = f_matrix @ f_matrix.conj().T
    pinv = f_matrix.conj().T @ invert(gram, condition_cap)  # (S, S')
    col_norms = np.linalg.norm(pinv, axis=0)
    gains = 1.0 / col_norms**2
    matrix = pinv / col_norms[None, :]
    return PrecoderSet(cell=cell, matrix=matrix, gains=gains, basis=f_matrix)


def reconstruct_channel(q: QuantizedChannel, cb: Codebook, gain_exponent: int = 2) -> np.ndarray:
    """Rebuild a channel vector from codebook feedback.

    The reported gain is ||f||^2; ``gain_exponent`` selects the magnitude
    applied to the codeword: 2 reconstructs ||f||^2 * c (the printed rule),
    1 reconstructs ||f|| * c (exact-magnitude variant).  Either way the
    zero-forcing directions are identical, because per-row positive scaling
    cancels under column normalization; only the bookkept gains differ.
    """
    if gain_exponent not in (1, 2):
        raise ValueError("gain_exponent must be 1 or 2")
    magnitude = q.gain if gain_exponent == 2 else np.sqrt(q.gain)
    return magnitude * cb.codewords[q.index]


def quantized_precoder(
    reports: Sequence[QuantizedChannel],
    cb: Codebook,
    cell: int = 0,
    gain_exponent: int = 2,
    condition_cap: float = DEFAULT_CONDITION_CAP,
) -> PrecoderSet:
    """Zero-forcing precoder built from codebook feedback only."""
    rebuilt = [reconstruct_channel(q, cb, gain_exponent) for q in reports]
    return zero_forcing_precoder(rebuilt, cell=cell, condition_cap=condition_cap)
