"""Quantization codebooks: random isotropic and approximate line packings.

A codebook is a set of unit-norm complex vectors used to quantize effective
channel directions.  Pairwise separation is measured by the squared chordal
distance between lines, normalized to [0, 1/2] so that orthogonal lines sit
at the maximum 1/2 (an orthonormal pair of codewords scores exactly 0.5).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import CodebookFormatError
from .numerics import Rng, complex_gaussian, sample_orthonormal_columns

KINDS = ("random", "grassmannian")


@dataclass(frozen=True)
class Codebook:
    """``size`` unit-norm codewords of dimension ``dimension`` (rows of ``codewords``)."""

    dimension: int
    size: int
    codewords: np.ndarray  # (size, dimension) complex, unit-norm rows
    kind: str

    def __post_init__(self):
        if self.size < 1 or self.dimension < 1:
            raise ValueError("codebook needs size >= 1 and dimension >= 1")
        if self.codewords.shape != (self.size, self.dimension):
            raise ValueError(
                f"codewords shape {self.codewords.shape} does not match "
                f"(size, dimension) = ({self.size}, {self.dimension})"
            )
        norms = np.linalg.norm(self.codewords, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-10):
            raise ValueError("codewords must be unit norm to 1e-10")
        if self.kind not in KINDS:
            raise ValueError(f"unknown codebook kind {self.kind!r}")

    @property
    def feedback_bits(self) -> int:
        """Bits needed to address a codeword: ceil(log2 size)."""
        return max(int(math.ceil(math.log2(self.size))), 0) if self.size > 1 else 0


@dataclass(frozen=True)
class PackingQuality:
    """Separation report for a packing.

    ``min_pairwise_chordal_sq`` uses the normalized squared chordal distance
    (1 - |a^H b|^2) / 2.  ``bound_rankin`` is the simplex-type upper bound
    (S-1) N_f / (2 S (N_f - 1)); ``bound_hamming`` is the sphere-covering
    style term (1/N_f)^(1/(S-1)).  ``variance_history`` records the variance
    of all pairwise distances over refinement iterations (non-increasing).
    """

    min_pairwise_chordal_sq: float
    bound_rankin: float
    bound_hamming: float
    variance_history: Tuple[float, ...] = ()

    @property
    def bound_composite(self) -> float:
        return min(0.5, self.bound_rankin, self.bound_hamming)


def pairwise_chordal_sq(codewords: np.ndarray) -> np.ndarray:
    """Matrix of normalized squared chordal distances between codeword lines."""
    coherence_sq = np.abs(codewords @ codewords.conj().T) ** 2
    d = (1.0 - np.clip(coherence_sq, 0.0, 1.0)) / 2.0
    np.fill_diagonal(d, np.nan)
    return d


def _min_and_var(codewords: np.ndarray):
    d = pairwise_chordal_sq(codewords)
    vals = d[~np.isnan(d)]
    return float(np.min(vals)), float(np.var(vals))


def packing_bounds(dim: int, size: int):
    """(rankin, hamming) upper-bound terms for ``size`` lines in dimension ``dim``."""
    if dim == 1:
        # All unit scalars are the same line; the only packing distance is 0.
        return 0.0, 0.0
    rankin = (dim - 1) * size / (2.0 * dim * (size - 1)) if size > 1 else 0.5
    hamming = (1.0 / size) ** (1.0 / (dim - 1))
    return float(rankin), float(hamming)


def random_codebook(rng: Rng, dim: int, size: int) -> Codebook:
    """Codewords drawn i.i.d. uniformly on the complex unit sphere."""
    if dim < 1 or size < 1:
        raise ValueError("need dim >= 1 and size >= 1")
    raw = complex_gaussian(rng, (size, dim))
    norms = np.linalg.norm(raw, axis=1, keepdims=True)
    # Zero-norm draws have probability zero; resample defensively anyway.
    while np.any(norms == 0.0):
        bad = norms[:, 0] == 0.0
        raw[bad] = complex_gaussian(rng, (int(bad.sum()), dim))
        norms = np.linalg.norm(raw, axis=1, keepdims=True)
    return Codebook(dimension=dim, size=size, codewords=raw / norms, kind="random")


def _repulsion_direction(words: np.ndarray):
    # Gradient of |c_i^H c_j|^2 with respect to c_i is c_j (c_j^H c_i);
    # weights concentrate the push on the most coherent pairs.
    inner = words @ words.conj().T
    coherence_sq = np.abs(inner) ** 2
    np.fill_diagonal(coherence_sq, 0.0)
    peak = coherence_sq.max()
    if peak <= 0.0:
        return None
    weights = (coherence_sq / peak) ** 4
    return (weights * inner) @ words


def grassmannian_codebook(
    rng: Rng,
    dim: int,
    size: int,
    iterations: int = 500,
    step: float = 0.05,
    step_decay: float = 0.99,
):
    """Approximate max-min line packing via repulsion refinement.

    Starts from a random codebook (or an exactly orthonormal one when
    ``size <= dim``, which is optimal) and repeatedly pushes each codeword
    away from its most coherent neighbours, renormalizing after each step.
    The first half of the iteration budget spreads the lines freely; the
    second half equalizes, accepting only steps that do not increase the
    variance of the pairwise distances (with backtracking), so the recorded
    variance history is non-increasing.  Best effort only: the reported
    quality is measured, not guaranteed optimal.

    Returns ``(Codebook, PackingQuality)``.
    """
    if size < 2:
        raise ValueError("a packing needs at least two codewords")
    if dim < 1:
        raise ValueError("need dim >= 1")
    rankin, hamming = packing_bounds(dim, size)

    if size <= dim:
        # An orthonormal set is an exact optimum: every pair at distance 1/2.
        words = sample_orthonormal_columns(rng, dim, size).T.copy()
        min_d, var = _min_and_var(words)
        quality = PackingQuality(min_d, rankin, hamming, variance_history=(var,))
        return Codebook(dim, size, words, "grassmannian"), quality

    words = random_codebook(rng, dim, size).codewords.copy()
    if dim == 1:
        min_d, var = _min_and_var(words)
        quality = PackingQuality(min_d, rankin, hamming, variance_history=(var,))
        return Codebook(dim, size, words, "grassmannian"), quality

    spread_iters = int(iterations) // 2
    current_step = step
    for _ in range(spread_iters):
        push = _repulsion_direction(words)
        if push is None:
            break
        words = words - current_step * push
        words /= np.linalg.norm(words, axis=1, keepdims=True)
        current_step *= step_decay

    history = [_min_and_var(words)[1]]
    for _ in range(int(iterations) - spread_iters):
        push = _repulsion_direction(words)
        if push is None:
            history.append(history[-1])
            continue
        accepted = False
        for scale in (1.0, 0.5, 0.25, 0.125, 0.0625):
            candidate = words - current_step * scale * push
            candidate /= np.linalg.norm(candidate, axis=1, keepdims=True)
            _, cand_var = _min_and_var(candidate)
            if cand_var <= history[-1] + 1e-15:
                words = candidate
                history.append(cand_var)
                accepted = True
                break
        if not accepted:
            history.append(history[-1])
        current_step *= step_decay

    min_d, var = _min_and_var(words)
    quality = PackingQuality(min_d, rankin, hamming, variance_history=tuple(history))
    return Codebook(dim, size, words, "grassmannian"), quality


def save_codebook(cb: Codebook, path) -> None:
    """Write the plain-text format: header ``dim size kind``, then one line
    per codeword with re/im parts interleaved at 17 significant digits."""
    lines = [f"{cb.dimension} {cb.size} {cb.kind}"]
    for word in cb.codewords:
        parts = []
        for entry in word:
            parts.append(f"{entry.real:.17g}")
            parts.append(f"{entry.imag:.17g}")
        lines.append(" ".join(parts))
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def load_codebook(path) -> Codebook:
    with open(path, "r", encoding="ascii") as fh:
        raw_lines = fh.read().splitlines()
    lines = [(i + 1, line.strip()) for i, line in enumerate(raw_lines) if line.strip()]
    if not lines:
        raise CodebookFormatError(1, "empty codebook file")
    header_no, header = lines[0]
    fields = header.split()
    if len(fields) != 3:
        raise CodebookFormatError(header_no, "header must be 'dim size kind'")
    try:
        dim, size = int(fields[0]), int(fields[1])
    except ValueError as exc:
        raise CodebookFormatError(header_no, f"bad header integers: {exc}") from None
    kind = fields[2]
    if kind not in KINDS:
        raise CodebookFormatError(header_no, f"unknown kind {kind!r}")
    if size < 1 or dim < 1:
        raise CodebookFormatError(header_no, "size and dim must be >= 1")
    body = lines[1:]
    if len(body) < size:
        missing = len(body) + 1
        raise CodebookFormatError(
            body[-1][0] + 1 if body else header_no + 1,
            f"expected {size} codeword rows, file ends before row {missing}",
        )
    if len(body) > size:
        raise CodebookFormatError(body[size][0], f"expected only {size} codeword rows")
    words = np.zeros((size, dim), dtype=np.complex128)
    for row, (line_no, line) in enumerate(body):
        parts = line.split()
        if len(parts) != 2 * dim:
            raise CodebookFormatError(
                line_no, f"expected {2 * dim} floats in codeword row, got {len(parts)}"
            )
        try:
            values = [float(p) for p in parts]
        except ValueError as exc:
            raise CodebookFormatError(line_no, f"bad float: {exc}") from None
        words[row] = np.array(values[0::2]) + 1j * np.array(values[1::2])
    return Codebook(dimension=dim, size=size, codewords=words, kind=kind)
