"""Dense complex linear algebra kernels and seeded random sampling.

Everything downstream (channels, receive filters, precoders) is built on the
small set of primitives here.  Matrices are plain ``complex128`` ndarrays.
All randomness flows through :class:`Rng`, never through ambient entropy, so
any simulation is reproducible from a single integer seed.

The SVD and inverse are backed by LAPACK through numpy; this module pins the
conventions on top of them (descending singular values, a deterministic phase
for the singular vectors, a condition cap for inversion) that the rest of the
package relies on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularMatrixError, SvdConvergenceError

#: Default condition-number cap for matrix inversion.  Gaussian channel draws
#: are singular only on a measure-zero set, but near-singular draws would
#: poison rate statistics, so callers treat the error as a resample signal.
DEFAULT_CONDITION_CAP = 1e12

_MASK64 = 0xFFFFFFFFFFFFFFFF


def mix64(*values: int) -> int:
    """Mix integers into a 64-bit seed (splitmix64 chain).

    Deterministic and platform independent; used to derive independent
    per-trial / per-cell random streams from a master seed.
    """
    state = 0
    for v in values:
        state = (state + (int(v) & _MASK64) + 0x9E3779B97F4A7C15) & _MASK64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        state = z ^ (z >> 31)
    return state


class Rng:
    """Counter-based random stream with an explicit 64-bit seed.

    The contract: identical seed plus identical call sequence yields
    bit-identical outputs.  Instances are single-owner (not shared between
    workers); use :meth:`derive` to split off independent child streams.
    """

    def __init__(self, seed: int):
        self.seed = int(seed) & _MASK64
        self._gen = np.random.Generator(np.random.Philox(key=self.seed))

    def __repr__(self):
        return f"Rng(seed={self.seed})"

    def derive(self, *subkeys: int) -> "Rng":
        """Independent child stream, reproducibly keyed off this seed."""
        return Rng(mix64(self.seed, *subkeys))

    def standard_normal(self, shape=None):
        return self._gen.standard_normal(shape)

    def uniform(self, low=0.0, high=1.0, size=None):
        return self._gen.uniform(low, high, size)

    def integers(self, low, high=None, size=None):
        return self._gen.integers(low, high, size)

    def choice(self, candidates):
        """Uniform pick from a non-empty 1-D array or sequence."""
        candidates = np.asarray(candidates)
        if candidates.size == 0:
            raise ValueError("cannot choose from an empty candidate set")
        return candidates[int(self._gen.integers(0, candidates.size))]


@dataclass(frozen=True)
class SvdResult:
    """Thin SVD ``m = left @ diag(singular_values) @ right^H``.

    ``singular_values`` are sorted descending.  ``left`` and ``right`` have
    orthonormal columns; the phase of each right-singular vector is fixed by
    making its largest-magnitude entry real positive, so repeated runs give
    identical vectors.  Leading batch dimensions are carried through.
    """

    left: np.ndarray
    singular_values: np.ndarray
    right: np.ndarray

    def reconstruct(self) -> np.ndarray:
        s = self.singular_values[..., None, :]
        return self.left * s @ np.swapaxes(self.right.conj(), -2, -1)


def svd(m: np.ndarray) -> SvdResult:
    """Thin SVD with deterministic singular-vector phases.

    Raises :class:`SvdConvergenceError` if the underlying iteration fails
    (carrying the matrix dimensions) and ``ValueError`` on non-finite input.
    """
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim < 2 or m.shape[-2] < 1 or m.shape[-1] < 1:
        raise ValueError(f"svd needs at least a 1x1 matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("svd input contains non-finite entries")
    try:
        left, sigma, right_h = np.linalg.svd(m, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise SvdConvergenceError(m.shape[-2], m.shape[-1]) from exc
    right = np.swapaxes(right_h, -2, -1).conj()

    # Phase convention: largest-magnitude entry of each right vector made
    # real positive; the matching left vector is co-rotated so the product
    # left * sigma * right^H is unchanged.
    mags = np.abs(right)
    pivot_idx = np.argmax(mags, axis=-2)
    pivots = np.take_along_axis(right, pivot_idx[..., None, :], axis=-2)
    pivot_abs = np.abs(pivots)
    phases = np.where(pivot_abs > 0, pivots / np.where(pivot_abs > 0, pivot_abs, 1.0), 1.0)
    right = right * phases.conj()
    left = left * phases.conj()
    return SvdResult(left=left, singular_values=sigma, right=right)


def invert(m: np.ndarray, condition_cap: float = DEFAULT_CONDITION_CAP) -> np.ndarray:
    """Inverse of a square matrix, guarded by a condition-number cap.

    Raises :class:`SingularMatrixError` (carrying the condition estimate)
    when the matrix is singular or its 2-norm condition number exceeds the
    cap; schedulers treat that as a resample/skip signal.
    """
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"invert needs a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("invert input contains non-finite entries")
    sigma = np.linalg.svd(m, compute_uv=False)
    if sigma[-1] == 0.0:
        raise SingularMatrixError(np.inf)
    condition = float(sigma[0] / sigma[-1])
    if condition > condition_cap:
        raise SingularMatrixError(condition)
    return np.linalg.inv(m)


def complex_gaussian(rng: Rng, shape) -> np.ndarray:
    """i.i.d. circularly-symmetric complex Gaussian entries, unit variance.

    Real and imaginary parts each have variance 1/2.
    """
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    return (re + 1j * im) / np.sqrt(2.0)


def sample_gaussian_matrix(rng: Rng, rows: int, cols: int) -> np.ndarray:
    if rows < 1 or cols < 1:
        raise ValueError("matrix dimensions must be positive")
    return complex_gaussian(rng, (rows, cols))


def sample_orthonormal_columns(rng: Rng, rows: int, cols: int) -> np.ndarray:
    """Haar-distributed matrix with orthonormal columns (``cols <= rows``).

    Obtained by QR-orthonormalizing a Gaussian matrix with the R-diagonal
    phase correction, which makes the distribution invariant under left
    multiplication by any fixed unitary.
    """
    if cols > rows:
        raise ValueError(f"need cols <= rows, got {rows}x{cols}")
    gauss = sample_gaussian_matrix(rng, rows, cols)
    q, r = np.linalg.qr(gauss)
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    mags = np.abs(diag)
    phases = np.where(mags > 0, diag / np.where(mags > 0, mags, 1.0), 1.0)
    return q * phases.conj()
