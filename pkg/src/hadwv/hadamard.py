"""Sylvester matrices and the encode/decode algebra used by column readout.

A column of N cells is observed through N read patterns. The patterns are
either one-hot rows (conventional per-cell readout) or the rows of an N x N
Sylvester matrix with +/-1 entries. Decoding a Hadamard-read column divides
uncorrelated per-read noise variance by N, and because every row past the
first is balanced, an offset common to all N reads survives only in the
first decoded cell.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidTernaryEntry,
    NonPowerOfTwo,
    OrderOutOfRange,
    SingularMatrix,
)

MIN_ORDER = 2
MAX_ORDER = 1024

ONE_HOT = "one_hot"
HADAMARD = "hadamard"


@dataclass(frozen=True)
class HadamardMatrix:
    """An N x N +/-1 matrix with orthogonal rows, first row all ones."""

    order: int
    entries: np.ndarray  # (order, order) int64, read-only


@dataclass(frozen=True)
class ReadBasis:
    """The N patterns driven onto a column during one verification sweep.

    ``kind`` is ``one_hot`` (0/1 selection rows) or ``hadamard`` (+/-1 rows).
    """

    kind: str
    patterns: np.ndarray  # (n, n)

    @property
    def order(self) -> int:
        return self.patterns.shape[0]


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@lru_cache(maxsize=None)
def build_hadamard(order: int) -> HadamardMatrix:
    """Construct the Sylvester matrix of the given power-of-two order."""
    order = int(order)
    if not _is_power_of_two(order):
        raise NonPowerOfTwo(f"order {order} is not a power of 2")
    if not MIN_ORDER <= order <= MAX_ORDER:
        raise OrderOutOfRange(f"order {order} outside [{MIN_ORDER}, {MAX_ORDER}]")
    h = np.array([[1]], dtype=np.int64)
    while h.shape[0] < order:
        h = np.block([[h, h], [h, -h]])
    h.setflags(write=False)
    return HadamardMatrix(order=order, entries=h)


def one_hot_basis(n: int) -> ReadBasis:
    """Identity read basis: pattern i selects cell i alone."""
    if n < 1:
        raise OrderOutOfRange(f"basis size {n} must be >= 1")
    eye = np.eye(n, dtype=np.int64)
    eye.setflags(write=False)
    return ReadBasis(kind=ONE_HOT, patterns=eye)


def hadamard_basis(h: HadamardMatrix) -> ReadBasis:
    """Read basis whose pattern i is row i of ``h``."""
    return ReadBasis(kind=HADAMARD, patterns=h.entries)


def encode(h: HadamardMatrix, w) -> np.ndarray:
    """Noiseless Hadamard-domain view of a cell vector: output[i] = H[i] . w."""
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (h.order,):
        raise DimensionMismatch(f"expected length {h.order}, got {w.shape}")
    return h.entries @ w


def decode(h: HadamardMatrix, y_hat) -> np.ndarray:
    """Recover per-cell estimates from N Hadamard measurements.

    Computes (1/N) H^T y in float64; exact for integer-valued inputs.
    """
    y = np.asarray(y_hat, dtype=np.float64)
    if y.shape != (h.order,):
        raise DimensionMismatch(f"expected length {h.order}, got {y.shape}")
    return (h.entries.T @ y) / h.order


def decode_ternary(h: HadamardMatrix, s_y) -> np.ndarray:
    """Accumulate a ternary sign vector back into the cell domain.

    Returns the unnormalized integer sums H^T s, each in [-N, N]. Callers
    threshold these sums directly; dividing by N first would make the
    integer thresholds used downstream meaningless.
    """
    s = np.asarray(s_y)
    if s.shape != (h.order,):
        raise DimensionMismatch(f"expected length {h.order}, got {s.shape}")
    s = s.astype(np.int64, copy=False)
    if not np.isin(s, (-1, 0, 1)).all():
        raise InvalidTernaryEntry("sign vector entries must be in {-1, 0, +1}")
    return h.entries.T @ s


def estimator_variance(a, sigma: float) -> np.ndarray:
    """Per-cell variance of the least-squares estimate under read matrix ``a``.

    Returns the diagonal of sigma^2 (A^T A)^{-1}. For a Hadamard matrix every
    entry is sigma^2 / N; for the identity every entry is sigma^2; no +/-1
    matrix does better than the Hadamard bound in any coordinate.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got {a.shape}")
    gram = a.T @ a
    try:
        inv = np.linalg.inv(gram)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrix("measurement matrix is singular") from exc
    return float(sigma) ** 2 * np.diag(inv)
