"""Noisy analog observations of a column under arbitrary read patterns.

Every observation is a pattern-weighted sum of cell values (in LSB units)
plus two noise terms: an uncorrelated Gaussian drawn fresh per read, and a
common-mode offset drawn once per verification sweep and shared by all N
reads of that sweep (the column's TIA and ADC are shared, so offset-like
disturbances repeat across the sweep). Columns use separate front ends, so
their offsets are independent.

All arithmetic is in cell-LSB units; the TIA transconductance is absorbed
into the normalization. A signed pair contributes (w+ - w-) under a single
pattern entry, i.e. both columns of the pair are selected in one read.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .device import CellArray
from .errors import DimensionMismatch


@dataclass(frozen=True)
class NoiseParams:
    """Total read-noise level and its common-mode fraction.

    ``rho`` splits total power between the common-mode and uncorrelated
    parts: var_cm = rho * sigma_total^2 and var_uc = (1 - rho) * sigma_total^2,
    so the two variances add back to sigma_total^2 exactly.

    ``cm_static`` keeps one common-mode draw per column for a whole run
    instead of redrawing every sweep (sensitivity studies only; the default
    per-sweep redraw is conservative in that no scheme can calibrate the
    offset away).
    """

    sigma_total_lsb: float = 0.7
    rho: float = 0.0
    cm_static: bool = False

    def __post_init__(self):
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError(f"rho must be in [0, 1], got {self.rho}")
        if self.sigma_total_lsb < 0:
            raise ValueError("sigma_total_lsb must be >= 0")

    @property
    def var_total(self) -> float:
        return self.sigma_total_lsb**2

    @property
    def var_cm(self) -> float:
        return self.var_total * self.rho

    @property
    def var_uc(self) -> float:
        return self.var_total - self.var_cm

    @property
    def sigma_cm(self) -> float:
        return math.sqrt(self.var_cm)

    @property
    def sigma_uc(self) -> float:
        return math.sqrt(self.var_uc)


@dataclass
class SweepContext:
    """Per-sweep state of one column: its realized common-mode offset."""

    column: int
    mu_cm: float
    noise: NoiseParams


def begin_sweep(column: int, noise: NoiseParams, rng: np.random.Generator) -> SweepContext:
    """Open a verification sweep: draw this sweep's common-mode offset."""
    mu = rng.standard_normal() * noise.sigma_cm if noise.sigma_cm > 0 else 0.0
    return SweepContext(column=column, mu_cm=float(mu), noise=noise)


def effective_levels(array: CellArray, pos_col: int, neg_col: int | None = None) -> np.ndarray:
    """Cell values in LSB units; signed (w+ - w-) when a pair is given."""
    p = array.params
    g = array.conductance
    if neg_col is None:
        return (g[:, pos_col] - p.g_min_us) / p.g_lsb_us
    return (g[:, pos_col] - g[:, neg_col]) / p.g_lsb_us


def read_pattern(
    array: CellArray,
    pattern,
    ctx: SweepContext,
    rng: np.random.Generator,
    pos_col: int,
    neg_col: int | None = None,
) -> float:
    """One noisy observation: pattern . w + n_uc + mu_cm (LSB units)."""
    pattern = np.asarray(pattern, dtype=np.float64)
    w = effective_levels(array, pos_col, neg_col)
    if pattern.shape != w.shape:
        raise DimensionMismatch(f"pattern length {pattern.shape} != column length {w.shape}")
    value = float(pattern @ w)
    if ctx.noise.sigma_uc > 0:
        value += rng.standard_normal() * ctx.noise.sigma_uc
    return value + ctx.mu_cm


def read_sweep(
    array: CellArray,
    patterns,
    ctx: SweepContext,
    rng: np.random.Generator,
    pos_col: int,
    neg_col: int | None = None,
) -> np.ndarray:
    """All observations for a stack of patterns, sharing ctx.mu_cm.

    Equivalent to calling :func:`read_pattern` per row, batched for speed.
    """
    patterns = np.asarray(patterns, dtype=np.float64)
    w = effective_levels(array, pos_col, neg_col)
    if patterns.ndim != 2 or patterns.shape[1] != w.shape[0]:
        raise DimensionMismatch(f"pattern block {patterns.shape} != column length {w.shape}")
    values = patterns @ w
    if ctx.noise.sigma_uc > 0:
        values = values + rng.standard_normal(patterns.shape[0]) * ctx.noise.sigma_uc
    return values + ctx.mu_cm
