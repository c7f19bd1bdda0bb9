"""Multi-level RRAM cell array with stochastic pulse-based programming.

Cells start at the high-resistance state (conductance g_min, weight zero)
and move by SET/RESET pulses. Pulse response is nonlinear and asymmetric
(saturating toward the rails), scaled per cell by a fixed device-mismatch
gain and per pulse by cycle-to-cycle noise. After the pulses of a write
phase, a cell additionally takes one Gaussian mapping perturbation, and
conductance is always clipped to [g_min, g_max].
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CoarseResetForbidden,
    IndexOutOfRange,
    InvalidDimensions,
    LevelOutOfRange,
)
from .rng import stream

SET = 1
RESET = -1

FINE = "fine"
COARSE = "coarse"

# Device mismatch gains are clipped here so no cell ever loses its ability
# to move (a non-positive gain would invert or kill pulse response).
_MIN_D2D_GAIN = 0.1


@dataclass(frozen=True)
class DeviceParams:
    """Device and pulse parameters.

    Conductance range and pulse widths follow typical multi-level RRAM
    operating points: 0-13 uS range, 2 V / 100 ns fine pulses moving one
    0.25-LSB step, 4 V / 100 ns coarse pulses moving five such steps.
    sigma_map_rel is the per-write-phase mapping error relative to g_max.
    d2d / c2c magnitudes are configurable placeholders; they are chosen
    small enough that per-phase stochasticity is dominated by sigma_map_rel.
    """

    g_min_us: float = 0.0
    g_max_us: float = 13.0
    bits_per_cell: int = 3
    fine_step_lsb: float = 0.25
    coarse_steps_per_pulse: int = 5
    sigma_map_rel: float = 0.10
    d2d_sigma_rel: float = 0.10
    c2c_sigma_rel: float = 0.30
    nonlinearity: float = 1.0
    # Metadata only; these never enter the conductance dynamics.
    fine_pulse_v: float = 2.0
    coarse_pulse_v: float = 4.0
    supply_v: float = 0.9

    @property
    def levels(self) -> int:
        return 2**self.bits_per_cell

    @property
    def g_lsb_us(self) -> float:
        """One conductance LSB: full range split over 2**bits - 1 steps."""
        return (self.g_max_us - self.g_min_us) / (self.levels - 1)

    @property
    def fine_step_us(self) -> float:
        return self.fine_step_lsb * self.g_lsb_us

    @property
    def coarse_step_us(self) -> float:
        return self.coarse_steps_per_pulse * self.fine_step_us

    @property
    def coarse_step_lsb(self) -> float:
        return self.coarse_steps_per_pulse * self.fine_step_lsb


def level_to_conductance(level: int, params: DeviceParams) -> float:
    """Target conductance for an unsigned cell level."""
    if not 0 <= level <= params.levels - 1:
        raise LevelOutOfRange(f"level {level} outside [0, {params.levels - 1}]")
    return params.g_min_us + level * params.g_lsb_us


@dataclass
class CellArray:
    """A rows x cols grid of conductances plus per-cell variation state."""

    params: DeviceParams
    conductance: np.ndarray  # (rows, cols) uS
    d2d_gain: np.ndarray     # fixed multiplicative step factors
    pulse_count: np.ndarray  # cumulative SET/RESET tallies

    @property
    def rows(self) -> int:
        return self.conductance.shape[0]

    @property
    def cols(self) -> int:
        return self.conductance.shape[1]


def new_array(rows: int, cols: int, params: DeviceParams, seed) -> CellArray:
    """Allocate an array with every cell at HRS (zero weight).

    ``seed`` is either an integer (hashed into a private stream) or an
    existing numpy Generator. Device-mismatch gains are drawn once here and
    never change afterwards.
    """
    if rows < 1 or cols < 1:
        raise InvalidDimensions(f"array dimensions must be >= 1, got {rows}x{cols}")
    rng = seed if isinstance(seed, np.random.Generator) else stream(int(seed))
    gain = np.ones((rows, cols))
    if params.d2d_sigma_rel > 0:
        gain += rng.standard_normal((rows, cols)) * params.d2d_sigma_rel
        np.clip(gain, _MIN_D2D_GAIN, None, out=gain)
    return CellArray(
        params=params,
        conductance=np.full((rows, cols), params.g_min_us, dtype=np.float64),
        d2d_gain=gain,
        pulse_count=np.zeros((rows, cols), dtype=np.int64),
    )


def apply_pulses(
    array: CellArray,
    targets,
    mode: str,
    rng: np.random.Generator,
    map_noise: bool = True,
) -> None:
    """Apply one write phase: a pulse train per target cell plus map noise.

    ``targets`` is a sequence of (row, col, direction, pulse_count) with
    direction SET (+1) or RESET (-1). Per pulse the conductance moves by

        direction * step * d2d_gain * (1 + N(0, c2c^2)) * shape(G)

    where ``step`` is the fine or coarse step size and ``shape`` saturates
    exponentially toward the rail the pulse is heading for. After the last
    pulse of the phase each written cell takes one mapping perturbation
    N(0, (sigma_map_rel * g_max)^2). Conductance is clipped after every
    update. Coarse mode forbids RESET.

    ``map_noise=False`` suppresses the end-of-phase perturbation; callers
    splitting one logical write across several phases apply it once via
    :func:`apply_write_noise` instead.
    """
    if mode not in (FINE, COARSE):
        raise ValueError(f"unknown pulse mode {mode!r}")
    targets = list(targets)
    if not targets:
        return
    p = array.params
    rows = np.fromiter((t[0] for t in targets), dtype=np.int64)
    cols = np.fromiter((t[1] for t in targets), dtype=np.int64)
    dirs = np.fromiter((t[2] for t in targets), dtype=np.int64)
    counts = np.fromiter((t[3] for t in targets), dtype=np.int64)

    if rows.min() < 0 or rows.max() >= array.rows or cols.min() < 0 or cols.max() >= array.cols:
        raise IndexOutOfRange("pulse target outside the array")
    if not np.isin(dirs, (SET, RESET)).all():
        raise ValueError("pulse direction must be SET (+1) or RESET (-1)")
    if counts.min() < 1:
        raise ValueError("pulse counts must be >= 1")
    if mode == COARSE and (dirs == RESET).any():
        raise CoarseResetForbidden("coarse pulses support SET only")

    step = p.fine_step_us if mode == FINE else p.coarse_step_us
    span = p.g_max_us - p.g_min_us
    lam = p.nonlinearity
    g = array.conductance
    gain = array.d2d_gain[rows, cols]

    for k in range(int(counts.max())):
        live = counts > k
        r, c = rows[live], cols[live]
        d = dirs[live]
        cur = g[r, c]
        if lam != 0.0:
            frac = (cur - p.g_min_us) / span
            shape = np.where(d == SET, np.exp(-lam * frac), np.exp(-lam * (1.0 - frac)))
        else:
            shape = 1.0
        if p.c2c_sigma_rel > 0:
            c2c = 1.0 + rng.standard_normal(r.size) * p.c2c_sigma_rel
        else:
            c2c = 1.0
        delta = d * step * gain[live] * c2c * shape
        g[r, c] = np.clip(cur + delta, p.g_min_us, p.g_max_us)

    if map_noise and p.sigma_map_rel > 0:
        noise = rng.standard_normal(rows.size) * (p.sigma_map_rel * p.g_max_us)
        g[rows, cols] = np.clip(g[rows, cols] + noise, p.g_min_us, p.g_max_us)

    array.pulse_count[rows, cols] += counts


def apply_write_noise(array: CellArray, cells, rng: np.random.Generator) -> None:
    """Apply one mapping perturbation to each (row, col) in ``cells``."""
    cells = list(cells)
    if not cells:
        return
    p = array.params
    if p.sigma_map_rel <= 0:
        return
    rows = np.fromiter((c[0] for c in cells), dtype=np.int64)
    cols = np.fromiter((c[1] for c in cells), dtype=np.int64)
    g = array.conductance
    noise = rng.standard_normal(rows.size) * (p.sigma_map_rel * p.g_max_us)
    g[rows, cols] = np.clip(g[rows, cols] + noise, p.g_min_us, p.g_max_us)
