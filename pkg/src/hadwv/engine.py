"""The write-and-verify engine: four verification schemes over column pairs.

One run programs a logical weight column: N signed B-bit codes whose
k = B / B_C bit-slices live in k adjacent positive/negative column pairs
of one device array. Programming proceeds in two stages:

* coarse staging: one open-loop, SET-only high-voltage write walks cells
  up from HRS toward their targets. The start state is exactly zero
  weight, so the pulse counts come from the digital targets alone; they
  floor the deficit so staging never overshoots into territory only
  RESET pulses could fix;
* fine loop: every iteration runs one verification sweep per still-active
  pair, updates per-cell STOP streaks (a cell freezes permanently after K
  consecutive within-threshold verdicts; any other verdict resets the
  count), computes pulse counts for the cells still moving, and applies
  one column-parallel write in four phases (SET/RESET on the positive
  columns, SET/RESET on the negative columns). Frozen cells are skipped.
  The run ends when every cell is frozen or the iteration cap is reached.

The schemes differ only in how a sweep turns N read patterns into per-cell
decisions:

* cwsc: N one-hot reads, each resolved by a one-shot ADC comparison
  against the cell's signed target code (direction only, one fine pulse);
* multiread: M full conversions per cell inside one sweep context, the
  decision taken on the mean code (magnitude known);
* hdpv: N Hadamard-pattern reads, each fully converted, decoded back to
  per-cell estimates (magnitude known);
* harp: N Hadamard-pattern reads, each compared against its digitally
  computed Hadamard-domain target to a ternary sign, signs accumulated
  back to the cell domain and thresholded at +/- ``tau_w`` on the
  unnormalized integer scale (direction only, one fine pulse).

Reads of a signed pair observe (w+ - w-) in one measurement, so all
measurement ranges are signed and the ADC keeps the mid-scale sampling
reference. The ground reference applies when a bare (unsigned) column is
verified, where the first all-ones Hadamard pattern stays non-negative.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .adc import AdcConfig, CompareOutcome, SamplingRef, compare_to_target, convert
from .costs import IH_DECODE_HARP, IH_DECODE_HDPV, CostLedger, CostParams
from .device import (
    COARSE,
    FINE,
    RESET,
    SET,
    CellArray,
    DeviceParams,
    apply_pulses,
    apply_write_noise,
    new_array,
)
from .errors import ConfigInconsistent, TargetNotRepresentable
from .hadamard import build_hadamard, decode, decode_ternary
from .mapper import slice_codes, slice_scales
from .readout import NoiseParams, SweepContext, begin_sweep, effective_levels, read_sweep
from .rng import stream

SCHEMES = ("cwsc", "multiread", "hdpv", "harp")


class CellDecision(enum.IntEnum):
    """Per-cell verdict of one verification sweep."""

    SET = -1
    STOP = 0
    RESET = 1


@dataclass
class WvConfig:
    """Everything one write-verify run needs.

    ``adc_bits`` of 0 picks the resolution from the column length: 9 bits
    cover the +/- N * (2^B_C - 1) signed Hadamard range up to N = 32,
    10 bits up to N = 64.
    """

    scheme: str = "hdpv"
    n_cells: int = 32
    weight_bits: int = 6
    freeze_streak: int = 2
    tau_w: int = 4
    multiread_m: int = 5
    decision_threshold_lsb: float = 0.5
    max_fine_iters: int = 50
    max_coarse_iters: int = 10
    fine_pulse_cap: int = 8
    adc_bits: int = 0
    noise: NoiseParams = field(default_factory=NoiseParams)
    device: DeviceParams = field(default_factory=DeviceParams)
    cost: CostParams = field(default_factory=CostParams)
    seed: int = 0

    @property
    def cell_bits(self) -> int:
        return self.device.bits_per_cell

    @property
    def k_slices(self) -> int:
        return self.weight_bits // self.cell_bits

    @property
    def effective_adc_bits(self) -> int:
        if self.adc_bits:
            return self.adc_bits
        return 9 if self.n_cells <= 32 else 10

    def adc_config(self, sampling_ref: SamplingRef = SamplingRef.HALF_VCM) -> AdcConfig:
        return AdcConfig(bits=self.effective_adc_bits, sampling_ref=sampling_ref)

    def validate(self) -> None:
        if self.scheme not in SCHEMES:
            raise ConfigInconsistent(f"unknown scheme {self.scheme!r}")
        if self.n_cells < 1:
            raise ConfigInconsistent("n_cells must be >= 1")
        if self.weight_bits % self.cell_bits != 0:
            raise ConfigInconsistent(
                f"weight_bits {self.weight_bits} not a multiple of cell bits {self.cell_bits}"
            )
        if self.scheme in ("hdpv", "harp") and self.n_cells & (self.n_cells - 1):
            raise ConfigInconsistent("Hadamard schemes need a power-of-two column length")
        if self.freeze_streak < 1:
            raise ConfigInconsistent("freeze_streak must be >= 1")
        if self.tau_w < 0:
            raise ConfigInconsistent("tau_w must be >= 0")
        if self.multiread_m < 1:
            raise ConfigInconsistent("multiread_m must be >= 1")
        if self.decision_threshold_lsb <= 0:
            raise ConfigInconsistent("decision threshold must be > 0")
        if self.fine_pulse_cap < 1:
            raise ConfigInconsistent("fine_pulse_cap must be >= 1")


@dataclass(frozen=True)
class ColumnPair:
    """A signed pair: positive and negative physical columns of one array."""

    array: CellArray
    pos_col: int
    neg_col: int


@dataclass
class ColumnGroup:
    """The k column pairs holding the bit-slices of one logical column."""

    array: CellArray
    pairs: list  # [(pos_col, neg_col)] LSB slice first

    @property
    def n_rows(self) -> int:
        return self.array.rows


def make_column_group(cfg: WvConfig, seed) -> ColumnGroup:
    """Allocate a fresh HRS array wide enough for cfg's slice pairs."""
    array = new_array(cfg.n_cells, 2 * cfg.k_slices, cfg.device, seed)
    return ColumnGroup(array=array, pairs=[(2 * l, 2 * l + 1) for l in range(cfg.k_slices)])


@dataclass
class IterationStats:
    """One row of the per-run convergence trace."""

    iteration: int
    mean_abs_cell_error_lsb: float
    frozen_cells: int
    total_cells: int
    cum_latency_ns: float
    cum_energy_pj: float


@dataclass
class WvResult:
    """Outcome of programming one logical column."""

    target_codes: np.ndarray
    final_conductances: np.ndarray
    per_cell_error_lsb: np.ndarray      # (k, n_cells), signed slice errors
    per_weight_error_lsb: np.ndarray    # (n_cells,), binary-weighted recombination
    rms_cell_lsb: float
    rms_weight_lsb: float
    iterations_used: int
    coarse_iterations: int
    freeze_trace: np.ndarray            # (k, n_cells); iteration frozen, -1 if never
    pulses_at_freeze: np.ndarray        # (k, n_cells); active-cell pulse tally when frozen
    converged: bool
    cost: CostLedger
    trace: list


def decide(estimate_lsb: float, target_lsb: float, threshold: float) -> CellDecision:
    """Ternary update decision from a readback estimate.

    RESET when the estimate sits more than ``threshold`` above the target,
    SET when more than ``threshold`` below, STOP inside the band
    (boundaries included).
    """
    dev = estimate_lsb - target_lsb
    if dev > threshold:
        return CellDecision.RESET
    if dev < -threshold:
        return CellDecision.SET
    return CellDecision.STOP


def _decide_array(estimates: np.ndarray, targets: np.ndarray, threshold: float) -> np.ndarray:
    dev = np.asarray(estimates, dtype=np.float64) - targets
    out = np.zeros(dev.shape, dtype=np.int8)
    out[dev > threshold] = CellDecision.RESET
    out[dev < -threshold] = CellDecision.SET
    return out


_OUTCOME_TO_DECISION = {
    CompareOutcome.LOW: CellDecision.SET,      # readback below target: pulse up
    CompareOutcome.EQUAL: CellDecision.STOP,
    CompareOutcome.HIGH: CellDecision.RESET,
}

_OUTCOME_TO_SIGN = {CompareOutcome.LOW: -1, CompareOutcome.EQUAL: 0, CompareOutcome.HIGH: 1}


def _pair_adc(cfg: WvConfig, row: int, signed: bool) -> AdcConfig:
    # Row 0 is the all-ones pattern; only on an unsigned column is its
    # range one-sided, allowing the ground sampling reference.
    if not signed and row == 0:
        return cfg.adc_config(SamplingRef.GROUND)
    return cfg.adc_config(SamplingRef.HALF_VCM)


def verify_sweep_cwsc(
    pair: ColumnPair,
    targets_lsb: np.ndarray,
    cfg: WvConfig,
    ledger: CostLedger,
    rng: np.random.Generator,
    ctx: SweepContext | None = None,
) -> tuple[np.ndarray, None]:
    """One-hot sweep with compare-only decisions (the conventional baseline)."""
    n = pair.array.rows
    if ctx is None:
        ctx = begin_sweep(pair.pos_col, cfg.noise, rng)
    values = read_sweep(pair.array, np.eye(n), ctx, rng, pair.pos_col, pair.neg_col)
    adc = cfg.adc_config(SamplingRef.HALF_VCM)
    decisions = np.empty(n, dtype=np.int8)
    for i in range(n):
        res = compare_to_target(values[i], int(targets_lsb[i]), adc, ledger)
        decisions[i] = _OUTCOME_TO_DECISION[res.outcome]
    return decisions, None


def verify_sweep_multiread(
    pair: ColumnPair,
    targets_lsb: np.ndarray,
    cfg: WvConfig,
    ledger: CostLedger,
    rng: np.random.Generator,
    ctx: SweepContext | None = None,
    threshold: float | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """M full conversions per cell inside one sweep; decide on the mean code.

    All M x N reads share the sweep's common-mode offset, so averaging
    shrinks only the uncorrelated part.
    """
    n = pair.array.rows
    m = cfg.multiread_m
    if ctx is None:
        ctx = begin_sweep(pair.pos_col, cfg.noise, rng)
    adc = cfg.adc_config(SamplingRef.HALF_VCM)
    eye = np.eye(n)
    codes = np.empty((m, n))
    for rep in range(m):
        values = read_sweep(pair.array, eye, ctx, rng, pair.pos_col, pair.neg_col)
        for i in range(n):
            codes[rep, i] = convert(values[i], adc, ledger)
    estimates = codes.mean(axis=0)
    thr = cfg.decision_threshold_lsb if threshold is None else threshold
    return _decide_array(estimates, targets_lsb, thr), estimates


def verify_sweep_hdpv(
    pair: ColumnPair,
    targets_lsb: np.ndarray,
    cfg: WvConfig,
    ledger: CostLedger,
    rng: np.random.Generator,
    ctx: SweepContext | None = None,
    threshold: float | None = None,
    signed: bool = True,
) -> tuple[np.ndarray, np.ndarray]:
    """Hadamard-encoded sweep with full conversions and inverse decoding."""
    n = pair.array.rows
    h = build_hadamard(n)
    if ctx is None:
        ctx = begin_sweep(pair.pos_col, cfg.noise, rng)
    values = read_sweep(pair.array, h.entries, ctx, rng, pair.pos_col, pair.neg_col)
    codes = np.empty(n)
    for i in range(n):
        codes[i] = convert(values[i], _pair_adc(cfg, i, signed), ledger)
    estimates = decode(h, codes)
    ledger.add_ih_decode(IH_DECODE_HDPV)
    thr = cfg.decision_threshold_lsb if threshold is None else threshold
    return _decide_array(estimates, targets_lsb, thr), estimates


def verify_sweep_harp(
    pair: ColumnPair,
    targets_lsb: np.ndarray,
    cfg: WvConfig,
    ledger: CostLedger,
    rng: np.random.Generator,
    ctx: SweepContext | None = None,
) -> tuple[np.ndarray, None]:
    """Hadamard sweep resolved by compare-only ternary signs.

    Each measurement is compared against its exact Hadamard-domain target
    (computed digitally from the target codes); the resulting sign vector
    accumulates back to the cell domain where the integer threshold tau_w
    picks SET / RESET / STOP.
    """
    n = pair.array.rows
    h = build_hadamard(n)
    if ctx is None:
        ctx = begin_sweep(pair.pos_col, cfg.noise, rng)
    y_star = h.entries @ np.asarray(targets_lsb, dtype=np.int64)
    values = read_sweep(pair.array, h.entries, ctx, rng, pair.pos_col, pair.neg_col)
    adc = cfg.adc_config(SamplingRef.HALF_VCM)
    signs = np.empty(n, dtype=np.int64)
    for i in range(n):
        res = compare_to_target(values[i], int(y_star[i]), adc, ledger)
        signs[i] = _OUTCOME_TO_SIGN[res.outcome]
    acc = decode_ternary(h, signs)
    ledger.add_ih_decode(IH_DECODE_HARP)
    decisions = np.zeros(n, dtype=np.int8)
    decisions[acc > cfg.tau_w] = CellDecision.RESET
    decisions[acc < -cfg.tau_w] = CellDecision.SET
    return decisions, None


_MAGNITUDE_SCHEMES = ("multiread", "hdpv")


def _sweep(pair, targets, cfg, ledger, rng, ctx, threshold=None):
    if cfg.scheme == "cwsc":
        return verify_sweep_cwsc(pair, targets, cfg, ledger, rng, ctx)
    if cfg.scheme == "multiread":
        return verify_sweep_multiread(pair, targets, cfg, ledger, rng, ctx, threshold)
    if cfg.scheme == "hdpv":
        return verify_sweep_hdpv(pair, targets, cfg, ledger, rng, ctx, threshold)
    if cfg.scheme == "harp":
        return verify_sweep_harp(pair, targets, cfg, ledger, rng, ctx)
    raise ConfigInconsistent(f"unknown scheme {cfg.scheme!r}")


# Write phases: (which column of the pair, pulse direction). A SET or
# RESET decision maps onto the weight's active column; moving a negative
# weight up means RESETting its negative column and vice versa.
_PHASES = (("pos", SET), ("pos", RESET), ("neg", SET), ("neg", RESET))


def _route(decision_is_up: bool, target: int) -> tuple[str, int]:
    if target > 0:
        return ("pos", SET) if decision_is_up else ("pos", RESET)
    return ("neg", RESET) if decision_is_up else ("neg", SET)


def _stage_counts(level: int, dev: DeviceParams, cfg: WvConfig) -> tuple[int, int]:
    """Open-loop (coarse, fine) pulse counts to stage a cell from 0 to ``level``.

    Follows the nominal pulse response (unit gain, no noise) and stops before
    any pulse would overshoot the target, so the noiseless linear train lands
    exactly on it.
    """
    lam = dev.nonlinearity
    span = dev.levels - 1
    g = 0.0
    coarse = 0
    while coarse < cfg.max_coarse_iters:
        step = dev.coarse_step_lsb * (math.exp(-lam * g / span) if lam else 1.0)
        if g + step > level:
            break
        g += step
        coarse += 1
    fine = 0
    while fine < cfg.max_fine_iters:
        step = dev.fine_step_lsb * (math.exp(-lam * g / span) if lam else 1.0)
        if g + step > level:
            break
        g += step
        fine += 1
    return coarse, fine


def run_wv(
    group: ColumnGroup,
    target_codes,
    cfg: WvConfig,
    rng: np.random.Generator | None = None,
) -> WvResult:
    """Program one logical column of signed weight codes and verify it.

    The k slice pairs run in lockstep: every iteration sweeps each pair
    that still has unfrozen cells, then writes all pairs in four shared
    column-parallel phases. Zero-slice cells hold HRS on both sides and
    freeze immediately.
    """
    cfg.validate()
    codes = np.asarray(target_codes, dtype=np.int64)
    if codes.shape != (cfg.n_cells,):
        raise TargetNotRepresentable(f"expected {cfg.n_cells} codes, got {codes.shape}")
    limit = 2 ** (cfg.weight_bits - 1) - 1
    if (np.abs(codes) > limit).any():
        raise TargetNotRepresentable(f"codes exceed signed {cfg.weight_bits}-bit range")
    if rng is None:
        rng = stream(cfg.seed)

    dev = cfg.device
    k = cfg.k_slices
    n = cfg.n_cells
    signs = np.sign(codes)
    slice_targets = (slice_codes(codes, cfg.weight_bits, dev.bits_per_cell) * signs).astype(
        np.int64
    )  # (k, n) signed levels
    scales = slice_scales(cfg.weight_bits, dev.bits_per_cell).astype(np.float64)

    ledger = CostLedger(params=cfg.cost)
    pairs = [ColumnPair(group.array, pos, neg) for pos, neg in group.pairs]
    frozen = slice_targets == 0
    streaks = np.zeros((k, n), dtype=np.int64)
    freeze_iter = np.where(frozen, 0, -1)
    pulses_at_freeze = np.zeros((k, n), dtype=np.int64)

    static_ctx = [None] * k
    if cfg.noise.cm_static:
        static_ctx = [begin_sweep(p.pos_col, cfg.noise, rng) for p in pairs]

    magnitude = cfg.scheme in _MAGNITUDE_SCHEMES
    fine_step = dev.fine_step_lsb
    coarse_step = dev.coarse_step_lsb
    trace: list[IterationStats] = []
    iteration = 0

    def errors_lsb() -> np.ndarray:
        return np.stack(
            [effective_levels(group.array, p.pos_col, p.neg_col) for p in pairs]
        ) - slice_targets

    def record_trace():
        err = errors_lsb()
        trace.append(
            IterationStats(
                iteration=iteration,
                mean_abs_cell_error_lsb=float(np.abs(err).mean()),
                frozen_cells=int(frozen.sum()),
                total_cells=k * n,
                cum_latency_ns=ledger.total_latency_ns,
                cum_energy_pj=ledger.total_energy_pj,
            )
        )

    def write_phases(phase_plan, mode, map_noise=True):
        for (side, direction) in _PHASES:
            targets = phase_plan.get((side, direction))
            if not targets:
                continue
            apply_pulses(group.array, targets, mode, rng, map_noise=map_noise)
            counts = [t[3] for t in targets]
            ledger.add_write_phase(max(counts), sum(counts))

    def active_cell(row, s):
        col_pos, col_neg = group.pairs[s]
        return col_pos if slice_targets[s, row] > 0 else col_neg

    # -- open-loop staging ------------------------------------------------------
    # Cells start at exactly zero weight, so the initial write toward each
    # target is computed digitally: coarse SET pulses floor the deficit and
    # fine SET pulses top up the rest, both counted against the nominal
    # (noiseless, unit-gain) pulse response so the stage never overshoots.
    # No verify read is spent here, and the whole stage is one logical write:
    # its mapping perturbation is applied once after both phases.
    coarse_used = 0
    stage = {lvl: _stage_counts(lvl, dev, cfg) for lvl in range(1, dev.levels)}
    plan_coarse: dict = {}
    plan_fine: dict = {}
    staged_cells = []
    for s in range(k):
        for row in np.flatnonzero(~frozen[s]):
            c_cnt, f_cnt = stage[abs(int(slice_targets[s, row]))]
            side = "pos" if slice_targets[s, row] > 0 else "neg"
            col = active_cell(row, s)
            if c_cnt:
                plan_coarse.setdefault((side, SET), []).append((int(row), col, SET, c_cnt))
            if f_cnt:
                plan_fine.setdefault((side, SET), []).append((int(row), col, SET, f_cnt))
            if c_cnt or f_cnt:
                staged_cells.append((int(row), col))
    if staged_cells:
        write_phases(plan_coarse, COARSE, map_noise=False)
        write_phases(plan_fine, FINE, map_noise=False)
        apply_write_noise(group.array, staged_cells, rng)
        coarse_used = 1
        iteration += 1
        record_trace()

    # -- fine loop ------------------------------------------------------------
    fine_used = 0
    while fine_used < cfg.max_fine_iters and not frozen.all():
        plan = {}
        for s, pair in enumerate(pairs):
            if frozen[s].all():
                continue
            decisions, estimates = _sweep(pair, slice_targets[s], cfg, ledger, rng, static_ctx[s])
            un = ~frozen[s]
            stop = un & (decisions == CellDecision.STOP)
            moved = un & (decisions != CellDecision.STOP)
            streaks[s][stop] += 1
            streaks[s][moved] = 0
            newly = un & (streaks[s] >= cfg.freeze_streak)
            if newly.any():
                frozen[s][newly] = True
                freeze_iter[s][newly] = iteration + 1
                rows_new = np.flatnonzero(newly)
                cols_new = [active_cell(r, s) for r in rows_new]
                pulses_at_freeze[s][rows_new] = group.array.pulse_count[rows_new, cols_new]
            if magnitude:
                deviation = np.abs(estimates - slice_targets[s])
                counts = np.clip(
                    np.round(deviation / fine_step).astype(np.int64), 1, cfg.fine_pulse_cap
                )
            else:
                counts = np.ones(n, dtype=np.int64)
            for row in np.flatnonzero(moved):
                up = decisions[row] == CellDecision.SET
                side, direction = _route(up, int(slice_targets[s, row]))
                plan.setdefault((side, direction), []).append(
                    (int(row), active_cell(row, s), direction, int(counts[row]))
                )
        iteration += 1
        fine_used += 1
        # Touch-up trains carry per-pulse cycle-to-cycle noise and device
        # mismatch only; the full mapping error is the property of one
        # programming operation and was spent on the staging write.
        write_phases(plan, FINE, map_noise=False)
        record_trace()

    cell_err = errors_lsb()
    weight_err = scales @ cell_err
    return WvResult(
        target_codes=codes,
        final_conductances=group.array.conductance.copy(),
        per_cell_error_lsb=cell_err,
        per_weight_error_lsb=weight_err,
        rms_cell_lsb=float(np.sqrt(np.mean(cell_err**2))),
        rms_weight_lsb=float(np.sqrt(np.mean(weight_err**2))),
        iterations_used=iteration,
        coarse_iterations=coarse_used,
        freeze_trace=freeze_iter,
        pulses_at_freeze=pulses_at_freeze,
        converged=bool(frozen.all()),
        cost=ledger,
        trace=trace,
    )


def program_column(target_codes, cfg: WvConfig, seed: int | None = None) -> WvResult:
    """Convenience wrapper: allocate a fresh group and run one column."""
    base = cfg.seed if seed is None else seed
    group = make_column_group(cfg, stream(base, 0))
    return run_wv(group, target_codes, cfg, rng=stream(base, 1))
