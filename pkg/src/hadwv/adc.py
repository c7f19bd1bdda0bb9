"""Behavioral SAR ADC: full conversion and one-shot target comparison.

A full n-bit conversion resolves the input with n sequential comparisons
and returns the rounded code. The compare mode instead preloads the
capacitor array with a known target code and answers Low / Equal / High
with one or two comparisons, which is all a write-verify decision needs.

The sampling reference selects the code range: GROUND digitizes the
unsigned range [0, 2^n - 1] (all-ones read patterns on unsigned columns),
HALF_VCM recenters the range to signed [-2^(n-1), 2^(n-1) - 1] (balanced
patterns, and any read of a signed column pair). Out-of-range inputs
saturate silently; the ledger counts them.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .costs import CostLedger
from .errors import TargetOutOfRange


class SamplingRef(enum.Enum):
    GROUND = "ground"
    HALF_VCM = "half_vcm"


class CompareOutcome(enum.Enum):
    LOW = "low"
    EQUAL = "equal"
    HIGH = "high"


@dataclass(frozen=True)
class AdcConfig:
    """Resolution, sampling reference and LSB scale of one column ADC."""

    bits: int = 9
    sampling_ref: SamplingRef = SamplingRef.HALF_VCM
    full_scale_lsb: float = 1.0

    @property
    def code_range(self) -> tuple[int, int]:
        if self.sampling_ref is SamplingRef.GROUND:
            return 0, 2**self.bits - 1
        half = 2 ** (self.bits - 1)
        return -half, half - 1


@dataclass(frozen=True)
class CompareResult:
    outcome: CompareOutcome
    comparisons_used: int


def _round_half_away(x: float) -> int:
    if x >= 0:
        return math.floor(x + 0.5)
    return math.ceil(x - 0.5)


def convert(v: float, cfg: AdcConfig, ledger: CostLedger) -> int:
    """Full SAR conversion: round to the nearest code, clamped to range.

    Rounds half away from zero. Charges one conversion event (n sequential
    comparisons) to the ledger; saturation is silent but counted.
    """
    code = _round_half_away(v / cfg.full_scale_lsb)
    lo, hi = cfg.code_range
    if code < lo:
        code = lo
        ledger.note_saturation()
    elif code > hi:
        code = hi
        ledger.note_saturation()
    ledger.add_sar_convert(cfg.bits)
    return code


def compare_to_target(v: float, target_code: int, cfg: AdcConfig, ledger: CostLedger) -> CompareResult:
    """One-shot comparison of the input against a preloaded target code.

    Low if the input sits more than half a code below the target, High if
    more than half a code above, Equal otherwise (ties at exactly half a
    code land in the Equal band). The first comparison checks the lower
    boundary, so Low resolves with a single comparison; Equal and High
    need the second comparison against the upper boundary.
    """
    lo, hi = cfg.code_range
    if not lo <= target_code <= hi:
        raise TargetOutOfRange(f"target {target_code} outside [{lo}, {hi}]")
    x = v / cfg.full_scale_lsb
    if x < target_code - 0.5:
        result = CompareResult(CompareOutcome.LOW, 1)
    elif x > target_code + 0.5:
        result = CompareResult(CompareOutcome.HIGH, 2)
    else:
        result = CompareResult(CompareOutcome.EQUAL, 2)
    ledger.add_compare(cfg.bits, result.comparisons_used)
    return result
