"""Write-and-verify simulator for multi-level RRAM column programming.

The package models the full verify-read chain of an analog compute-in-
memory macro: stochastic multi-level cells, a three-part read-noise model
(mapping, uncorrelated, common-mode), a behavioral SAR ADC with a one-shot
compare mode, and four verification schemes over signed column pairs:
conventional one-hot compare, multi-read averaging, Hadamard-encoded
parallel verify, and Hadamard compare-only verify. A cost ledger tracks
per-event latency and energy, and the experiment harness reproduces
convergence and sweep studies with deterministic seeding.
"""

__version__ = "0.1.0"

from .adc import AdcConfig, CompareOutcome, CompareResult, SamplingRef, compare_to_target, convert
from .costs import CostLedger, CostParams, charge, sweep_cost, sweep_cost_ratio
from .device import CellArray, DeviceParams, apply_pulses, level_to_conductance, new_array
from .engine import (
    CellDecision,
    ColumnGroup,
    ColumnPair,
    WvConfig,
    WvResult,
    decide,
    make_column_group,
    program_column,
    run_wv,
    verify_sweep_cwsc,
    verify_sweep_harp,
    verify_sweep_hdpv,
    verify_sweep_multiread,
)
from .experiments import ExperimentSpec, SummaryRow, run_experiment
from .hadamard import (
    HadamardMatrix,
    ReadBasis,
    build_hadamard,
    decode,
    decode_ternary,
    encode,
    estimator_variance,
    hadamard_basis,
    one_hot_basis,
)
from .mapper import (
    MappedTensor,
    ProgramResult,
    program_tensor,
    quantize,
    read_weights,
    readback_effective,
    slice_code,
    write_weights,
)
from .readout import NoiseParams, SweepContext, begin_sweep, read_pattern, read_sweep
from .rng import stream

__all__ = [
    "AdcConfig",
    "CellArray",
    "CellDecision",
    "ColumnGroup",
    "ColumnPair",
    "CompareOutcome",
    "CompareResult",
    "CostLedger",
    "CostParams",
    "DeviceParams",
    "ExperimentSpec",
    "HadamardMatrix",
    "MappedTensor",
    "NoiseParams",
    "ProgramResult",
    "ReadBasis",
    "SamplingRef",
    "SummaryRow",
    "SweepContext",
    "WvConfig",
    "WvResult",
    "apply_pulses",
    "begin_sweep",
    "build_hadamard",
    "charge",
    "compare_to_target",
    "convert",
    "decide",
    "decode",
    "decode_ternary",
    "encode",
    "estimator_variance",
    "hadamard_basis",
    "level_to_conductance",
    "make_column_group",
    "new_array",
    "one_hot_basis",
    "program_column",
    "program_tensor",
    "quantize",
    "read_pattern",
    "read_sweep",
    "read_weights",
    "readback_effective",
    "run_experiment",
    "run_wv",
    "slice_code",
    "stream",
    "sweep_cost",
    "sweep_cost_ratio",
    "verify_sweep_cwsc",
    "verify_sweep_harp",
    "verify_sweep_hdpv",
    "verify_sweep_multiread",
    "write_weights",
]
