"""Weight quantization, bit-slicing, tensor mapping and container I/O.

A signed B-bit weight code is stored across k = B / B_C cells, each holding
B_C bits, in adjacent positive/negative column pairs: positive codes
program the positive column while the negative column stays at HRS, and
vice versa, so the effective value is always (level+ - level-). Weights
fill logical columns row-major, padded with zero weights.

The weight container is a text file: one JSON header line carrying shape,
precision, scale and provenance, followed by one decimal value per line.
Values are written with ``repr`` so the round trip is bit exact.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import AllZeroTensor, CodeOutOfRange, ConfigInconsistent
from .rng import stream

LAYOUT_VERSION = 1

# Stream-path tags under a tensor programming run.
_COLUMN_STREAM = 0


def _round_half_away(x: np.ndarray) -> np.ndarray:
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def quantize(weights, bits: int) -> tuple[np.ndarray, float]:
    """Symmetric per-tensor quantization to signed ``bits``-bit codes.

    scale = max|w| / (2^(B-1) - 1); codes round half away from zero. An
    all-zero tensor has no scale, so it quantizes to zeros at scale 1 with
    a warning.
    """
    if bits < 2:
        raise ConfigInconsistent(f"weight precision must be >= 2 bits, got {bits}")
    w = np.asarray(weights, dtype=np.float64)
    if w.size == 0:
        raise ConfigInconsistent("cannot quantize an empty tensor")
    limit = 2 ** (bits - 1) - 1
    peak = float(np.abs(w).max())
    if peak == 0.0:
        warnings.warn("all-zero tensor: scale defaults to 1", AllZeroTensor)
        return np.zeros(w.shape, dtype=np.int64), 1.0
    scale = peak / limit
    codes = _round_half_away(w / scale).astype(np.int64)
    np.clip(codes, -limit, limit, out=codes)
    return codes, scale


def dequantize(codes, scale: float) -> np.ndarray:
    return np.asarray(codes, dtype=np.float64) * scale


def slice_code(code: int, bits: int, bits_per_cell: int) -> list[int]:
    """Base-2^B_C digits of |code|, least significant slice first."""
    if bits % bits_per_cell != 0:
        raise ConfigInconsistent(f"{bits} bits do not split into {bits_per_cell}-bit slices")
    limit = 2 ** (bits - 1) - 1
    if not -limit <= code <= limit:
        raise CodeOutOfRange(f"code {code} outside [{-limit}, {limit}]")
    k = bits // bits_per_cell
    base = 2**bits_per_cell
    mag = abs(int(code))
    digits = []
    for _ in range(k):
        digits.append(mag % base)
        mag //= base
    return digits


def slice_codes(codes: np.ndarray, bits: int, bits_per_cell: int) -> np.ndarray:
    """Vectorized :func:`slice_code` magnitudes: shape (k, n), LSB slice first."""
    if bits % bits_per_cell != 0:
        raise ConfigInconsistent(f"{bits} bits do not split into {bits_per_cell}-bit slices")
    codes = np.asarray(codes, dtype=np.int64)
    limit = 2 ** (bits - 1) - 1
    if codes.size and (np.abs(codes) > limit).any():
        raise CodeOutOfRange(f"codes exceed [{-limit}, {limit}]")
    k = bits // bits_per_cell
    base = 2**bits_per_cell
    mag = np.abs(codes)
    out = np.empty((k, codes.size), dtype=np.int64)
    for l in range(k):
        out[l] = mag % base
        mag //= base
    return out


def recombine_slices(slices, bits_per_cell: int) -> int:
    """Positional inverse of :func:`slice_code` (magnitude only)."""
    base = 2**bits_per_cell
    return sum(int(d) * base**l for l, d in enumerate(slices))


def slice_scales(bits: int, bits_per_cell: int) -> np.ndarray:
    """Positional weight 2^((l-1) B_C) of each slice, LSB slice first."""
    k = bits // bits_per_cell
    return (2**bits_per_cell) ** np.arange(k, dtype=np.int64)


# -- weight container ---------------------------------------------------------


def write_weights(path, values, *, weight_bits: int, scale: float, seed: int,
                  provenance: dict | None = None) -> None:
    """Write a tensor to the newline-delimited container format."""
    values = np.asarray(values, dtype=np.float64)
    header = {
        "layout_version": LAYOUT_VERSION,
        "shape": list(values.shape),
        "weight_bits": int(weight_bits),
        "scale": float(scale),
        "seed": int(seed),
    }
    if provenance is not None:
        header["provenance"] = provenance
    with open(path, "w") as fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for v in values.reshape(-1):
            fh.write(repr(float(v)) + "\n")


def read_weights(path) -> tuple[np.ndarray, dict]:
    """Read a container file back; returns (values, header)."""
    with open(path) as fh:
        header = json.loads(fh.readline())
        values = np.array([float(line) for line in fh if line.strip()], dtype=np.float64)
    shape = tuple(header["shape"])
    expected = int(np.prod(shape)) if shape else 1
    if values.size != expected:
        raise ConfigInconsistent(f"container holds {values.size} values, header says {expected}")
    return values.reshape(shape), header


# -- tensor mapping -----------------------------------------------------------


@dataclass
class MappedTensor:
    """Where each weight of a tensor lives on the cell arrays.

    Weights flatten row-major into logical columns of ``n_cells`` rows; a
    weight's k slices occupy the same row of k adjacent column pairs
    (slice l at array columns 2l and 2l+1). Partial final columns are
    padded with zero weights.
    """

    shape: tuple
    scale: float
    weight_bits: int
    bits_per_cell: int
    n_cells: int
    n_columns: int
    n_pad: int

    @property
    def k(self) -> int:
        return self.weight_bits // self.bits_per_cell


@dataclass
class ProgramResult:
    mapping: MappedTensor
    groups: list = field(default_factory=list)       # one ColumnGroup per logical column
    results: list = field(default_factory=list)      # one WvResult per logical column


def program_tensor(weights, cfg, master_seed: int | None = None) -> ProgramResult:
    """Quantize a tensor and program every mapped column with write-verify.

    Each logical column gets an independent device array and RNG stream
    split from the master seed, so columns may be programmed in any order
    (or in parallel) with identical results.
    """
    from .engine import make_column_group, run_wv  # deferred: engine builds on this module

    w = np.asarray(weights, dtype=np.float64)
    codes, scale = quantize(w, cfg.weight_bits)
    flat = codes.reshape(-1)
    n = cfg.n_cells
    n_cols = (flat.size + n - 1) // n
    n_pad = n_cols * n - flat.size
    padded = np.concatenate([flat, np.zeros(n_pad, dtype=np.int64)])

    mapping = MappedTensor(
        shape=tuple(w.shape),
        scale=scale,
        weight_bits=cfg.weight_bits,
        bits_per_cell=cfg.device.bits_per_cell,
        n_cells=n,
        n_columns=n_cols,
        n_pad=n_pad,
    )
    seed = cfg.seed if master_seed is None else master_seed
    groups, results = [], []
    for c in range(n_cols):
        group = make_column_group(cfg, stream(seed, _COLUMN_STREAM, c, 0))
        res = run_wv(group, padded[c * n : (c + 1) * n], cfg, rng=stream(seed, _COLUMN_STREAM, c, 1))
        groups.append(group)
        results.append(res)
    return ProgramResult(mapping=mapping, groups=groups, results=results)


def readback_effective(groups, mapping: MappedTensor) -> np.ndarray:
    """Noiseless reconstruction of the programmed tensor.

    Per weight: sum over slices of 2^((l-1) B_C) (level+ - level-), times
    the quantization scale. Levels are the unrounded conductance readings.
    """
    from .readout import effective_levels

    scales = slice_scales(mapping.weight_bits, mapping.bits_per_cell).astype(np.float64)
    cols = []
    for group in groups:
        levels = np.stack(
            [effective_levels(group.array, pos, neg) for pos, neg in group.pairs]
        )  # (k, n_cells)
        cols.append(scales @ levels)
    flat = np.concatenate(cols) * mapping.scale
    if mapping.n_pad:
        flat = flat[: -mapping.n_pad]
    return flat.reshape(mapping.shape)


def unmap_codes(results, mapping: MappedTensor) -> np.ndarray:
    """Recover the quantized target codes in original tensor order."""
    flat = np.concatenate([np.asarray(r.target_codes) for r in results])
    if mapping.n_pad:
        flat = flat[: -mapping.n_pad]
    return flat.reshape(mapping.shape)


def export_programmed(path, program: ProgramResult, cfg, *, seed: int | None = None) -> None:
    """Export the programmed effective weights in container format."""
    effective = readback_effective(program.groups, program.mapping)
    provenance = {
        "scheme": cfg.scheme,
        "sigma_read_lsb": cfg.noise.sigma_total_lsb,
        "rho": cfg.noise.rho,
        "sigma_map_rel": cfg.device.sigma_map_rel,
        "per_column_rms_weight_lsb": [r.rms_weight_lsb for r in program.results],
        "per_column_rms_cell_lsb": [r.rms_cell_lsb for r in program.results],
    }
    write_weights(
        path,
        effective,
        weight_bits=cfg.weight_bits,
        scale=program.mapping.scale,
        seed=cfg.seed if seed is None else seed,
        provenance=provenance,
    )
