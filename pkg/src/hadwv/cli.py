"""Command-line interface.

Subcommands map directly onto the experiment kinds::

    hadwv run                default convergence comparison
    hadwv sweep-noise        total read-noise sweep
    hadwv sweep-rho          common-mode fraction sweep
    hadwv sweep-tau          compare-only decision threshold sweep
    hadwv compare-averaging  multi-read vs Hadamard verify cost comparison
    hadwv program-tensor     program a weight container file
    hadwv selftest           exact-invariant suite, exit nonzero on failure

Options come from an optional flat key=value config file (# comments, one
key per line) overridden by command-line flags; the effective configuration
is echoed into the run manifest. The default output directory can also be
set through the HADWV_OUT environment variable.

Exit codes: 0 success, 1 experiment or selftest failure, 2 usage errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from pathlib import Path

from .engine import SCHEMES, WvConfig
from .errors import HadwvError, InvalidSpec
from .experiments import (
    AVERAGING_COMPARE,
    CONVERGENCE,
    NOISE_SWEEP,
    PROGRAM_TENSOR,
    RHO_SWEEP,
    TAU_SWEEP,
    ExperimentSpec,
    run_experiment,
)

_COMMAND_TO_EXPERIMENT = {
    "run": CONVERGENCE,
    "sweep-noise": NOISE_SWEEP,
    "sweep-rho": RHO_SWEEP,
    "sweep-tau": TAU_SWEEP,
    "compare-averaging": AVERAGING_COMPARE,
    "program-tensor": PROGRAM_TENSOR,
}

_BOOL_VALUES = {"true": True, "1": True, "yes": True, "false": False, "0": False, "no": False}

# Config-file keys: (target section, attribute, parser).
_CONFIG_KEYS = {
    "scheme": ("spec", "schemes", lambda v: [s.strip() for s in v.split(",") if s.strip()]),
    "trials": ("spec", "trials", int),
    "seed": ("spec", "seed", int),
    "out_dir": ("spec", "out_dir", Path),
    "grid": ("spec", "grid", lambda v: [float(x) for x in v.split(",") if x.strip()]),
    "plots": ("spec", "make_plots", lambda v: _BOOL_VALUES[v.lower()]),
    "format": ("spec", "summary_format", str),
    "n_cells": ("cfg", "n_cells", int),
    "weight_bits": ("cfg", "weight_bits", int),
    "cell_bits": ("device", "bits_per_cell", int),
    "freeze_streak": ("cfg", "freeze_streak", int),
    "tau_w": ("cfg", "tau_w", int),
    "multiread_m": ("cfg", "multiread_m", int),
    "adc_bits": ("cfg", "adc_bits", int),
    "max_fine_iters": ("cfg", "max_fine_iters", int),
    "max_coarse_iters": ("cfg", "max_coarse_iters", int),
    "fine_pulse_cap": ("cfg", "fine_pulse_cap", int),
    "sigma_read_lsb": ("noise", "sigma_total_lsb", float),
    "rho": ("noise", "rho", float),
    "cm_static": ("noise", "cm_static", lambda v: _BOOL_VALUES[v.lower()]),
    "sigma_map_rel": ("device", "sigma_map_rel", float),
    "d2d_sigma_rel": ("device", "d2d_sigma_rel", float),
    "c2c_sigma_rel": ("device", "c2c_sigma_rel", float),
    "nonlinearity": ("device", "nonlinearity", float),
    "g_min_us": ("device", "g_min_us", float),
    "g_max_us": ("device", "g_max_us", float),
}


def parse_config_file(path: Path) -> dict:
    """Parse the flat key=value config format into {key: parsed value}."""
    out = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidSpec(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _CONFIG_KEYS:
            raise InvalidSpec(f"{path}:{lineno}: unknown config key {key!r}")
        _, _, parse = _CONFIG_KEYS[key]
        try:
            out[key] = parse(value)
        except (ValueError, KeyError) as exc:
            raise InvalidSpec(f"{path}:{lineno}: bad value for {key!r}: {value!r}") from exc
    return out


def _build_spec(args) -> ExperimentSpec:
    settings: dict = {}
    if args.config:
        path = Path(args.config)
        if not path.is_file():
            raise InvalidSpec(f"config file not found: {path}")
        settings = parse_config_file(path)

    cfg = WvConfig()
    cfg_fields = {}
    noise_fields = {}
    device_fields = {}
    spec_fields: dict = {}
    for key, value in settings.items():
        section = _CONFIG_KEYS[key][0]
        attr = _CONFIG_KEYS[key][1]
        {"cfg": cfg_fields, "noise": noise_fields, "device": device_fields, "spec": spec_fields}[
            section
        ][attr] = value

    # Command-line flags override config-file values.
    if args.seed is not None:
        spec_fields["seed"] = args.seed
    if args.trials is not None:
        spec_fields["trials"] = args.trials
    if args.scheme:
        spec_fields["schemes"] = [s.strip() for s in args.scheme.split(",") if s.strip()]
    if args.out is not None:
        spec_fields["out_dir"] = Path(args.out)
    if args.format is not None:
        spec_fields["summary_format"] = args.format
    if getattr(args, "grid", None):
        spec_fields["grid"] = [float(x) for x in args.grid.split(",") if x.strip()]
    if args.no_plots:
        spec_fields["make_plots"] = False

    for name in spec_fields.get("schemes", []):
        if name not in SCHEMES:
            raise InvalidSpec(f"unknown scheme {name!r} (choose from {', '.join(SCHEMES)})")

    if noise_fields:
        cfg_fields["noise"] = dataclasses.replace(cfg.noise, **noise_fields)
    if device_fields:
        cfg_fields["device"] = dataclasses.replace(cfg.device, **device_fields)
    if "seed" in spec_fields:
        cfg_fields.setdefault("seed", spec_fields["seed"])
    cfg = dataclasses.replace(cfg, **cfg_fields)

    spec_fields.setdefault("out_dir", Path(os.environ.get("HADWV_OUT", "runs")))
    spec = ExperimentSpec(
        experiment=_COMMAND_TO_EXPERIMENT[args.command],
        base=cfg,
        weights_path=getattr(args, "weights", None),
        export_path=getattr(args, "export", None),
        **spec_fields,
    )
    return spec


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key=value config file")
    parser.add_argument("--seed", type=int, help="master seed (default 1)")
    parser.add_argument("--trials", type=int, help="trials per grid point")
    parser.add_argument("--scheme", help="comma-separated scheme list")
    parser.add_argument("--out", help="output directory (default $HADWV_OUT or ./runs)")
    parser.add_argument("--format", choices=("csv", "json"), help="summary file format")
    parser.add_argument("--no-plots", action="store_true", help="skip figure rendering")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hadwv",
        description="Write-and-verify simulator for multi-level RRAM columns",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for command in ("run", "compare-averaging"):
        p = sub.add_parser(command)
        _add_common(p)
    for command in ("sweep-noise", "sweep-rho", "sweep-tau"):
        p = sub.add_parser(command)
        _add_common(p)
        p.add_argument("--grid", help="comma-separated sweep values")
    p = sub.add_parser("program-tensor")
    _add_common(p)
    p.add_argument("--weights", required=True, help="weight container file to program")
    p.add_argument("--export", help="path for the programmed-weights container")
    sub.add_parser("selftest")
    return parser


# -- selftest -------------------------------------------------------------


def _selftest_checks():
    import numpy as np

    from . import costs, device, mapper
    from .adc import AdcConfig, CompareOutcome, SamplingRef, compare_to_target, convert
    from .costs import CostLedger
    from .hadamard import build_hadamard, decode, decode_ternary, encode

    def orthogonality():
        for n in (2, 4, 8, 16, 32, 64):
            h = build_hadamard(n)
            assert (h.entries.T @ h.entries == n * np.eye(n, dtype=np.int64)).all()
            assert (h.entries[0] == 1).all()
            assert (h.entries[1:].sum(axis=1) == 0).all()

    def round_trip():
        rng = np.random.default_rng(0)
        for n in (4, 32):
            h = build_hadamard(n)
            for _ in range(20):
                w = rng.integers(-100, 100, size=n)
                assert (decode(h, encode(h, w)) == w).all()

    def common_mode_rejection():
        h = build_hadamard(32)
        for c in (0.5, -2.25, 7.0):
            expected = np.zeros(32)
            expected[0] = c
            assert (decode(h, np.full(32, c)) == expected).all()

    def ternary_decode():
        h = build_hadamard(4)
        for idx in range(3**4):
            digits = [(idx // 3**i) % 3 - 1 for i in range(4)]
            s = np.array(digits)
            assert (decode_ternary(h, s) == h.entries.T @ s).all()

    def adc_boundaries():
        cfg = AdcConfig(bits=9, sampling_ref=SamplingRef.HALF_VCM)
        ledger = CostLedger()
        assert convert(5.4, AdcConfig(bits=9, sampling_ref=SamplingRef.GROUND), ledger) == 5
        assert convert(-3.0, cfg, ledger) == -3
        assert convert(600.0, AdcConfig(bits=9, sampling_ref=SamplingRef.GROUND), ledger) == 511
        for v, outcome in ((9.4, CompareOutcome.LOW), (10.0, CompareOutcome.EQUAL), (10.6, CompareOutcome.HIGH)):
            assert compare_to_target(v, 10, cfg, ledger).outcome is outcome

    def ledger_arithmetic():
        ledger = CostLedger()
        ledger.add_sar_convert(9)
        assert ledger.total_latency_ns == 79.5
        ledger2 = CostLedger()
        ledger2.add_compare(9, 1)
        assert ledger2.total_latency_ns == 62.0
        lat, _ = costs.sweep_cost("hdpv", 32, costs.CostParams(), 9)
        assert lat == 2549.0

    def quantize_slice_identity():
        for code in range(-31, 32):
            slices = mapper.slice_code(code, 6, 3)
            assert mapper.recombine_slices(slices, 3) == abs(code)

    def device_determinism():
        params = device.DeviceParams()
        a = device.new_array(8, 4, params, 42)
        b = device.new_array(8, 4, params, 42)
        assert (a.d2d_gain == b.d2d_gain).all()
        assert (a.conductance == params.g_min_us).all()

    return [
        ("hadamard orthogonality and balanced rows", orthogonality),
        ("encode/decode round trip", round_trip),
        ("common-mode rejection", common_mode_rejection),
        ("ternary decode vs matrix multiply", ternary_decode),
        ("adc rounding and compare boundaries", adc_boundaries),
        ("cost ledger arithmetic", ledger_arithmetic),
        ("quantize/slice/recombine identity", quantize_slice_identity),
        ("device initialization determinism", device_determinism),
    ]


def selftest() -> int:
    failures = 0
    for name, check in _selftest_checks():
        try:
            check()
        except Exception as exc:  # report and keep going
            failures += 1
            print(f"FAIL {name}: {exc}")
        else:
            print(f"ok   {name}")
    if failures:
        print(f"selftest: {failures} check(s) failed")
        return 1
    print("selftest: all checks passed")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    if args.command == "selftest":
        return selftest()

    try:
        spec = _build_spec(args)
    except InvalidSpec as exc:
        print(f"hadwv: {exc}", file=sys.stderr)
        return 2

    try:
        result = run_experiment(spec)
    except HadwvError as exc:
        print(f"hadwv: experiment failed: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {len(result.files)} file(s) to {result.out_dir}")
    for row in result.rows:
        grid = "" if row.grid_value is None else f" {row.grid_param}={row.grid_value}"
        print(
            f"  {row.scheme}{grid}: rms_weight={row.mean_rms_weight_lsb:.3f} LSB, "
            f"iters={row.mean_iterations:.1f}, latency={row.mean_latency_ns / 1e3:.1f} us, "
            f"energy={row.mean_energy_pj / 1e3:.2f} nJ"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
