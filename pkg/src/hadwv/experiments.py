"""Experiment orchestration: parameter sweeps, statistics and reporting.

An experiment runs ``trials`` independent column-programming runs per
(grid point, scheme) and aggregates their results. Targets and device
arrays are keyed by (grid point, trial) only, so every scheme programs
the same columns on the same devices; read-noise streams add the scheme
to the key. Outputs are a summary CSV (or JSON), one per-iteration trace
CSV per (scheme, grid point), a JSON manifest echoing the effective
configuration, and rendered figures next to the delimited files.

Identical spec and seed yield byte-identical CSV outputs; the manifest
additionally records wall time.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .costs import COMPARE, SAR_CONVERT, sweep_cost, sweep_cost_ratio
from .engine import WvConfig, WvResult, make_column_group, run_wv
from .errors import InvalidSpec, OutputUnwritable
from .mapper import export_programmed, program_tensor, read_weights
from .readout import NoiseParams
from .rng import stream

CONVERGENCE = "convergence"
NOISE_SWEEP = "noise_sweep"
RHO_SWEEP = "rho_sweep"
TAU_SWEEP = "tau_sweep"
AVERAGING_COMPARE = "averaging_compare"
PROGRAM_TENSOR = "program_tensor"

EXPERIMENTS = (CONVERGENCE, NOISE_SWEEP, RHO_SWEEP, TAU_SWEEP, AVERAGING_COMPARE, PROGRAM_TENSOR)

_DEFAULT_SCHEMES = {
    CONVERGENCE: ["cwsc", "hdpv", "harp"],
    NOISE_SWEEP: ["cwsc", "hdpv", "harp"],
    RHO_SWEEP: ["cwsc", "multiread", "hdpv", "harp"],
    TAU_SWEEP: ["harp"],
    AVERAGING_COMPARE: ["multiread", "hdpv", "harp"],
    PROGRAM_TENSOR: ["hdpv"],
}

_DEFAULT_GRIDS = {
    NOISE_SWEEP: [0.0, 0.2, 0.4, 0.6, 0.7, 0.8],
    RHO_SWEEP: [0.0, 0.1, 0.2, 0.3, 0.4, 0.5],
    TAU_SWEEP: [2, 4, 6],
}

_GRID_PARAM = {
    CONVERGENCE: "none",
    NOISE_SWEEP: "sigma_read_lsb",
    RHO_SWEEP: "rho",
    TAU_SWEEP: "tau_w",
    AVERAGING_COMPARE: "none",
    PROGRAM_TENSOR: "none",
}

# Stream-path tags: (grid, trial) keyed draws vs (grid, scheme, trial) runs.
_TARGET_STREAM = 1
_ARRAY_STREAM = 2
_RUN_STREAM = 3


@dataclass
class ExperimentSpec:
    """A fully determined experiment: grid, trial count, base config, seed."""

    experiment: str = CONVERGENCE
    trials: int = 100
    schemes: list = field(default_factory=list)
    grid: list = field(default_factory=list)
    base: WvConfig = field(default_factory=WvConfig)
    out_dir: Path = Path("runs")
    seed: int = 1
    make_plots: bool = True
    summary_format: str = "csv"
    weights_path: str | None = None
    export_path: str | None = None

    def normalized(self) -> "ExperimentSpec":
        spec = replace(self)
        if spec.experiment not in EXPERIMENTS:
            raise InvalidSpec(f"unknown experiment {spec.experiment!r}")
        if spec.trials < 1:
            raise InvalidSpec("trials must be >= 1")
        if spec.summary_format not in ("csv", "json"):
            raise InvalidSpec(f"unknown summary format {spec.summary_format!r}")
        if not spec.schemes:
            spec.schemes = list(_DEFAULT_SCHEMES[spec.experiment])
        if not spec.grid:
            spec.grid = list(_DEFAULT_GRIDS.get(spec.experiment, [None]))
        if spec.experiment == PROGRAM_TENSOR and not spec.weights_path:
            raise InvalidSpec("program_tensor needs a weights file")
        spec.out_dir = Path(spec.out_dir)
        spec.base.validate()
        return spec


@dataclass
class SummaryRow:
    """Aggregate statistics of one (scheme, grid point) cell."""

    experiment: str
    scheme: str
    grid_param: str
    grid_value: float | None
    trials: int
    mean_rms_cell_lsb: float
    std_rms_cell_lsb: float
    mean_rms_weight_lsb: float
    std_rms_weight_lsb: float
    mean_iterations: float
    std_iterations: float
    mean_latency_ns: float
    std_latency_ns: float
    mean_energy_pj: float
    std_energy_pj: float
    convergence_rate: float
    total_read_patterns: int
    total_sar_converts: int
    total_compares: int
    total_comparisons: int
    total_ih_decodes: int
    total_write_phases: int
    total_write_pulse_slots: int
    total_saturations: int


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    rows: list
    results: dict          # (grid_index, scheme) -> list[WvResult]
    out_dir: Path
    files: list


def _apply_grid(cfg: WvConfig, experiment: str, value) -> WvConfig:
    if value is None:
        return cfg
    if experiment == NOISE_SWEEP:
        return replace(cfg, noise=replace(cfg.noise, sigma_total_lsb=float(value)))
    if experiment == RHO_SWEEP:
        return replace(cfg, noise=replace(cfg.noise, rho=float(value)))
    if experiment == TAU_SWEEP:
        return replace(cfg, tau_w=int(value))
    return cfg


def draw_target_codes(cfg: WvConfig, rng: np.random.Generator) -> np.ndarray:
    """Uniform signed codes over the full representable range."""
    limit = 2 ** (cfg.weight_bits - 1) - 1
    return rng.integers(-limit, limit + 1, size=cfg.n_cells)


def run_cell(spec: ExperimentSpec, grid_index: int, scheme: str, trial: int) -> WvResult:
    """One column run, fully keyed by (spec, grid point, scheme, trial)."""
    cfg = _apply_grid(replace(spec.base, scheme=scheme), spec.experiment, spec.grid[grid_index])
    scheme_index = spec.schemes.index(scheme)
    targets = draw_target_codes(cfg, stream(spec.seed, _TARGET_STREAM, grid_index, trial))
    group = make_column_group(cfg, stream(spec.seed, _ARRAY_STREAM, grid_index, trial))
    return run_wv(
        group, targets, cfg, rng=stream(spec.seed, _RUN_STREAM, grid_index, scheme_index, trial)
    )


def _summarize(spec, grid_index, scheme, results) -> SummaryRow:
    def stats(values):
        arr = np.asarray(values, dtype=np.float64)
        return float(arr.mean()), float(arr.std())

    m_cell, s_cell = stats([r.rms_cell_lsb for r in results])
    m_weight, s_weight = stats([r.rms_weight_lsb for r in results])
    m_iter, s_iter = stats([r.iterations_used for r in results])
    m_lat, s_lat = stats([r.cost.total_latency_ns for r in results])
    m_en, s_en = stats([r.cost.total_energy_pj for r in results])
    ledgers = [r.cost for r in results]
    return SummaryRow(
        experiment=spec.experiment,
        scheme=scheme,
        grid_param=_GRID_PARAM[spec.experiment],
        grid_value=spec.grid[grid_index],
        trials=len(results),
        mean_rms_cell_lsb=m_cell,
        std_rms_cell_lsb=s_cell,
        mean_rms_weight_lsb=m_weight,
        std_rms_weight_lsb=s_weight,
        mean_iterations=m_iter,
        std_iterations=s_iter,
        mean_latency_ns=m_lat,
        std_latency_ns=s_lat,
        mean_energy_pj=m_en,
        std_energy_pj=s_en,
        convergence_rate=float(np.mean([r.converged for r in results])),
        total_read_patterns=sum(l.read_patterns for l in ledgers),
        total_sar_converts=sum(l.events(SAR_CONVERT) for l in ledgers),
        total_compares=sum(l.events(COMPARE) for l in ledgers),
        total_comparisons=sum(
            l.comparisons(SAR_CONVERT) + l.comparisons(COMPARE) for l in ledgers
        ),
        total_ih_decodes=sum(
            l.events("ih_decode_hdpv") + l.events("ih_decode_harp") for l in ledgers
        ),
        total_write_phases=sum(l.events("write_phase") for l in ledgers),
        total_write_pulse_slots=sum(l.pulse_slots() for l in ledgers),
        total_saturations=sum(l.saturations for l in ledgers),
    )


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: Path, fieldnames, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(fieldnames)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _config_echo(cfg: WvConfig) -> dict:
    echo = dataclasses.asdict(cfg)
    echo["effective_adc_bits"] = cfg.effective_adc_bits
    return echo


def _write_traces(spec, out_dir, grid_index, scheme, results) -> Path:
    tag = f"{scheme}_g{grid_index}" if len(spec.grid) > 1 else scheme
    path = out_dir / f"trace_{tag}.csv"
    rows = []
    for trial, res in enumerate(results):
        for it in res.trace:
            rows.append(
                (
                    trial,
                    it.iteration,
                    it.mean_abs_cell_error_lsb,
                    it.frozen_cells,
                    it.total_cells,
                    it.cum_latency_ns,
                    it.cum_energy_pj,
                )
            )
    _write_csv(
        path,
        [
            "trial",
            "iteration",
            "mean_abs_cell_error_lsb",
            "frozen_cells",
            "total_cells",
            "cum_latency_ns",
            "cum_energy_pj",
        ],
        rows,
    )
    return path


def _write_summary(spec, out_dir, rows) -> Path:
    fields = [f.name for f in dataclasses.fields(SummaryRow)]
    if spec.summary_format == "json":
        path = out_dir / "summary.json"
        with open(path, "w") as fh:
            json.dump([dataclasses.asdict(r) for r in rows], fh, indent=2, sort_keys=True)
            fh.write("\n")
    else:
        path = out_dir / "summary.csv"
        _write_csv(path, fields, [[getattr(r, f) for f in fields] for r in rows])
    return path


def _write_ratios(spec, out_dir, rows_by_key) -> Path:
    """Per-sweep and measured full-run cost ratios against multi-read."""
    cfg = spec.base
    bits = cfg.effective_adc_bits
    n = cfg.n_cells
    m = cfg.multiread_m
    out = []
    totals = {}
    for (gi, scheme), results in rows_by_key.items():
        if gi != 0:
            continue
        totals[scheme] = (
            float(np.mean([r.cost.total_latency_ns for r in results])),
            float(np.mean([r.cost.total_energy_pj for r in results])),
            sum(r.cost.read_patterns for r in results),
        )
    for scheme in spec.schemes:
        if scheme == "multiread" or "multiread" not in totals or scheme not in totals:
            continue
        lat_ratio, en_ratio = sweep_cost_ratio("multiread", scheme, n, cfg.cost, bits, m)
        full_lat = totals["multiread"][0] / totals[scheme][0]
        full_en = totals["multiread"][1] / totals[scheme][1]
        read_ratio = totals["multiread"][2] / totals[scheme][2]
        out.append(
            ("multiread", scheme, lat_ratio, en_ratio, full_lat, full_en, read_ratio)
        )
    path = out_dir / "ratios.csv"
    _write_csv(
        path,
        [
            "scheme_a",
            "scheme_b",
            "per_sweep_latency_ratio",
            "per_sweep_energy_ratio",
            "full_run_latency_ratio",
            "full_run_energy_ratio",
            "read_pattern_ratio",
        ],
        out,
    )
    return path


def _run_program_tensor(spec: ExperimentSpec, out_dir: Path) -> ExperimentResult:
    values, _header = read_weights(spec.weights_path)
    cfg = replace(spec.base, scheme=spec.schemes[0])
    program = program_tensor(values, cfg, master_seed=spec.seed)
    export = Path(spec.export_path) if spec.export_path else out_dir / "programmed_weights.txt"
    export_programmed(export, program, cfg, seed=spec.seed)
    rows = [_summarize(spec, 0, cfg.scheme, program.results)]
    files = [_write_summary(spec, out_dir, rows), export]
    files.append(_write_traces(spec, out_dir, 0, cfg.scheme, program.results))
    if spec.make_plots:
        from . import figures

        files.extend(figures.render_program_tensor(out_dir, program))
    return ExperimentResult(
        spec=spec, rows=rows, results={(0, cfg.scheme): program.results}, out_dir=out_dir,
        files=files,
    )


def run_experiment(spec: ExperimentSpec) -> ExperimentResult:
    """Execute an experiment spec and write its artifact files."""
    spec = spec.normalized()
    started = time.time()
    out_dir = spec.out_dir
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        probe = out_dir / ".write_probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise OutputUnwritable(f"cannot write to {out_dir}: {exc}") from exc

    if spec.experiment == PROGRAM_TENSOR:
        result = _run_program_tensor(spec, out_dir)
    else:
        results: dict = {}
        rows = []
        files = []
        for gi in range(len(spec.grid)):
            for scheme in spec.schemes:
                cell = [run_cell(spec, gi, scheme, t) for t in range(spec.trials)]
                results[(gi, scheme)] = cell
                rows.append(_summarize(spec, gi, scheme, cell))
                files.append(_write_traces(spec, out_dir, gi, scheme, cell))
        files.insert(0, _write_summary(spec, out_dir, rows))
        if spec.experiment == AVERAGING_COMPARE:
            files.append(_write_ratios(spec, out_dir, results))
        if spec.make_plots:
            from . import figures

            files.extend(figures.render_experiment(out_dir, spec, rows, results))
        result = ExperimentResult(spec=spec, rows=rows, results=results, out_dir=out_dir, files=files)

    manifest = {
        "experiment": spec.experiment,
        "seed": spec.seed,
        "trials": spec.trials,
        "schemes": spec.schemes,
        "grid": spec.grid,
        "grid_param": _GRID_PARAM[spec.experiment],
        "targets": "uniform signed codes, keyed by (seed, grid, trial)",
        "statistics": "mean and std over trials",
        "config": _config_echo(spec.base),
        "version": __version__,
        "wall_time_s": time.time() - started,
        "outputs": sorted(str(Path(f).name) for f in result.files),
    }
    manifest_path = out_dir / "manifest.json"
    with open(manifest_path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")
    result.files.append(manifest_path)
    return result
