"""Latency/energy accounting from discrete hardware events.

Every read conversion, target comparison, inverse-transform decode and
write phase charges a fixed cost into a :class:`CostLedger`. Costs are held
as integers (picoseconds and femtojoules) so totals are exactly additive
and replay-deterministic; the float ns/pJ views divide at the end.

Default constants (32 ns read pulse, 45-50 ns SAR conversion vs 30 ns
compare logic, 1.44-2.7 pJ TIA + 1.8-32 pJ SAR capacitor array over the
8-10 bit range, 5 ns / 0.9 or 0.2 pJ inverse-transform adders, 100 ns write
pulse) describe a scaled-voltage multi-level RRAM macro. Latency and TIA
energy interpolate linearly in resolution; the SAR capacitor-array energy
interpolates geometrically because the DAC grows exponentially with bits.
The compare-mode energy has no published standalone figure, so the default
is a declared calibration: 0.02x the SAR capacitor-array energy per
comparison (one comparator decision against a preloaded code, no binary
search and no DAC settling sequence), chosen so full write-verify runs of
the compare-only Hadamard scheme land near two thirds of the full-
conversion scheme's energy.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace

from .errors import UnknownEventKind

READ_PULSE = "read_pulse"
SAR_CONVERT = "sar_convert"
COMPARE = "compare"
IH_DECODE_HDPV = "ih_decode_hdpv"
IH_DECODE_HARP = "ih_decode_harp"
WRITE_PHASE = "write_phase"

EVENT_KINDS = (READ_PULSE, SAR_CONVERT, COMPARE, IH_DECODE_HDPV, IH_DECODE_HARP, WRITE_PHASE)

_MIN_BITS = 8
_MAX_BITS = 10


def _interp_frac(bits: int) -> float:
    b = min(max(bits, _MIN_BITS), _MAX_BITS)
    return (b - _MIN_BITS) / (_MAX_BITS - _MIN_BITS)


@dataclass(frozen=True)
class CostParams:
    """Per-event latency (ns) and energy (pJ) constants."""

    read_pulse_ns: float = 32.0
    compare_latency_ns: float = 30.0
    write_pulse_ns: float = 100.0
    ih_decode_latency_ns: float = 5.0
    ih_decode_energy_hdpv_pj: float = 0.9
    ih_decode_energy_harp_pj: float = 0.2
    write_pulse_energy_pj: float = 0.0
    sar_latency_lo_ns: float = 45.0
    sar_latency_hi_ns: float = 50.0
    tia_energy_lo_pj: float = 1.44
    tia_energy_hi_pj: float = 2.7
    sar_energy_lo_pj: float = 1.8
    sar_energy_hi_pj: float = 32.0
    compare_energy_scale: float = 0.02
    # Explicit overrides, bypassing resolution interpolation when set.
    sar_latency_ns: float | None = None
    tia_energy_pj: float | None = None
    sar_energy_pj: float | None = None
    compare_energy_pj: float | None = None

    def sar_latency_at(self, bits: int) -> float:
        if self.sar_latency_ns is not None:
            return self.sar_latency_ns
        f = _interp_frac(bits)
        return self.sar_latency_lo_ns + f * (self.sar_latency_hi_ns - self.sar_latency_lo_ns)

    def tia_energy_at(self, bits: int) -> float:
        if self.tia_energy_pj is not None:
            return self.tia_energy_pj
        f = _interp_frac(bits)
        return self.tia_energy_lo_pj + f * (self.tia_energy_hi_pj - self.tia_energy_lo_pj)

    def sar_energy_at(self, bits: int) -> float:
        if self.sar_energy_pj is not None:
            return self.sar_energy_pj
        f = _interp_frac(bits)
        return self.sar_energy_lo_pj * (self.sar_energy_hi_pj / self.sar_energy_lo_pj) ** f

    def compare_energy_at(self, bits: int) -> float:
        if self.compare_energy_pj is not None:
            return self.compare_energy_pj
        return self.compare_energy_scale * self.sar_energy_at(bits)


def _ps(ns: float) -> int:
    return round(ns * 1000)


def _fj(pj: float) -> int:
    return round(pj * 1000)


@dataclass
class _Bin:
    events: int = 0
    comparisons: int = 0
    read_patterns: int = 0
    pulse_slots: int = 0
    ps: int = 0
    fj: int = 0


@dataclass
class CostLedger:
    """Exact, additive accumulator of hardware events, binned by kind."""

    params: CostParams = field(default_factory=CostParams)
    bins: dict = field(default_factory=dict)
    saturations: int = 0

    def _bin(self, kind: str) -> _Bin:
        b = self.bins.get(kind)
        if b is None:
            b = _Bin()
            self.bins[kind] = b
        return b

    def add_read_pulse(self) -> None:
        b = self._bin(READ_PULSE)
        b.events += 1
        b.read_patterns += 1
        b.ps += _ps(self.params.read_pulse_ns)

    def add_sar_convert(self, bits: int) -> None:
        """One read pulse digitized by a full n-bit SAR conversion."""
        p = self.params
        b = self._bin(SAR_CONVERT)
        b.events += 1
        b.comparisons += bits
        b.read_patterns += 1
        b.ps += _ps(p.read_pulse_ns) + _ps(p.sar_latency_at(bits))
        b.fj += _fj(p.tia_energy_at(bits)) + _fj(p.sar_energy_at(bits))

    def add_compare(self, bits: int, comparisons: int) -> None:
        """One read pulse resolved against a target with 1 or 2 comparisons."""
        if comparisons not in (1, 2):
            raise ValueError("compare events use 1 or 2 comparisons")
        p = self.params
        b = self._bin(COMPARE)
        b.events += 1
        b.comparisons += comparisons
        b.read_patterns += 1
        b.ps += _ps(p.read_pulse_ns) + _ps(p.compare_latency_ns)
        b.fj += _fj(p.tia_energy_at(bits)) + comparisons * _fj(p.compare_energy_at(bits))

    def add_ih_decode(self, kind: str) -> None:
        """One inverse-transform decode of a full sweep's measurements."""
        if kind not in (IH_DECODE_HDPV, IH_DECODE_HARP):
            raise UnknownEventKind(f"unknown decode class {kind!r}")
        p = self.params
        b = self._bin(kind)
        b.events += 1
        b.ps += _ps(p.ih_decode_latency_ns)
        energy = p.ih_decode_energy_hdpv_pj if kind == IH_DECODE_HDPV else p.ih_decode_energy_harp_pj
        b.fj += _fj(energy)

    def add_write_phase(self, max_pulses: int, total_pulses: int | None = None) -> None:
        """One column-parallel write phase; latency set by the slowest cell."""
        if max_pulses < 1:
            raise ValueError("write phase needs at least one pulse")
        p = self.params
        b = self._bin(WRITE_PHASE)
        b.events += 1
        b.pulse_slots += max_pulses
        b.ps += max_pulses * _ps(p.write_pulse_ns)
        if p.write_pulse_energy_pj:
            b.fj += (total_pulses if total_pulses is not None else max_pulses) * _fj(
                p.write_pulse_energy_pj
            )

    def note_saturation(self) -> None:
        self.saturations += 1

    # -- views -------------------------------------------------------------

    @property
    def total_latency_ns(self) -> float:
        return sum(b.ps for b in self.bins.values()) / 1000.0

    @property
    def total_energy_pj(self) -> float:
        return sum(b.fj for b in self.bins.values()) / 1000.0

    @property
    def read_patterns(self) -> int:
        return sum(b.read_patterns for b in self.bins.values())

    def events(self, kind: str) -> int:
        b = self.bins.get(kind)
        return b.events if b else 0

    def comparisons(self, kind: str) -> int:
        b = self.bins.get(kind)
        return b.comparisons if b else 0

    def pulse_slots(self) -> int:
        b = self.bins.get(WRITE_PHASE)
        return b.pulse_slots if b else 0

    def adc_energy_share(self) -> float:
        """Fraction of total energy attributed to the TIA+ADC events."""
        total = sum(b.fj for b in self.bins.values())
        if total == 0:
            return 0.0
        adc = sum(b.fj for k, b in self.bins.items() if k in (SAR_CONVERT, COMPARE, READ_PULSE))
        return adc / total

    def merge(self, other: "CostLedger") -> None:
        for kind, ob in other.bins.items():
            b = self._bin(kind)
            b.events += ob.events
            b.comparisons += ob.comparisons
            b.read_patterns += ob.read_patterns
            b.pulse_slots += ob.pulse_slots
            b.ps += ob.ps
            b.fj += ob.fj
        self.saturations += other.saturations

    def rows(self) -> list[dict]:
        out = []
        for kind in EVENT_KINDS:
            b = self.bins.get(kind)
            if b is None:
                continue
            out.append(
                {
                    "kind": kind,
                    "events": b.events,
                    "comparisons": b.comparisons,
                    "read_patterns": b.read_patterns,
                    "pulse_slots": b.pulse_slots,
                    "latency_ns": b.ps / 1000.0,
                    "energy_pj": b.fj / 1000.0,
                }
            )
        return out

    def write_csv(self, path) -> None:
        rows = self.rows()
        fields = ["kind", "events", "comparisons", "read_patterns", "pulse_slots", "latency_ns", "energy_pj"]
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=fields)
            writer.writeheader()
            writer.writerows(rows)

    def summary(self) -> dict:
        return {
            "total_latency_ns": self.total_latency_ns,
            "total_energy_pj": self.total_energy_pj,
            "read_patterns": self.read_patterns,
            "saturations": self.saturations,
            "events": {r["kind"]: r for r in self.rows()},
        }

    def write_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.summary(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def charge(ledger: CostLedger, event_kind: str, **kwargs) -> None:
    """Append one event of the given kind to the ledger.

    Recognized kinds: read_pulse; sar_convert (kwarg ``bits``); compare
    (kwargs ``bits``, ``comparisons``); ih_decode_hdpv / ih_decode_harp;
    write_phase (kwargs ``max_pulses``, optional ``total_pulses``).
    """
    if event_kind == READ_PULSE:
        ledger.add_read_pulse()
    elif event_kind == SAR_CONVERT:
        ledger.add_sar_convert(kwargs.get("bits", 9))
    elif event_kind == COMPARE:
        ledger.add_compare(kwargs.get("bits", 9), kwargs.get("comparisons", 1))
    elif event_kind in (IH_DECODE_HDPV, IH_DECODE_HARP):
        ledger.add_ih_decode(event_kind)
    elif event_kind == WRITE_PHASE:
        ledger.add_write_phase(kwargs.get("max_pulses", 1), kwargs.get("total_pulses"))
    else:
        raise UnknownEventKind(f"unknown event kind {event_kind!r}")


def sweep_events(scheme: str, n: int, m: int = 5) -> list[tuple[str, dict]]:
    """Deterministic event composition of one verification sweep.

    Compare events are composed with a single comparison (the cheap Low
    outcome); run-time ledgers record the data-dependent 1-or-2 counts.
    """
    if scheme == "cwsc":
        return [(COMPARE, {"comparisons": 1})] * n
    if scheme == "multiread":
        return [(SAR_CONVERT, {})] * (m * n)
    if scheme == "hdpv":
        return [(SAR_CONVERT, {})] * n + [(IH_DECODE_HDPV, {})]
    if scheme == "harp":
        return [(COMPARE, {"comparisons": 1})] * n + [(IH_DECODE_HARP, {})]
    raise UnknownEventKind(f"unknown scheme {scheme!r}")


def sweep_cost(scheme: str, n: int, params: CostParams, bits: int, m: int = 5) -> tuple[float, float]:
    """(latency_ns, energy_pj) of one sweep from its event composition."""
    ledger = CostLedger(params=params)
    for kind, kw in sweep_events(scheme, n, m):
        charge(ledger, kind, bits=bits, **kw)
    return ledger.total_latency_ns, ledger.total_energy_pj


def sweep_cost_ratio(
    scheme_a: str,
    scheme_b: str,
    n: int,
    params: CostParams,
    bits: int,
    m: int = 5,
) -> tuple[float, float]:
    """Per-sweep latency and energy of scheme_a relative to scheme_b."""
    lat_a, en_a = sweep_cost(scheme_a, n, params, bits, m)
    lat_b, en_b = sweep_cost(scheme_b, n, params, bits, m)
    return lat_a / lat_b, en_a / en_b
