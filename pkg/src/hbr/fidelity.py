"""Analytic fidelity engine: additive per-stage log10 contributions plus readout and idle-T2 terms.

Everything is in decades (log10 fidelity); linear fidelity only appears in
:func:`per_edge_prediction` and :attr:`FidelityBreakdown.linear`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .circuit import Circuit, DepthMetrics, GateCounts, busy_time_per_qubit, count_gates, depth_metrics
from .noise import CalibrationModel, NoiseParams

LOG10_E = math.log10(math.e)


def log10_survival(p: float) -> float:
    """log10(1 - p), accurate for small p."""
    return math.log1p(-p) / math.log(10)


class Stage(Enum):
    H = "H"
    B = "B"
    R = "R"


class Mode(Enum):
    ATTRIBUTION = "attribution"
    VALIDATION = "validation"


class T2Source(Enum):
    SCALAR = "scalar"
    PER_QUBIT = "per_qubit"


@dataclass(frozen=True)
class ModelConfig:
    mode: Mode = Mode.ATTRIBUTION
    include_t2_idle: bool = True
    t2_source: T2Source = T2Source.SCALAR

    @classmethod
    def attribution(cls) -> ModelConfig:
        return cls(Mode.ATTRIBUTION, True, T2Source.SCALAR)

    @classmethod
    def validation(cls, include_t2_idle: bool = False) -> ModelConfig:
        # Simulator comparisons drop T2: the sampler does not decohere idle qubits.
        return cls(Mode.VALIDATION, include_t2_idle, T2Source.PER_QUBIT)


@dataclass(frozen=True)
class StageDelta:
    stage: Stage
    d_n2q: int
    d_n1q_phys: int


@dataclass(frozen=True)
class TimingBreakdown:
    t_circuit: float
    t_active: float
    t_idle: float
    clamped: bool = False


def phase_fidelity(delta: StageDelta, p: NoiseParams) -> float:
    return delta.d_n2q * log10_survival(p.p_2q) + delta.d_n1q_phys * log10_survival(p.p_1q)


def readout_penalty(n_measured: int, p_ro: float) -> float:
    return n_measured * log10_survival(p_ro)


def timing(counts: GateCounts, depth: DepthMetrics, n_qubits: int, p: NoiseParams) -> TimingBreakdown:
    t_circuit = depth.d_2q * p.tau_2q + depth.d_1q * p.tau_1q
    t_active = counts.n_2q * p.tau_2q * 2 + counts.n_1q_phys * p.tau_1q
    idle = n_qubits * t_circuit - t_active
    # ASAP layering can undercount wall time relative to busy time; clamp and flag
    if idle < -1e-15:
        return TimingBreakdown(t_circuit, t_active, 0.0, clamped=True)
    return TimingBreakdown(t_circuit, t_active, max(idle, 0.0))


def t2_penalty(t: TimingBreakdown, t2: float) -> float:
    if t2 <= 0:
        raise ValueError("t2 must be positive")
    return -(t.t_idle / t2) * LOG10_E


@dataclass(frozen=True)
class FidelityBreakdown:
    df_h: float
    df_b: float
    df_r: float
    df_readout: float
    df_t2: float
    t_idle_clamped: bool = False

    @property
    def df_hb(self) -> float:
        return self.df_h + self.df_b

    @property
    def df_hbr(self) -> float:
        return self.df_h + self.df_b + self.df_r

    @property
    def total(self) -> float:
        return self.df_h + self.df_b + self.df_r + self.df_readout + self.df_t2

    @property
    def linear(self) -> float:
        return 10.0 ** self.total

    def _pct(self, value: float) -> float:
        denom = abs(self.df_h) + abs(self.df_b) + abs(self.df_r)
        return 100.0 * abs(value) / denom if denom > 0 else 0.0

    @property
    def pct_h(self) -> float:
        return self._pct(self.df_h)

    @property
    def pct_b(self) -> float:
        return self._pct(self.df_b)

    @property
    def pct_r(self) -> float:
        return self._pct(self.df_r)

    def to_json(self) -> dict:
        return {
            "df_h": self.df_h, "df_b": self.df_b, "df_hb": self.df_hb, "df_r": self.df_r,
            "df_hbr": self.df_hbr, "df_readout": self.df_readout, "df_t2": self.df_t2,
            "total": self.total, "pct_h": self.pct_h, "pct_b": self.pct_b, "pct_r": self.pct_r,
            "t_idle_clamped": self.t_idle_clamped,
        }


def active_qubits(c: Circuit) -> int:
    """Qubits touched by a gate or measured (routed circuits carry idle device qubits)."""
    return len({q for g in c.gates for q in g.qubits} | set(c.measured_qubits))


def total_fidelity(deltas, final: Circuit, cfg: ModelConfig, cal: CalibrationModel,
                   n_qubits: int | None = None) -> FidelityBreakdown:
    """Combine the H, B, R deltas with readout and idle-T2 terms of the final circuit.

    Stage terms always use the backend medians (the attribution proxy); the
    per-edge model lives in :func:`per_edge_prediction`. ``n_qubits`` is the
    logical register width: SWAPs move states around but at any instant exactly
    that many device qubits carry information. Without it, every touched qubit
    of ``final`` is counted.
    """
    by_stage = {d.stage: d for d in deltas}
    if len(by_stage) != 3 or len(deltas) != 3:
        raise ValueError("need exactly one delta for each of H, B, R")
    p = cal.fallback
    df = {s: phase_fidelity(by_stage[s], p) for s in Stage}
    df_ro = readout_penalty(len(final.measured_qubits), p.p_ro)
    df_t2, clamped = 0.0, False
    if cfg.include_t2_idle:
        width = n_qubits if n_qubits is not None else active_qubits(final)
        t = timing(count_gates(final), depth_metrics(final), width, p)
        df_t2, clamped = t2_penalty(t, p.t2), t.clamped
    return FidelityBreakdown(df[Stage.H], df[Stage.B], df[Stage.R], df_ro, df_t2, clamped)


def per_qubit_idle(c: Circuit, p: NoiseParams) -> dict[int, float]:
    """Idle time of each active qubit: wall time minus the time its gates keep it busy."""
    depth = depth_metrics(c)
    t_circuit = depth.d_2q * p.tau_2q + depth.d_1q * p.tau_1q
    busy = busy_time_per_qubit(c, p.tau_2q, p.tau_1q)
    used = {q for g in c.gates for q in g.qubits} | set(c.measured_qubits)
    return {q: max(t_circuit - busy[q], 0.0) for q in sorted(used)}


def per_edge_log10(c: Circuit, cal: CalibrationModel, cfg: ModelConfig | None = None) -> float:
    """log10 of the per-edge predicted fidelity."""
    cfg = cfg or ModelConfig.validation()
    total = 0.0
    for g in c.gates:
        if g.kind.is_two_qubit:
            total += log10_survival(cal.p2q(*g.qubits))
        elif g.kind.is_physical_1q:
            total += log10_survival(cal.p1q(g.qubits[0]))
        elif g.kind.is_multi_controlled:
            raise ValueError("per-edge prediction needs a synthesized circuit")
    for q in c.measured_qubits:
        total += log10_survival(cal.pro(q))
    if cfg.include_t2_idle:
        for q, idle in per_qubit_idle(c, cal.fallback).items():
            t2 = cal.t2(q) if cfg.t2_source is T2Source.PER_QUBIT else cal.fallback.t2
            total -= (idle / t2) * LOG10_E
    return total


def per_edge_prediction(c: Circuit, cal: CalibrationModel, cfg: ModelConfig | None = None) -> float:
    """Product of per-gate survival factors, readout factors and (optionally) per-qubit T2 factors."""
    return 10.0 ** per_edge_log10(c, cal, cfg)


def t2_share_by_qubit(c: Circuit, cal: CalibrationModel) -> dict[int, float]:
    """Fraction of the per-qubit T2 penalty carried by each qubit."""
    pen = {q: idle / cal.t2(q) for q, idle in per_qubit_idle(c, cal.fallback).items()}
    tot = sum(pen.values())
    return {q: (v / tot if tot > 0 else 0.0) for q, v in pen.items()}
