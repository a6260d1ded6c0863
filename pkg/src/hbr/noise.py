"""Backend noise parameters and calibration data.

A :class:`CalibrationModel` answers per-edge / per-qubit lookups and falls back
to the backend medians when an entry is missing, so the same object serves the
uniform (attribution) and heterogeneous (validation) model configurations.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class NoiseParams:
    p_2q: float
    p_1q: float
    p_ro: float
    tau_2q: float
    tau_1q: float
    t2: float

    def __post_init__(self) -> None:
        for name in ("p_2q", "p_1q", "p_ro"):
            v = getattr(self, name)
            if not 0.0 <= v < 1.0:
                raise ValueError(f"{name}={v} outside [0, 1)")
        for name in ("tau_2q", "tau_1q", "t2"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


IBM_HERON = NoiseParams(p_2q=3e-3, p_1q=3e-4, p_ro=1.6e-2, tau_2q=68e-9, tau_1q=32e-9, t2=79e-6)
# T2 is an operational estimate (gate-time AC Stark shifts); override per run if needed.
IONQ_FORTE = NoiseParams(p_2q=4e-3, p_1q=2e-4, p_ro=7e-3, tau_2q=600e-6, tau_1q=10e-6, t2=0.2)

PROFILES = {"ibm-heron": IBM_HERON, "ionq-forte": IONQ_FORTE}


def _edge(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class CalibrationModel:
    fallback: NoiseParams
    per_edge_p2q: dict[tuple[int, int], float] = field(default_factory=dict)
    per_qubit_p1q: dict[int, float] = field(default_factory=dict)
    per_qubit_pro: dict[int, float] = field(default_factory=dict)
    per_qubit_t2: dict[int, float] = field(default_factory=dict)
    per_qubit_t1: dict[int, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        edges = {_edge(*e): float(p) for e, p in self.per_edge_p2q.items()}
        object.__setattr__(self, "per_edge_p2q", edges)

    @classmethod
    def uniform(cls, params: NoiseParams) -> CalibrationModel:
        return cls(params)

    def p2q(self, a: int, b: int) -> float:
        return self.per_edge_p2q.get(_edge(a, b), self.fallback.p_2q)

    def p1q(self, q: int) -> float:
        return self.per_qubit_p1q.get(q, self.fallback.p_1q)

    def pro(self, q: int) -> float:
        return self.per_qubit_pro.get(q, self.fallback.p_ro)

    def t2(self, q: int) -> float:
        return self.per_qubit_t2.get(q, self.fallback.t2)

    def scaled(self, factor: float) -> CalibrationModel:
        """Every error probability multiplied by ``factor`` (capped below 1)."""
        cap = lambda p: min(p * factor, 1.0 - 1e-12)  # noqa: E731
        fb = replace(self.fallback, p_2q=cap(self.fallback.p_2q), p_1q=cap(self.fallback.p_1q),
                     p_ro=cap(self.fallback.p_ro))
        return CalibrationModel(
            fb,
            {e: cap(p) for e, p in self.per_edge_p2q.items()},
            {q: cap(p) for q, p in self.per_qubit_p1q.items()},
            {q: cap(p) for q, p in self.per_qubit_pro.items()},
            dict(self.per_qubit_t2),
            dict(self.per_qubit_t1),
        )

    def to_json(self) -> dict:
        qubits = sorted(set(self.per_qubit_p1q) | set(self.per_qubit_pro) | set(self.per_qubit_t2)
                        | set(self.per_qubit_t1))
        fb = self.fallback
        return {
            "edges": [{"a": a, "b": b, "p2q": p} for (a, b), p in sorted(self.per_edge_p2q.items())],
            "qubits": [
                {"q": q, "p1q": self.p1q(q), "pro": self.pro(q),
                 "t1": self.per_qubit_t1.get(q, fb.t2), "t2": self.t2(q)}
                for q in qubits
            ],
            "medians": {"p2q": fb.p_2q, "p1q": fb.p_1q, "pro": fb.p_ro,
                        "tau2q": fb.tau_2q, "tau1q": fb.tau_1q, "t2": fb.t2},
        }

    @classmethod
    def from_json(cls, data: dict) -> CalibrationModel:
        m = data["medians"]
        fb = NoiseParams(m["p2q"], m["p1q"], m["pro"], m["tau2q"], m["tau1q"], m["t2"])
        edges = {_edge(e["a"], e["b"]): float(e["p2q"]) for e in data.get("edges", [])}
        qs = data.get("qubits", [])
        return cls(
            fb,
            edges,
            {q["q"]: float(q["p1q"]) for q in qs if "p1q" in q},
            {q["q"]: float(q["pro"]) for q in qs if "pro" in q},
            {q["q"]: float(q["t2"]) for q in qs if "t2" in q},
            {q["q"]: float(q["t1"]) for q in qs if "t1" in q},
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> CalibrationModel:
        return cls.from_json(json.loads(Path(path).read_text()))


def heterogeneous_calibration(graph, base: NoiseParams, seed: int = 7, edge_range=(1.2e-3, 5e-3),
                              t2_spread: float = 0.5) -> CalibrationModel:
    """Synthetic per-edge calibration for ``graph``.

    Edge errors are log-uniform over ``edge_range`` (the spread observed on
    heavy-hex devices), 1Q/readout errors and T2 jitter around the medians.
    """
    rng = np.random.default_rng(seed)
    lo, hi = edge_range
    edges = {}
    for e in sorted(graph.edges):
        edges[e] = float(math.exp(rng.uniform(math.log(lo), math.log(hi))))
    p1q, pro, t2 = {}, {}, {}
    for q in range(graph.n_physical):
        p1q[q] = float(base.p_1q * rng.uniform(0.5, 1.5))
        pro[q] = float(min(base.p_ro * rng.uniform(0.5, 1.5), 0.5))
        t2[q] = float(base.t2 * rng.uniform(1 - t2_spread, 1 + t2_spread))
    return CalibrationModel(base, edges, p1q, pro, t2)


def resolve_profile(name_or_path: str) -> CalibrationModel:
    """A shipped profile name (uniform medians) or a calibration JSON path."""
    if name_or_path in PROFILES:
        return CalibrationModel.uniform(PROFILES[name_or_path])
    return CalibrationModel.load(name_or_path)
