"""Gate-level circuit IR and the counting/depth metrics every stage is metered with.

Conventions used throughout the package:

* qubit 0 is the most significant axis of a statevector;
* a measured bitstring lists ``measured_qubits`` in order, classical bit 0 first;
* angles are radians.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum


class GateKind(Enum):
    H = "h"
    X = "x"
    SX = "sx"
    RX = "rx"
    RY = "ry"
    RZ = "rz"
    P = "p"
    U1 = "u1"
    CX = "cx"
    CZ = "cz"
    CP = "cp"
    CRZ = "crz"
    RXX = "rxx"
    RYY = "ryy"
    RZZ = "rzz"
    MS = "ms"
    SWAP = "swap"
    MCX = "mcx"
    MCZ = "mcz"
    MEASURE = "measure"
    BARRIER = "barrier"
    GLOBALPHASE = "gphase"

    @property
    def arity(self) -> int | None:
        """Fixed qubit count, or None for variadic kinds (MCX, MCZ, BARRIER)."""
        if self in _VARIADIC:
            return None
        return 2 if self in TWO_QUBIT else 1

    @property
    def parameter_count(self) -> int:
        return 1 if self in _PARAMETRIC else 0

    @property
    def is_two_qubit(self) -> bool:
        return self in TWO_QUBIT

    @property
    def is_virtual(self) -> bool:
        return self in VIRTUAL

    @property
    def is_physical_1q(self) -> bool:
        return self in PHYSICAL_1Q

    @property
    def is_multi_controlled(self) -> bool:
        return self in (GateKind.MCX, GateKind.MCZ)


TWO_QUBIT = frozenset({
    GateKind.CX, GateKind.CZ, GateKind.CP, GateKind.CRZ, GateKind.RXX,
    GateKind.RYY, GateKind.RZZ, GateKind.MS, GateKind.SWAP,
})
# Zero-duration frame updates; excluded from physical 1Q counts and depth.
VIRTUAL = frozenset({GateKind.RZ, GateKind.P, GateKind.U1, GateKind.GLOBALPHASE})
PHYSICAL_1Q = frozenset({GateKind.H, GateKind.X, GateKind.SX, GateKind.RX, GateKind.RY})
_VARIADIC = frozenset({GateKind.MCX, GateKind.MCZ, GateKind.BARRIER})
_PARAMETRIC = frozenset({
    GateKind.RX, GateKind.RY, GateKind.RZ, GateKind.P, GateKind.U1, GateKind.CP,
    GateKind.CRZ, GateKind.RXX, GateKind.RYY, GateKind.RZZ, GateKind.GLOBALPHASE,
})

# |theta - pi| below this makes CP(theta) a CZ for costing and translation.
PI_TOLERANCE = 1e-9


class CircuitError(ValueError):
    pass


@dataclass(frozen=True)
class Gate:
    kind: GateKind
    qubits: tuple[int, ...]
    params: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if len(set(self.qubits)) != len(self.qubits):
            raise CircuitError(f"repeated qubit in {self.kind.value} {self.qubits}")
        arity = self.kind.arity
        if arity is None:
            minimum = 1 if self.kind is GateKind.BARRIER else 3
            if len(self.qubits) < minimum:
                raise CircuitError(f"{self.kind.value} needs at least {minimum} qubits")
        elif len(self.qubits) != arity:
            raise CircuitError(f"{self.kind.value} acts on {arity} qubit(s), got {len(self.qubits)}")
        if len(self.params) != self.kind.parameter_count:
            raise CircuitError(
                f"{self.kind.value} takes {self.kind.parameter_count} parameter(s), got {len(self.params)}"
            )

    @property
    def is_cz_equivalent(self) -> bool:
        """CP(pi) is a CZ for costing purposes."""
        return self.kind is GateKind.CP and abs(self.params[0] - math.pi) <= PI_TOLERANCE


def gate(kind: GateKind, *qubits: int, params: tuple[float, ...] | list[float] = ()) -> Gate:
    return Gate(kind, tuple(qubits), tuple(params))


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    gates: tuple[Gate, ...] = ()
    measured_qubits: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "gates", tuple(self.gates))
        object.__setattr__(self, "measured_qubits", tuple(int(q) for q in self.measured_qubits))
        if self.n_qubits < 0:
            raise CircuitError("negative qubit count")
        for g in self.gates:
            if any(q < 0 or q >= self.n_qubits for q in g.qubits):
                raise CircuitError(f"{g.kind.value} on {g.qubits} outside {self.n_qubits} qubits")
        if len(set(self.measured_qubits)) != len(self.measured_qubits):
            raise CircuitError("qubit measured twice")
        if any(q < 0 or q >= self.n_qubits for q in self.measured_qubits):
            raise CircuitError("measured qubit out of range")

    def __len__(self) -> int:
        return len(self.gates)

    def with_gates(self, gates) -> Circuit:
        return Circuit(self.n_qubits, tuple(gates), self.measured_qubits)

    def append(self, *gates: Gate) -> Circuit:
        return self.with_gates(self.gates + gates)

    def interacting_pairs(self) -> frozenset[frozenset[int]]:
        return frozenset(frozenset(g.qubits) for g in self.gates if g.kind.is_two_qubit)


@dataclass(frozen=True)
class GateCounts:
    n_2q: int
    n_1q_phys: int
    n_1q_virtual: int
    n_measure: int
    n_barrier: int
    n_multi: int
    per_kind: dict[str, int] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return self.n_2q + self.n_1q_phys + self.n_1q_virtual + self.n_measure + self.n_barrier + self.n_multi


@dataclass(frozen=True)
class DepthMetrics:
    d_tot: int
    d_2q: int

    @property
    def d_1q(self) -> int:
        return self.d_tot - self.d_2q


def count_gates(c: Circuit) -> GateCounts:
    """Partition the gate list by kind class. Terminal measurements come from measured_qubits."""
    per_kind = Counter(g.kind.value for g in c.gates)
    n_2q = n_phys = n_virt = n_meas = n_bar = n_multi = 0
    for g in c.gates:
        k = g.kind
        if k.is_two_qubit:
            n_2q += 1
        elif k.is_virtual:
            n_virt += 1
        elif k.is_physical_1q:
            n_phys += 1
        elif k is GateKind.MEASURE:
            n_meas += 1
        elif k is GateKind.BARRIER:
            n_bar += 1
        else:
            n_multi += 1
    n_meas += len(c.measured_qubits)
    if c.measured_qubits:
        per_kind["measure"] = per_kind.get("measure", 0) + len(c.measured_qubits)
    return GateCounts(n_2q, n_phys, n_virt, n_meas, n_bar, n_multi, dict(sorted(per_kind.items())))


def _asap_depth(gates, n_qubits: int) -> int:
    level = [0] * n_qubits
    depth = 0
    for g in gates:
        layer = max(level[q] for q in g.qubits) + 1
        for q in g.qubits:
            level[q] = layer
        depth = max(depth, layer)
    return depth


def _occupies_time(g: Gate) -> bool:
    return not (g.kind.is_virtual or g.kind in (GateKind.BARRIER, GateKind.MEASURE))


def depth_metrics(c: Circuit) -> DepthMetrics:
    """ASAP layer depth over physical gates, and over the 2Q-only subcircuit."""
    physical = [g for g in c.gates if _occupies_time(g)]
    d_tot = _asap_depth(physical, c.n_qubits)
    d_2q = _asap_depth([g for g in physical if g.kind.is_two_qubit], c.n_qubits)
    return DepthMetrics(d_tot, d_2q)


def busy_time_per_qubit(c: Circuit, tau_2q: float, tau_1q: float) -> list[float]:
    """Summed gate duration touching each qubit (2Q gates occupy both operands)."""
    busy = [0.0] * c.n_qubits
    for g in c.gates:
        if g.kind.is_two_qubit:
            for q in g.qubits:
                busy[q] += tau_2q
        elif g.kind.is_physical_1q:
            busy[g.qubits[0]] += tau_1q
    return busy
