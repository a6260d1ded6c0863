"""B stage: rewrite a {1Q, 2Q} circuit into a backend's native gate set.

Two-qubit gates are mapped onto the native entangler with single-qubit
conjugation; afterwards every maximal run of single-qubit gates on a wire is
fused into one SU(2) element and re-emitted through a ZYZ Euler decomposition
in the native single-qubit set. RZ is virtual on both backends, so a run costs
at most two SX (IBM) or one RY (IonQ) physical pulses.
"""
from __future__ import annotations

import cmath
import math
from enum import Enum

import numpy as np

from .circuit import Circuit, Gate, GateKind, gate
from .simulator import gate_matrix
from .synthesis import SynthesisPolicy, decompose_gate

ANGLE_TOL = 1e-9


class TranslationError(ValueError):
    pass


class NativeGateSet(Enum):
    IBM_HERON = "ibm-heron"
    IONQ_FORTE = "ionq-forte"

    @property
    def two_q(self) -> GateKind:
        return GateKind.CZ if self is NativeGateSet.IBM_HERON else GateKind.MS

    @property
    def one_q_phys(self) -> frozenset[GateKind]:
        if self is NativeGateSet.IBM_HERON:
            return frozenset({GateKind.SX, GateKind.X})
        return frozenset({GateKind.RX, GateKind.RY})

    @property
    def one_q_virtual(self) -> frozenset[GateKind]:
        return frozenset({GateKind.RZ})

    @property
    def members(self) -> frozenset[GateKind]:
        return self.one_q_phys | self.one_q_virtual | {self.two_q, GateKind.BARRIER, GateKind.MEASURE}

    @classmethod
    def parse(cls, name: str) -> NativeGateSet:
        key = name.strip().lower().replace("_", "-")
        for b in cls:
            if b.value == key:
                return b
        raise TranslationError(f"unknown basis {name!r}")


def _wrap(theta: float) -> float:
    """Angle folded into (-pi, pi]."""
    t = math.remainder(theta, 2 * math.pi)
    return math.pi if abs(t + math.pi) <= ANGLE_TOL else t


def _is_zero(theta: float) -> bool:
    return abs(_wrap(theta)) <= ANGLE_TOL


def zyz_angles(u: np.ndarray) -> tuple[float, float, float]:
    """(theta, phi, lam) with u ~ RZ(phi) RY(theta) RZ(lam) up to global phase."""
    det = np.linalg.det(u)
    v = u / cmath.sqrt(det)
    c, s = abs(v[0, 0]), abs(v[1, 0])
    theta = 2 * math.atan2(s, c)
    if s <= ANGLE_TOL:
        return 0.0, cmath.phase(v[1, 1]) - cmath.phase(v[0, 0]), 0.0
    if c <= ANGLE_TOL:
        return math.pi, cmath.phase(v[1, 0]) - cmath.phase(-v[0, 1]), 0.0
    phi = cmath.phase(v[1, 0]) - cmath.phase(v[0, 0])
    lam = cmath.phase(v[1, 1]) - cmath.phase(v[1, 0])
    return theta, phi, lam


def _rz(q: int, theta: float) -> list[Gate]:
    return [] if _is_zero(theta) else [gate(GateKind.RZ, q, params=(_wrap(theta),))]


def euler_native(u: np.ndarray, q: int, basis: NativeGateSet) -> list[Gate]:
    """Native single-qubit sequence (circuit order) equal to ``u`` up to global phase."""
    theta, phi, lam = zyz_angles(u)
    if _is_zero(theta):
        return _rz(q, phi + lam)
    if basis is NativeGateSet.IONQ_FORTE:
        return _rz(q, lam) + [gate(GateKind.RY, q, params=(_wrap(theta),))] + _rz(q, phi)
    if abs(theta - math.pi / 2) <= ANGLE_TOL:
        return _rz(q, lam - math.pi / 2) + [gate(GateKind.SX, q)] + _rz(q, phi + math.pi / 2)
    if abs(theta - math.pi) <= ANGLE_TOL:
        # RZ(phi) RY(pi) RZ(lam) ~ X RZ(lam - phi + pi)
        return _rz(q, lam - phi + math.pi) + [gate(GateKind.X, q)]
    return (_rz(q, lam) + [gate(GateKind.SX, q)] + _rz(q, theta + math.pi)
            + [gate(GateKind.SX, q)] + _rz(q, phi + math.pi))


def _native_cx(control: int, target: int, basis: NativeGateSet) -> list[Gate]:
    if basis is NativeGateSet.IBM_HERON:
        return [gate(GateKind.H, target), gate(GateKind.CZ, control, target), gate(GateKind.H, target)]
    half = math.pi / 2
    return [
        gate(GateKind.RY, control, params=(half,)),
        gate(GateKind.MS, control, target),
        gate(GateKind.RX, control, params=(-half,)),
        gate(GateKind.RX, target, params=(-half,)),
        gate(GateKind.RY, control, params=(-half,)),
    ]


_POLICY = SynthesisPolicy()


def _lower_two_qubit(g: Gate, basis: NativeGateSet) -> list[Gate]:
    if g.kind is basis.two_q:
        return [g]
    if basis is NativeGateSet.IBM_HERON and g.is_cz_equivalent:
        return [gate(GateKind.CZ, *g.qubits)]
    if g.kind is GateKind.CX:
        return _native_cx(*g.qubits, basis)
    out: list[Gate] = []
    for sub in decompose_gate(g, _POLICY):
        out.extend(_lower_two_qubit(sub, basis) if sub.kind.is_two_qubit else [sub])
    return out


def _fuse(gates: list[Gate], basis: NativeGateSet) -> list[Gate]:
    out: list[Gate] = []
    pending: dict[int, np.ndarray] = {}

    def flush(q: int) -> None:
        u = pending.pop(q, None)
        if u is not None:
            out.extend(euler_native(u, q, basis))

    for g in gates:
        if g.kind is GateKind.GLOBALPHASE:
            continue
        if len(g.qubits) == 1 and g.kind not in (GateKind.BARRIER, GateKind.MEASURE):
            q = g.qubits[0]
            pending[q] = gate_matrix(g) @ pending.get(q, np.eye(2, dtype=complex))
            continue
        for q in g.qubits:
            flush(q)
        out.append(g)
    for q in sorted(pending):
        flush(q)
    return out


def translate(c: Circuit, basis: NativeGateSet) -> Circuit:
    lowered: list[Gate] = []
    for g in c.gates:
        if g.kind.is_multi_controlled:
            raise TranslationError(f"{g.kind.value} reached basis translation; run synthesis first")
        if g.kind.is_two_qubit:
            lowered.extend(_lower_two_qubit(g, basis))
        else:
            lowered.append(g)
    out = _fuse(lowered, basis)
    bad = {g.kind for g in out} - basis.members
    if bad:
        raise TranslationError(f"non-native gates left: {sorted(k.value for k in bad)}")
    return c.with_gates(out)
