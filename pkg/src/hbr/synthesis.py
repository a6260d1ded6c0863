"""H stage: lower composite and multi-qubit gates to CX plus single-qubit gates.

Two ancilla-free multi-controlled-Z strategies are provided:

COMPACT
    phase-polynomial synthesis walking every parity of the gate's qubits in
    Gray-code order: 2**m - 2 CX for an m-qubit MCZ (6 for CCZ, 14 for C3Z).
RECURSIVE
    split one control off, MCZ = CP(phi/2) . MCX . CP(-phi/2) . MCX . MC-phase(phi/2)
    on the remaining qubits, recursing on the last factor. Costlier (22 CX for C3Z).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

from .circuit import Circuit, Gate, GateKind, gate


class SynthesisError(ValueError):
    pass


class McxStrategy(Enum):
    COMPACT = "compact"
    RECURSIVE = "recursive"


class PauliEvolution(Enum):
    CX_LADDER = "cx_ladder"


@dataclass(frozen=True)
class SynthesisPolicy:
    mcx_strategy: McxStrategy = McxStrategy.COMPACT
    pauli_evolution: PauliEvolution = PauliEvolution.CX_LADDER
    local_cleanup: bool = False


def _cx(a: int, b: int) -> Gate:
    return gate(GateKind.CX, a, b)


def _p(q: int, theta: float) -> Gate:
    return gate(GateKind.P, q, params=(theta,))


def _h(q: int) -> Gate:
    return gate(GateKind.H, q)


def gray_code_phase(qubits: tuple[int, ...], angle: Callable[[int], float]) -> list[Gate]:
    """Apply exp(i * angle(|S|) * parity_S) for every non-empty subset S of ``qubits``.

    The last qubit accumulates each parity; subsets not containing it are
    handled by recursing on the remaining qubits. Uses 2**m - 2 CX.
    """
    m = len(qubits)
    if m == 0:
        return []
    target, controls = qubits[-1], qubits[:-1]
    k = len(controls)
    out: list[Gate] = []
    current = 0
    for step in range(2**k):
        code = step ^ (step >> 1)
        if step:
            flipped = (code ^ current).bit_length() - 1
            out.append(_cx(controls[flipped], target))
            current = code
        size = bin(code).count("1") + 1
        theta = angle(size)
        if theta:
            out.append(_p(target, theta))
    if current:
        out.append(_cx(controls[current.bit_length() - 1], target))
    return out + gray_code_phase(controls, angle)


def _mcp_angle(phi: float, m: int) -> Callable[[int], float]:
    # x_1...x_m = 2**(1-m) * sum_S (-1)**(|S|+1) parity_S
    return lambda size: phi * (-1) ** (size + 1) / 2 ** (m - 1)


def mcphase_compact(phi: float, qubits: tuple[int, ...]) -> list[Gate]:
    """Diagonal phase exp(i*phi) on |1...1> of ``qubits``."""
    if len(qubits) == 1:
        return [_p(qubits[0], phi)]
    return gray_code_phase(tuple(qubits), _mcp_angle(phi, len(qubits)))


def mcx_compact(controls: tuple[int, ...], target: int) -> list[Gate]:
    return [_h(target)] + mcphase_compact(math.pi, tuple(controls) + (target,)) + [_h(target)]


def mcphase_recursive(phi: float, qubits: tuple[int, ...]) -> list[Gate]:
    qubits = tuple(qubits)
    if len(qubits) <= 3:
        return mcphase_compact(phi, qubits)
    *rest, split, target = qubits
    rest = tuple(rest)
    return (
        mcphase_compact(phi / 2, (split, target))
        + mcx_compact(rest, split)
        + mcphase_compact(-phi / 2, (split, target))
        + mcx_compact(rest, split)
        + mcphase_recursive(phi / 2, rest + (target,))
    )


def decompose_gate(g: Gate, policy: SynthesisPolicy) -> list[Gate]:
    """One gate -> CX + 1Q gates. Single-qubit gates and CX pass through."""
    k = g.kind
    q = g.qubits
    if k is GateKind.CX or not (k.is_two_qubit or k.is_multi_controlled):
        return [g]
    if k is GateKind.CZ or g.is_cz_equivalent:
        return [_h(q[1]), _cx(q[0], q[1]), _h(q[1])]
    if k is GateKind.CP:
        t = g.params[0]
        return [_p(q[0], t / 2), _cx(q[0], q[1]), _p(q[1], -t / 2), _cx(q[0], q[1]), _p(q[1], t / 2)]
    if k is GateKind.CRZ:
        t = g.params[0]
        return [gate(GateKind.RZ, q[1], params=(t / 2,)), _cx(q[0], q[1]),
                gate(GateKind.RZ, q[1], params=(-t / 2,)), _cx(q[0], q[1])]
    if k is GateKind.RZZ:
        return [_cx(q[0], q[1]), gate(GateKind.RZ, q[1], params=g.params), _cx(q[0], q[1])]
    if k is GateKind.RXX or k is GateKind.MS:
        theta = g.params[0] if k is GateKind.RXX else math.pi / 2
        inner = decompose_gate(gate(GateKind.RZZ, *q, params=(theta,)), policy)
        return [_h(q[0]), _h(q[1])] + inner + [_h(q[0]), _h(q[1])]
    if k is GateKind.RYY:
        inner = decompose_gate(gate(GateKind.RZZ, *q, params=g.params), policy)
        pre = [gate(GateKind.RX, x, params=(math.pi / 2,)) for x in q]
        post = [gate(GateKind.RX, x, params=(-math.pi / 2,)) for x in q]
        return pre + inner + post
    if k is GateKind.SWAP:
        return [_cx(q[0], q[1]), _cx(q[1], q[0]), _cx(q[0], q[1])]
    if k is GateKind.MCZ:
        if policy.mcx_strategy is McxStrategy.COMPACT:
            return mcphase_compact(math.pi, q)
        return mcphase_recursive(math.pi, q)
    if k is GateKind.MCX:
        *controls, target = q
        mcz = decompose_gate(Gate(GateKind.MCZ, q), policy)
        return [_h(target)] + mcz + [_h(target)]
    raise SynthesisError(f"no decomposition rule for {k.value}")


_SELF_INVERSE = frozenset({GateKind.H, GateKind.X, GateKind.CX, GateKind.CZ, GateKind.SWAP, GateKind.MCZ})
_ROTATIONS = frozenset({
    GateKind.RX, GateKind.RY, GateKind.RZ, GateKind.P, GateKind.U1, GateKind.CP,
    GateKind.CRZ, GateKind.RXX, GateKind.RYY, GateKind.RZZ,
})
_SYMMETRIC = frozenset({GateKind.CZ, GateKind.SWAP, GateKind.CP, GateKind.RXX, GateKind.RYY, GateKind.RZZ,
                        GateKind.MCZ})


def _inverse_pair(a: Gate, b: Gate) -> bool:
    if a.kind is not b.kind:
        return False
    same = a.qubits == b.qubits or (a.kind in _SYMMETRIC and set(a.qubits) == set(b.qubits))
    if not same:
        return False
    if a.kind in _SELF_INVERSE:
        return True
    if a.kind in _ROTATIONS:
        return abs(a.params[0] + b.params[0]) <= 1e-12
    return False


def cancel_inverse_pairs(c: Circuit) -> Circuit:
    """Remove adjacent gate/inverse pairs, cascading (one pass with per-qubit stacks)."""
    out: list[Gate | None] = []
    stacks: dict[int, list[int]] = {q: [] for q in range(c.n_qubits)}
    for g in c.gates:
        tops = {stacks[q][-1] if stacks[q] else -1 for q in g.qubits}
        if len(tops) == 1:
            i = tops.pop()
            if i >= 0 and out[i] is not None and set(out[i].qubits) == set(g.qubits) and _inverse_pair(out[i], g):
                out[i] = None
                for q in g.qubits:
                    stacks[q].pop()
                continue
        out.append(g)
        for q in g.qubits:
            stacks[q].append(len(out) - 1)
    return c.with_gates(x for x in out if x is not None)


def synthesize(c: Circuit, policy: SynthesisPolicy | None = None) -> Circuit:
    policy = policy or SynthesisPolicy()
    gates: list[Gate] = []
    for g in c.gates:
        gates.extend(decompose_gate(g, policy))
    out = c.with_gates(gates)
    if policy.local_cleanup:
        out = cancel_inverse_pairs(out)
    return out
