"""Dense statevector simulation and a Monte Carlo depolarizing sampler.

The sampler is a trajectory method: every shot draws its own Pauli error
pattern (one uniformly random non-identity Pauli after a noisy gate, with the
gate's calibrated probability) plus readout bit flips. Shots that share a
pattern share one simulation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from .circuit import Circuit, Gate, GateKind

MAX_QUBITS = 14
# Routed circuits run on the physical qubits they touch, which can exceed the
# logical width when SWAPs pass through spare qubits.
MAX_ACTIVE_QUBITS = 22


class SimulationError(ValueError):
    pass


_S2 = 1 / math.sqrt(2)
_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (_I2, _X, _Y, _Z)
_FIXED = {
    GateKind.H: np.array([[1, 1], [1, -1]], dtype=complex) * _S2,
    GateKind.X: _X,
    GateKind.SX: np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]], dtype=complex) / 2,
    GateKind.CX: np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
    GateKind.CZ: np.diag([1, 1, 1, -1]).astype(complex),
    GateKind.SWAP: np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex),
}


def _pair_rotation(pauli: np.ndarray, theta: float) -> np.ndarray:
    pp = np.kron(pauli, pauli)
    return math.cos(theta / 2) * np.eye(4, dtype=complex) - 1j * math.sin(theta / 2) * pp


def gate_matrix(g: Gate) -> np.ndarray:
    """Unitary of ``g`` with ``g.qubits[0]`` as the most significant factor."""
    k = g.kind
    if k in _FIXED:
        return _FIXED[k]
    if k in (GateKind.RX, GateKind.RY, GateKind.RZ):
        pauli = {GateKind.RX: _X, GateKind.RY: _Y, GateKind.RZ: _Z}[k]
        t = g.params[0]
        return math.cos(t / 2) * _I2 - 1j * math.sin(t / 2) * pauli
    if k in (GateKind.P, GateKind.U1):
        return np.diag([1, np.exp(1j * g.params[0])])
    if k is GateKind.GLOBALPHASE:
        return np.exp(1j * g.params[0]) * _I2
    if k is GateKind.CP:
        return np.diag([1, 1, 1, np.exp(1j * g.params[0])])
    if k is GateKind.CRZ:
        t = g.params[0]
        return np.diag([1, 1, np.exp(-0.5j * t), np.exp(0.5j * t)])
    if k is GateKind.RXX:
        return _pair_rotation(_X, g.params[0])
    if k is GateKind.RYY:
        return _pair_rotation(_Y, g.params[0])
    if k is GateKind.RZZ:
        return _pair_rotation(_Z, g.params[0])
    if k is GateKind.MS:
        return _pair_rotation(_X, math.pi / 2)
    if k in (GateKind.MCX, GateKind.MCZ):
        dim = 2 ** len(g.qubits)
        m = np.eye(dim, dtype=complex)
        if k is GateKind.MCZ:
            m[-1, -1] = -1
        else:
            m[-2:, -2:] = _X
        return m
    raise SimulationError(f"no matrix for {k.value}")


def apply_matrix(state: np.ndarray, mat: np.ndarray, qubits: tuple[int, ...]) -> np.ndarray:
    """Apply ``mat`` to ``qubits`` of a state held as an n-axis tensor."""
    k = len(qubits)
    moved = np.moveaxis(state, qubits, range(k))
    shape = moved.shape
    out = (mat @ moved.reshape(2**k, -1)).reshape(shape)
    return np.moveaxis(out, range(k), qubits)


def _zero_state(n: int) -> np.ndarray:
    psi = np.zeros((2,) * n, dtype=complex)
    psi[(0,) * n] = 1.0
    return psi


def _evolve(psi: np.ndarray, gates) -> np.ndarray:
    for g in gates:
        if g.kind in (GateKind.BARRIER,):
            continue
        if g.kind is GateKind.MEASURE:
            raise SimulationError("mid-circuit measurement is not supported")
        psi = apply_matrix(psi, gate_matrix(g), g.qubits)
    return psi


def statevector(c: Circuit, max_qubits: int = MAX_QUBITS) -> np.ndarray:
    """Final amplitudes as a flat array of length 2**n (qubit 0 most significant)."""
    if c.n_qubits > max_qubits:
        raise SimulationError(f"{c.n_qubits} qubits exceeds the {max_qubits}-qubit guard")
    return _evolve(_zero_state(c.n_qubits), c.gates).reshape(-1)


def _marginal(probs: np.ndarray, measured: tuple[int, ...]) -> np.ndarray:
    """Probabilities over ``measured`` (first listed = most significant)."""
    n = probs.ndim
    others = tuple(q for q in range(n) if q not in measured)
    marg = probs.sum(axis=others) if others else probs
    # remaining axes are in ascending qubit order
    order = sorted(measured)
    perm = [order.index(q) for q in measured]
    return np.transpose(marg, perm).reshape(-1) if measured else marg.reshape(-1)


def _bitstrings(width: int) -> list[str]:
    return ["".join(bits) for bits in product("01", repeat=width)]


def ideal_distribution(c: Circuit, max_qubits: int = MAX_QUBITS, cutoff: float = 1e-14) -> dict[str, float]:
    """Born-rule distribution over the measured qubits (all qubits if none are measured)."""
    psi = statevector(c, max_qubits).reshape((2,) * c.n_qubits)
    measured = c.measured_qubits or tuple(range(c.n_qubits))
    probs = _marginal(np.abs(psi) ** 2, measured)
    return {b: float(p) for b, p in zip(_bitstrings(len(measured)), probs) if p > cutoff}


@dataclass(frozen=True)
class Counts:
    counts: dict[str, int]
    shots: int

    def __post_init__(self) -> None:
        if sum(self.counts.values()) != self.shots:
            raise ValueError("counts do not sum to shots")

    def probabilities(self) -> dict[str, float]:
        return {k: v / self.shots for k, v in self.counts.items()}

    def to_json(self) -> dict:
        return {"counts": dict(sorted(self.counts.items())), "shots": self.shots}

    @classmethod
    def from_json(cls, data: dict) -> Counts:
        return cls({str(k): int(v) for k, v in data["counts"].items()}, int(data["shots"]))


def _compress(c: Circuit) -> tuple[Circuit, list[int]]:
    """Restrict a (routed) circuit to the qubits it actually touches."""
    active = sorted({q for g in c.gates for q in g.qubits} | set(c.measured_qubits))
    index = {q: i for i, q in enumerate(active)}
    gates = tuple(Gate(g.kind, tuple(index[q] for q in g.qubits), g.params) for g in c.gates)
    return Circuit(len(active), gates, tuple(index[q] for q in c.measured_qubits)), active


def _error_probability(g: Gate, physical: tuple[int, ...], cal) -> float:
    if g.kind.is_two_qubit:
        return cal.p2q(*physical)
    if g.kind.is_physical_1q:
        return cal.p1q(physical[0])
    if g.kind.is_multi_controlled:
        raise SimulationError("noisy sampling needs a synthesized circuit (found mcx/mcz)")
    return 0.0


def _batch_cdfs(ops, mats, patterns, n: int, measured, budget_bytes: int = 32 * 2**20) -> dict:
    """Output CDFs for many error patterns, simulated together as a batch of trajectories."""
    out = {}
    rows = max(1, budget_bytes // (16 * 2**n))
    for lo in range(0, len(patterns), rows):
        chunk = patterns[lo: lo + rows]
        at: dict[int, list[tuple[int, int]]] = {}
        for r, pattern in enumerate(chunk):
            for i, code in pattern:
                at.setdefault(i, []).append((r, code))
        state = np.zeros((len(chunk),) + (2,) * n, dtype=complex)
        state[(slice(None),) + (0,) * n] = 1.0
        for i, (g, m) in enumerate(zip(ops, mats)):
            qs = tuple(q + 1 for q in g.qubits)
            state = apply_matrix(state, m, qs)
            for r, code in at.get(i, ()):
                pauli = PAULIS[code] if len(qs) == 1 else np.kron(PAULIS[code // 4], PAULIS[code % 4])
                state[r] = apply_matrix(state[r], pauli, g.qubits)
        for r, pattern in enumerate(chunk):
            out[pattern] = np.cumsum(_marginal(np.abs(state[r]) ** 2, measured))
    return out


def noisy_sample(c: Circuit, cal, shots: int, seed: int, max_logical: int = MAX_QUBITS) -> Counts:
    """Monte Carlo counts for a (possibly routed) circuit under per-gate depolarizing noise.

    ``c`` is expressed on physical qubits so that calibration lookups hit the
    right edges; it is simulated on the subset of qubits it touches.
    """
    if len(c.measured_qubits) > max_logical:
        raise SimulationError(f"{len(c.measured_qubits)} measured qubits exceeds the {max_logical}-qubit guard")
    small, active = _compress(c)
    if small.n_qubits > MAX_ACTIVE_QUBITS:
        raise SimulationError(f"routed circuit touches {small.n_qubits} qubits")
    ops = [g for g in small.gates if g.kind is not GateKind.BARRIER]
    mats = [gate_matrix(g) for g in ops]
    probs = np.array([_error_probability(g, tuple(active[q] for q in g.qubits), cal) for g in ops])
    noisy_idx = np.flatnonzero(probs > 0)
    noisy_p = probs[noisy_idx]
    measured = small.measured_qubits or tuple(range(small.n_qubits))
    p_ro = np.array([cal.pro(active[q]) for q in measured])

    n = small.n_qubits
    max_checkpoints = max(1, (64 * 2**20) // (16 * 2**n))
    stride = max(1, math.ceil(len(ops) / max_checkpoints))
    checkpoints: dict[int, np.ndarray] = {}
    psi = _zero_state(n)
    for i, (g, m) in enumerate(zip(ops, mats)):
        if i % stride == 0:
            checkpoints[i] = psi
        psi = apply_matrix(psi, m, g.qubits)
    ideal_cdf = np.cumsum(_marginal(np.abs(psi) ** 2, measured))

    def pattern_cdf(pattern: tuple[tuple[int, int], ...]) -> np.ndarray:
        first = pattern[0][0]
        start = (first // stride) * stride
        state = checkpoints[start]
        errors = dict(pattern)
        for i in range(start, len(ops)):
            state = apply_matrix(state, mats[i], ops[i].qubits)
            if i in errors:
                code = errors[i]
                qs = ops[i].qubits
                if len(qs) == 1:
                    state = apply_matrix(state, PAULIS[code], qs)
                else:
                    state = apply_matrix(state, np.kron(PAULIS[code // 4], PAULIS[code % 4]), qs)
        return np.cumsum(_marginal(np.abs(state) ** 2, measured))

    width = len(measured)
    draws = []
    for shot in range(shots):
        rng = np.random.default_rng([seed, shot])
        hit = noisy_idx[rng.random(len(noisy_idx)) < noisy_p]
        pattern = []
        for i in hit:
            span = 3 if len(ops[i].qubits) == 1 else 15
            pattern.append((int(i), int(rng.integers(1, span + 1))))
        draws.append((tuple(pattern), rng.random(), rng.random(width) < p_ro))

    cache: dict[tuple, np.ndarray] = {(): ideal_cdf}
    for key in sorted({k for k, _, _ in draws if len(k) == 1}):
        cache[key] = pattern_cdf(key)
    multi = sorted({k for k, _, _ in draws if len(k) > 1})
    cache.update(_batch_cdfs(ops, mats, multi, n, measured))

    counts: dict[str, int] = {}
    for key, u, flips in draws:
        cdf = cache[key]
        outcome = int(np.searchsorted(cdf, u * cdf[-1], side="right"))
        outcome = min(outcome, len(cdf) - 1)
        bits = [(outcome >> (width - 1 - j)) & 1 for j in range(width)]
        word = "".join(str(b ^ int(f)) for b, f in zip(bits, flips))
        counts[word] = counts.get(word, 0) + 1
    return Counts(dict(sorted(counts.items())), shots)
