"""Deterministic generators for the eight benchmark circuits.

Every generator returns a pre-synthesis circuit (it may contain MCZ, CP, CRZ,
RZZ, SWAP) with terminal measurements on its output register.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from enum import Enum

import numpy as np

from .circuit import Circuit, Gate, GateKind, gate

BV_SECRET_N12 = "110010100110"
TROTTER_STEP_CHOICES = (1, 2, 4, 6, 8, 10)


class BenchmarkError(ValueError):
    pass


class Algorithm(Enum):
    GHZ = "ghz"
    GROVER = "grover"
    QDRIFT = "qdrift"
    QFT = "qft"
    QPE = "qpe"
    TROTTER = "trotter"
    BV = "bv"
    QAOA = "qaoa"


@dataclass(frozen=True)
class HamiltonianSpec:
    """Transverse-field Ising chain  H = J sum Z_i Z_{i+1} + h sum X_i."""

    n: int
    J: float = 1.0
    h: float = 0.5
    t: float = 1.0
    model: str = "TFIM"
    topology: str = "chain"

    def terms(self) -> list[tuple[float, str, tuple[int, ...]]]:
        out: list[tuple[float, str, tuple[int, ...]]] = [
            (self.J, "ZZ", (i, i + 1)) for i in range(self.n - 1)
        ]
        out += [(self.h, "X", (i,)) for i in range(self.n)]
        return [t for t in out if t[0] != 0]

    @property
    def norm(self) -> float:
        return sum(abs(c) for c, _, _ in self.terms())


@dataclass(frozen=True)
class BenchmarkSpec:
    algorithm: Algorithm
    n: int
    seed: int = 42
    trotter_steps: int = 4
    qdrift_lambda: float | None = None
    qdrift_epsilon: float = 0.05
    qpe_ancilla: int = 4
    qpe_reps: int = 4
    qaoa_p: int = 1
    qaoa_gamma: float = 0.5
    qaoa_beta: float = 0.5
    hamiltonian: dict = field(default_factory=lambda: {"J": 1.0, "h": 0.5, "t": 1.0})

    def __post_init__(self) -> None:
        if isinstance(self.algorithm, str):
            object.__setattr__(self, "algorithm", Algorithm(self.algorithm.lower()))
        if self.n < 1:
            raise BenchmarkError("n must be positive")

    def tfim(self, n: int | None = None) -> HamiltonianSpec:
        h = self.hamiltonian
        return HamiltonianSpec(n if n is not None else self.n, h["J"], h["h"], h["t"])

    def with_n(self, n: int) -> BenchmarkSpec:
        return replace(self, n=n)

    def to_json(self) -> dict:
        d = asdict(self)
        d["algorithm"] = self.algorithm.value
        return d

    @classmethod
    def from_json(cls, data: dict) -> BenchmarkSpec:
        return cls(**data)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def grover_iterations(n: int) -> int:
    if n < 1:
        raise BenchmarkError("n must be positive")
    return int(math.floor(math.pi / 4 * math.sqrt(2**n) + 0.5))


def grover_marked_state(n: int) -> str:
    return format(min(42, 2**n - 1), f"0{n}b")


def qdrift_sample_count(lam: float, t: float, eps: float) -> int:
    if lam <= 0 or t <= 0 or eps <= 0:
        raise BenchmarkError("lambda, t and epsilon must be positive")
    x = (lam * t) ** 2 / (2 * eps)
    r = round(x)
    if abs(x - r) <= 1e-9 * max(1.0, abs(x)):
        return int(r)
    return int(math.ceil(x))


def sample_qdrift_terms(spec: HamiltonianSpec, N: int, seed: int) -> list[tuple[str, tuple[int, ...], float]]:
    """N i.i.d. terms drawn proportionally to |coefficient|; each evolves for lambda*t/N."""
    if N < 1:
        raise BenchmarkError("N must be at least 1")
    terms = spec.terms()
    weights = np.array([abs(c) for c, _, _ in terms])
    lam = weights.sum()
    rng = np.random.default_rng(seed)
    picks = rng.choice(len(terms), size=N, p=weights / lam)
    tau = lam * spec.t / N
    return [(terms[i][1], terms[i][2], math.copysign(tau, terms[i][0])) for i in picks]


def bv_secret(n: int, seed: int = 42) -> str:
    if n == 12:
        return BV_SECRET_N12
    bits = np.random.default_rng(seed).integers(0, 2, size=n)
    return "".join(str(int(b)) for b in bits)


def three_regular_edges(n: int, seed: int = 42, max_tries: int = 10_000) -> list[tuple[int, int]]:
    """Seeded configuration model; rejects self-loops and multi-edges."""
    if n < 4 or (3 * n) % 2:
        raise BenchmarkError(f"no 3-regular graph on {n} vertices")
    rng = np.random.default_rng(seed)
    stubs = np.repeat(np.arange(n), 3)
    for _ in range(max_tries):
        perm = rng.permutation(stubs)
        pairs = {tuple(sorted((int(a), int(b)))) for a, b in perm.reshape(-1, 2)}
        if len(pairs) == len(stubs) // 2 and all(a != b for a, b in pairs):
            return sorted(pairs)
    raise BenchmarkError("configuration model did not converge")


def _measure_all(n: int, gates: list[Gate], measured=None) -> Circuit:
    return Circuit(n, tuple(gates), tuple(range(n)) if measured is None else tuple(measured))


def _mcz(qubits) -> Gate:
    qubits = tuple(qubits)
    if len(qubits) == 1:
        return gate(GateKind.P, qubits[0], params=(math.pi,))
    if len(qubits) == 2:
        return gate(GateKind.CZ, *qubits)
    return Gate(GateKind.MCZ, qubits)


def ghz(n: int) -> Circuit:
    gates = [gate(GateKind.H, 0)] + [gate(GateKind.CX, i, i + 1) for i in range(n - 1)]
    return _measure_all(n, gates)


def grover(n: int) -> Circuit:
    if n < 2:
        raise BenchmarkError("grover needs n >= 2")
    marked = grover_marked_state(n)
    zeros = [i for i, b in enumerate(marked) if b == "0"]
    everyone = list(range(n))
    gates = [gate(GateKind.H, q) for q in everyone]
    for _ in range(grover_iterations(n)):
        gates += [gate(GateKind.X, q) for q in zeros]
        gates.append(_mcz(everyone))
        gates += [gate(GateKind.X, q) for q in zeros]
        gates += [gate(GateKind.H, q) for q in everyone]
        gates += [gate(GateKind.X, q) for q in everyone]
        gates.append(_mcz(everyone))
        gates += [gate(GateKind.X, q) for q in everyone]
        gates += [gate(GateKind.H, q) for q in everyone]
    return _measure_all(n, gates)


def bernstein_vazirani(n: int, seed: int = 42) -> Circuit:
    """n data qubits plus one shared target; the oracle is a CX star into the target."""
    secret = bv_secret(n, seed)
    target = n
    gates = [gate(GateKind.X, target)] + [gate(GateKind.H, q) for q in range(n + 1)]
    gates += [gate(GateKind.CX, i, target) for i, b in enumerate(secret) if b == "1"]
    gates += [gate(GateKind.H, q) for q in range(n)]
    return Circuit(n + 1, tuple(gates), tuple(range(n)))


def qft_gates(qubits, inverse: bool = False) -> list[Gate]:
    qs = list(qubits)
    n = len(qs)
    gates: list[Gate] = []
    for j in range(n):
        gates.append(gate(GateKind.H, qs[j]))
        for k in range(j + 1, n):
            gates.append(gate(GateKind.CP, qs[k], qs[j], params=(math.pi / 2 ** (k - j),)))
    for i in range(n // 2):
        gates.append(gate(GateKind.SWAP, qs[i], qs[n - 1 - i]))
    if inverse:
        inv = []
        for g in reversed(gates):
            inv.append(Gate(g.kind, g.qubits, tuple(-p for p in g.params)))
        return inv
    return gates


def qft(n: int) -> Circuit:
    """QFT applied to |+>^n, whose ideal output is the point mass on 0...0."""
    gates = [gate(GateKind.H, q) for q in range(n)] + qft_gates(range(n))
    return _measure_all(n, gates)


def _trotter_step(ham: HamiltonianSpec, dt: float, offset: int = 0) -> list[Gate]:
    gates = []
    for c, kind, qs in ham.terms():
        qs = tuple(q + offset for q in qs)
        if kind == "ZZ":
            gates.append(gate(GateKind.RZZ, *qs, params=(2 * c * dt,)))
    for c, kind, qs in ham.terms():
        if kind == "X":
            gates.append(gate(GateKind.RX, qs[0] + offset, params=(2 * c * dt,)))
    return gates


def trotter(spec: BenchmarkSpec) -> Circuit:
    if spec.trotter_steps < 1:
        raise BenchmarkError("trotter_steps must be positive")
    ham = spec.tfim()
    dt = ham.t / spec.trotter_steps
    gates = []
    for _ in range(spec.trotter_steps):
        gates += _trotter_step(ham, dt)
    return _measure_all(spec.n, gates)


def qdrift(spec: BenchmarkSpec) -> Circuit:
    ham = spec.tfim()
    lam = spec.qdrift_lambda if spec.qdrift_lambda is not None else ham.norm
    N = qdrift_sample_count(lam, ham.t, spec.qdrift_epsilon)
    gates = []
    for kind, qs, tau in sample_qdrift_terms(ham, N, spec.seed):
        if kind == "ZZ":
            gates.append(gate(GateKind.RZZ, *qs, params=(2 * tau,)))
        else:
            gates.append(gate(GateKind.RX, qs[0], params=(2 * tau,)))
    return _measure_all(spec.n, gates)


def _controlled_trotter(ham: HamiltonianSpec, dt: float, control: int, offset: int) -> list[Gate]:
    gates = []
    for c, kind, qs in ham.terms():
        if kind == "ZZ":
            a, b = qs[0] + offset, qs[1] + offset
            gates += [gate(GateKind.CX, a, b), gate(GateKind.CRZ, control, b, params=(2 * c * dt,)),
                      gate(GateKind.CX, a, b)]
    for c, kind, qs in ham.terms():
        if kind == "X":
            q = qs[0] + offset
            gates += [gate(GateKind.H, q), gate(GateKind.CRZ, control, q, params=(2 * c * dt,)),
                      gate(GateKind.H, q)]
    return gates


def qpe(spec: BenchmarkSpec) -> Circuit:
    """Phase estimation of the Trotterized TFIM propagator; ancillas first, system after."""
    if spec.n < 2:
        raise BenchmarkError("qpe needs n >= 2")
    n_anc = min(spec.qpe_ancilla, spec.n - 1)
    n_sys = spec.n - n_anc
    ham = spec.tfim(n_sys)
    dt = ham.t / spec.qpe_reps
    gates = [gate(GateKind.H, a) for a in range(n_anc)]
    for j in range(n_anc):
        control = n_anc - 1 - j
        for _ in range(2**j):
            for _ in range(spec.qpe_reps):
                gates += _controlled_trotter(ham, dt, control, n_anc)
    gates += qft_gates(range(n_anc), inverse=True)
    return Circuit(spec.n, tuple(gates), tuple(range(n_anc)))


def matching_layers(edges) -> list[list[tuple[int, int]]]:
    """Greedy split of an edge list into vertex-disjoint layers, preserving order within each."""
    remaining = list(edges)
    layers = []
    while remaining:
        busy: set[int] = set()
        layer, rest = [], []
        for a, b in remaining:
            if a in busy or b in busy:
                rest.append((a, b))
            else:
                layer.append((a, b))
                busy.update((a, b))
        layers.append(layer)
        remaining = rest
    return layers


def qaoa(spec: BenchmarkSpec) -> Circuit:
    """Cost layer applied matching by matching so commuting RZZ gates run in parallel."""
    ordered = [e for layer in matching_layers(three_regular_edges(spec.n, spec.seed)) for e in layer]
    gates = [gate(GateKind.H, q) for q in range(spec.n)]
    for _ in range(spec.qaoa_p):
        gates += [gate(GateKind.RZZ, a, b, params=(2 * spec.qaoa_gamma,)) for a, b in ordered]
        gates += [gate(GateKind.RX, q, params=(2 * spec.qaoa_beta,)) for q in range(spec.n)]
    return _measure_all(spec.n, gates)


def generate(spec: BenchmarkSpec) -> Circuit:
    alg = spec.algorithm
    if alg is Algorithm.GHZ:
        if spec.n < 2:
            raise BenchmarkError("ghz needs n >= 2")
        return ghz(spec.n)
    if alg is Algorithm.GROVER:
        return grover(spec.n)
    if alg is Algorithm.BV:
        return bernstein_vazirani(spec.n, spec.seed)
    if alg is Algorithm.QFT:
        return qft(spec.n)
    if alg is Algorithm.QPE:
        return qpe(spec)
    if alg is Algorithm.TROTTER:
        return trotter(spec)
    if alg is Algorithm.QDRIFT:
        return qdrift(spec)
    if alg is Algorithm.QAOA:
        return qaoa(spec)
    raise BenchmarkError(f"unsupported algorithm {alg}")


def expected_output(spec: BenchmarkSpec) -> str | None:
    """The single correct bitstring for search/oracle circuits, else None."""
    if spec.algorithm is Algorithm.GROVER:
        return grover_marked_state(spec.n)
    if spec.algorithm is Algorithm.BV:
        return bv_secret(spec.n, spec.seed)
    if spec.algorithm is Algorithm.QFT:
        return "0" * spec.n
    if spec.algorithm is Algorithm.GHZ:
        return None
    return None
