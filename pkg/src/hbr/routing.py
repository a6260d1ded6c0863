"""R stage: map logical qubits onto a coupling graph and insert SWAPs.

Two routers share one front-layer engine:

STOCHASTIC_LOOKAHEAD
    SABRE-style. A seeded random layout over a compact region of the device is
    refined by one forward-backward pass; SWAPs are scored by front-layer
    distance plus a weighted lookahead window, multiplied by a decay factor;
    score ties are broken with the seeded RNG.
DETERMINISTIC_GREEDY
    graph-placement-style. The interaction graph is embedded into the device
    by bounded backtracking when possible, otherwise placed greedily; SWAP
    scoring is the same but ties go to the lowest edge, so the result never
    depends on the seed.

Inserted SWAPs are emitted already decomposed into three native 2Q gates.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .circuit import Circuit, Gate, GateKind, gate
from .synthesis import cancel_inverse_pairs
from .topology import CouplingGraph, GraphKind
from .translate import NativeGateSet, translate

EXTENDED_SET_WEIGHT = 0.5
DECAY_RATE = 0.001
DECAY_RESET = 5
EMBED_BUDGET = 200_000


class RoutingError(ValueError):
    pass


class RouterAlgorithm(Enum):
    STOCHASTIC_LOOKAHEAD = "stochastic"
    DETERMINISTIC_GREEDY = "deterministic"


@dataclass(frozen=True)
class RouterConfig:
    algorithm: RouterAlgorithm = RouterAlgorithm.STOCHASTIC_LOOKAHEAD
    seed: int = 16
    lookahead_window: int = 20
    post_route_cleanup: bool = False
    initial_layout: tuple[int, ...] | None = None
    layout_trials: int = 8

    def __post_init__(self) -> None:
        if self.lookahead_window < 0:
            raise RoutingError("lookahead_window must be >= 0")
        if self.layout_trials < 1:
            raise RoutingError("layout_trials must be >= 1")


@dataclass(frozen=True)
class RoutingReport:
    swap_count: int
    initial_layout: tuple[int, ...]
    final_layout: tuple[int, ...]
    algorithm: RouterAlgorithm
    seed: int | None

    def to_json(self) -> dict:
        return {
            "swap_count": self.swap_count,
            "initial_layout": list(self.initial_layout),
            "final_layout": list(self.final_layout),
            "algorithm": self.algorithm.value,
            "seed": self.seed,
        }


def _swap_template(basis: NativeGateSet | None) -> tuple[Gate, ...]:
    """SWAP on qubits (0, 1) in the target gate set."""
    swap = Circuit(2, (gate(GateKind.SWAP, 0, 1),))
    if basis is None:
        return tuple(gate(GateKind.CX, a, b) for a, b in ((0, 1), (1, 0), (0, 1)))
    return translate(swap, basis).gates


class _Engine:
    """Front-layer router over a fixed gate list; one instance per pass."""

    def __init__(self, gates, graph: CouplingGraph, lookahead: int, rng):
        self.gates = gates
        self.graph = graph
        self.dist = graph.distance
        self.adj = graph.adjacency
        self.lookahead = lookahead
        self.rng = rng
        n = len(gates)
        self.succ: list[list[int]] = [[] for _ in range(n)]
        self.npred = [0] * n
        last: dict[int, int] = {}
        for i, g in enumerate(gates):
            preds = {last[q] for q in g.qubits if q in last}
            for p in preds:
                self.succ[p].append(i)
            self.npred[i] = len(preds)
            for q in g.qubits:
                last[q] = i

    def run(self, l2p: list[int], emit: bool, template=()):
        """Route from layout ``l2p`` (logical -> physical, full permutation)."""
        l2p = list(l2p)
        p2l = [0] * len(l2p)
        for lq, pq in enumerate(l2p):
            p2l[pq] = lq
        npred = list(self.npred)
        front = [i for i, k in enumerate(npred) if k == 0]
        out: list[Gate] = []
        swaps = 0
        decay = np.ones(len(l2p))
        since_progress = 0
        since_reset = 0
        stall_limit = 10 * max(int(self.dist[self.dist < 10**6].max()), 1)
        gates, dist = self.gates, self.dist

        def executable(i: int) -> bool:
            g = gates[i]
            if not g.kind.is_two_qubit:
                return True
            return self.graph.has_edge(l2p[g.qubits[0]], l2p[g.qubits[1]])

        def do_swap(pa: int, pb: int) -> None:
            nonlocal swaps
            la, lb = p2l[pa], p2l[pb]
            p2l[pa], p2l[pb] = lb, la
            l2p[la], l2p[lb] = pb, pa
            swaps += 1
            if emit:
                for t in template:
                    out.append(Gate(t.kind, tuple(pa if q == 0 else pb for q in t.qubits), t.params))

        while front:
            ready = [i for i in front if executable(i)]
            if ready:
                done = set(ready)
                front = [i for i in front if i not in done]
                for i in ready:
                    g = gates[i]
                    if emit:
                        out.append(Gate(g.kind, tuple(l2p[q] for q in g.qubits), g.params))
                    for s in self.succ[i]:
                        npred[s] -= 1
                        if npred[s] == 0:
                            front.append(s)
                decay[:] = 1.0
                since_progress = since_reset = 0
                continue
            if since_progress > stall_limit:
                # release valve: walk the closest blocked gate together along a shortest path
                i = min(front, key=lambda j: (dist[l2p[gates[j].qubits[0]], l2p[gates[j].qubits[1]]], j))
                a, b = gates[i].qubits
                while not self.graph.has_edge(l2p[a], l2p[b]):
                    pa = l2p[a]
                    nxt = min(self.adj[pa], key=lambda x: (dist[x, l2p[b]], x))
                    do_swap(pa, nxt)
                since_progress = 0
                continue
            pa, pb = self._choose_swap(front, npred, l2p, decay)
            do_swap(pa, pb)
            decay[pa] += DECAY_RATE
            decay[pb] += DECAY_RATE
            since_progress += 1
            since_reset += 1
            if since_reset >= DECAY_RESET:
                decay[:] = 1.0
                since_reset = 0
        return out, swaps, l2p

    def _extended(self, front, npred) -> list[int]:
        ext: list[int] = []
        if not self.lookahead:
            return ext
        seen = set(front)
        queue = list(front)
        while queue and len(ext) < self.lookahead:
            nxt = []
            for i in queue:
                for s in self.succ[i]:
                    if s in seen:
                        continue
                    seen.add(s)
                    nxt.append(s)
                    if self.gates[s].kind.is_two_qubit:
                        ext.append(s)
                        if len(ext) >= self.lookahead:
                            return ext
            queue = nxt
        return ext

    def _choose_swap(self, front, npred, l2p, decay) -> tuple[int, int]:
        gates, dist = self.gates, self.dist
        ext = self._extended(front, npred)
        front_pairs = [(l2p[gates[i].qubits[0]], l2p[gates[i].qubits[1]]) for i in front]
        ext_pairs = [(l2p[gates[i].qubits[0]], l2p[gates[i].qubits[1]]) for i in ext]
        candidates = set()
        for a, b in front_pairs:
            for p in (a, b):
                for nb in self.adj[p]:
                    candidates.add((min(p, nb), max(p, nb)))
        best: list[tuple[int, int]] = []
        best_score = float("inf")
        for pa, pb in sorted(candidates):
            def moved(x: int) -> int:
                return pb if x == pa else pa if x == pb else x

            f = sum(dist[moved(a), moved(b)] for a, b in front_pairs) / len(front_pairs)
            e = (sum(dist[moved(a), moved(b)] for a, b in ext_pairs) / len(ext_pairs)) if ext_pairs else 0.0
            score = max(decay[pa], decay[pb]) * (f + EXTENDED_SET_WEIGHT * e)
            if score < best_score - 1e-12:
                best_score, best = score, [(pa, pb)]
            elif abs(score - best_score) <= 1e-12:
                best.append((pa, pb))
        if self.rng is None or len(best) == 1:
            return best[0]
        return best[int(self.rng.integers(len(best)))]


def _critical_path(gates) -> int:
    """ASAP depth over time-occupying gates (virtual rotations are free)."""
    level: dict[int, int] = {}
    depth = 0
    for g in gates:
        if g.kind.is_virtual or g.kind is GateKind.BARRIER:
            continue
        d = 1 + max((level.get(q, 0) for q in g.qubits), default=0)
        for q in g.qubits:
            level[q] = d
        depth = max(depth, d)
    return depth


def _refine(engine: _Engine, back: _Engine, layout: list[int]) -> list[int]:
    """One forward-backward pass: route forward, then route the reversed circuit back."""
    _, _, after = engine.run(layout, emit=False)
    _, _, before = back.run(after, emit=False)
    return before


def _full_permutation(partial: tuple[int, ...], n_physical: int) -> list[int]:
    used = set(partial)
    if len(used) != len(partial) or any(not 0 <= p < n_physical for p in partial):
        raise RoutingError(f"invalid initial layout {partial}")
    return list(partial) + [p for p in range(n_physical) if p not in used]


def _random_region_layout(n: int, graph: CouplingGraph, rng, walk: bool = False) -> list[int]:
    """Random connected region of ``n`` physical qubits, randomly assigned.

    ``walk=False`` grows a blob from a random seed node; ``walk=True`` follows a
    random self-avoiding walk (falling back to blob growth when it gets stuck)
    and keeps walk order, which suits chain-like interaction patterns.
    """
    start = int(rng.integers(graph.n_physical))
    region = [start]
    seen = {start}
    while len(region) < n:
        if walk:
            nb = [x for x in graph.adjacency[region[-1]] if x not in seen]
            if not nb:
                walk = False
                continue
        else:
            nb = [x for p in region for x in graph.adjacency[p] if x not in seen]
            if not nb:
                raise RoutingError("graph region too small for the circuit")
        pick = nb[int(rng.integers(len(nb)))]
        seen.add(pick)
        region.append(pick)
    if walk:
        return region
    perm = rng.permutation(n)
    return [region[int(k)] for k in perm]


def _interaction_edges(c: Circuit) -> list[tuple[int, int]]:
    """Interacting logical pairs in order of first use."""
    seen: dict[tuple[int, int], None] = {}
    for g in c.gates:
        if g.kind.is_two_qubit:
            a, b = g.qubits
            seen.setdefault((min(a, b), max(a, b)), None)
    return list(seen)


def embed_interactions(c: Circuit, graph: CouplingGraph, budget: int = EMBED_BUDGET) -> tuple[int, ...] | None:
    """Subgraph-monomorphism placement by bounded backtracking; None if not found."""
    pairs = _interaction_edges(c)
    n = c.n_qubits
    nbrs: list[set[int]] = [set() for _ in range(n)]
    for a, b in pairs:
        nbrs[a].add(b)
        nbrs[b].add(a)
    if max((len(s) for s in nbrs), default=0) > graph.max_degree():
        return None
    order: list[int] = []
    placed = set()
    for root in sorted(range(n), key=lambda q: (-len(nbrs[q]), q)):
        if root in placed:
            continue
        queue = [root]
        placed.add(root)
        while queue:
            q = queue.pop(0)
            order.append(q)
            for x in sorted(nbrs[q], key=lambda v: (-len(nbrs[v]), v)):
                if x not in placed:
                    placed.add(x)
                    queue.append(x)
    adj = graph.adjacency
    degree = [len(a) for a in adj]
    mapping: dict[int, int] = {}
    used: set[int] = set()
    steps = [0]

    def candidates(q: int):
        anchors = [mapping[x] for x in nbrs[q] if x in mapping]
        if anchors:
            pool = [p for p in adj[anchors[0]] if p not in used]
        else:
            pool = [p for p in range(graph.n_physical) if p not in used]
        return [p for p in pool if degree[p] >= len(nbrs[q]) and all(graph.has_edge(p, a) for a in anchors)]

    def place(k: int) -> bool:
        if k == len(order):
            return True
        q = order[k]
        for p in candidates(q):
            steps[0] += 1
            if steps[0] > budget:
                return False
            mapping[q] = p
            used.add(p)
            if place(k + 1):
                return True
            del mapping[q]
            used.discard(p)
        return False

    if place(0):
        return tuple(mapping[q] for q in range(n))
    return None


def greedy_layout(c: Circuit, graph: CouplingGraph) -> tuple[int, ...]:
    """Place qubits in first-use order next to their already-placed partners."""
    n = c.n_qubits
    dist = graph.distance
    weight: dict[tuple[int, int], int] = {}
    for g in c.gates:
        if g.kind.is_two_qubit:
            a, b = sorted(g.qubits)
            weight[(a, b)] = weight.get((a, b), 0) + 1
    order: list[int] = []
    for a, b in _interaction_edges(c):
        for q in (a, b):
            if q not in order:
                order.append(q)
    order += [q for q in range(n) if q not in order]
    finite = np.where(dist < 10**6, dist, 0)
    centre = int(np.argmin(finite.max(axis=1) * graph.n_physical - np.array([len(a) for a in graph.adjacency])))
    layout: dict[int, int] = {}
    free = set(range(graph.n_physical))
    for q in order:
        if not layout:
            p = centre
        else:
            partners = [(layout[x], weight.get((min(q, x), max(q, x)), 0)) for x in layout]
            linked = [(p, w) for p, w in partners if w]
            ref = linked or [(p, 1) for p, _ in partners]
            p = min(free, key=lambda f: (sum(w * dist[f, r] for r, w in ref), f))
        layout[q] = p
        free.discard(p)
    return tuple(layout[q] for q in range(n))


def route(c: Circuit, graph: CouplingGraph, cfg: RouterConfig | None = None,
          basis: NativeGateSet | None = None) -> tuple[Circuit, RoutingReport]:
    """Route ``c`` onto ``graph``; returns the physical circuit and a report.

    The routed circuit is ``graph.n_physical`` wide; ``measured_qubits`` are
    mapped through the final layout so measured bitstrings keep their order.
    """
    cfg = cfg or RouterConfig()
    if c.n_qubits > graph.n_physical:
        raise RoutingError(f"circuit needs {c.n_qubits} qubits, device has {graph.n_physical}")
    if not graph.is_connected():
        raise RoutingError("coupling graph is disconnected")
    if any(g.kind.is_multi_controlled for g in c.gates):
        raise RoutingError("routing needs a synthesized circuit (no MCX/MCZ)")
    stochastic = cfg.algorithm is RouterAlgorithm.STOCHASTIC_LOOKAHEAD
    seed = cfg.seed if stochastic else None

    if graph.kind is GraphKind.ALL_TO_ALL:
        layout = tuple(range(c.n_qubits)) if cfg.initial_layout is None else tuple(cfg.initial_layout)
        full = _full_permutation(layout, graph.n_physical)
        gates = tuple(Gate(g.kind, tuple(full[q] for q in g.qubits), g.params) for g in c.gates)
        routed = Circuit(graph.n_physical, gates, tuple(full[q] for q in c.measured_qubits))
        return routed, RoutingReport(0, layout, layout, cfg.algorithm, seed)

    rng = np.random.default_rng(cfg.seed) if stochastic else None
    template = _swap_template(basis)
    engine = _Engine(c.gates, graph, cfg.lookahead_window, rng)
    back = _Engine(tuple(reversed(c.gates)), graph, cfg.lookahead_window, rng)
    if cfg.initial_layout is not None:
        start = _full_permutation(tuple(cfg.initial_layout), graph.n_physical)
    elif stochastic:
        # independent seeded trials, each one forward-backward refinement; fewest SWAPs wins
        best = None
        for k in range(cfg.layout_trials):
            region = _random_region_layout(c.n_qubits, graph, rng, walk=k % 2 == 1)
            trial = _full_permutation(tuple(region), graph.n_physical)
            trial = _refine(engine, back, trial)
            out, swaps, _ = engine.run(trial, emit=True, template=template)
            cost = (_critical_path(out), swaps)
            if best is None or cost < best[0]:
                best = (cost, trial)
        start = best[1]
    else:
        placed = _full_permutation(embed_interactions(c, graph) or greedy_layout(c, graph), graph.n_physical)
        refined = _refine(engine, back, placed)
        start = min((placed, refined), key=lambda lay: engine.run(lay, emit=False)[1])

    gates, swaps, final = engine.run(start, emit=True, template=template)
    routed = Circuit(graph.n_physical, tuple(gates), tuple(final[q] for q in c.measured_qubits))
    if cfg.post_route_cleanup:
        routed = cancel_inverse_pairs(routed)
    report = RoutingReport(swaps, tuple(start[: c.n_qubits]), tuple(final[: c.n_qubits]), cfg.algorithm, seed)
    return routed, report


def logical_view(routed: Circuit, report: RoutingReport) -> tuple[Circuit, tuple[int, ...]]:
    """Compact a routed circuit onto the physical qubits it touches.

    Returns the compacted circuit and, for each logical qubit, the index in the
    compacted circuit holding it at the end.
    """
    touched = sorted({q for g in routed.gates for q in g.qubits} | set(report.initial_layout)
                     | set(report.final_layout))
    index = {p: i for i, p in enumerate(touched)}
    gates = tuple(Gate(g.kind, tuple(index[q] for q in g.qubits), g.params) for g in routed.gates)
    compact = Circuit(len(touched), gates, tuple(index[q] for q in routed.measured_qubits))
    return compact, tuple(index[p] for p in report.final_layout)
