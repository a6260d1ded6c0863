"""Coupling graphs: heavy-hex, all-to-all, custom; JSON I/O and calibration-based edge filtering."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from pathlib import Path

import networkx as nx
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path


class GraphKind(Enum):
    HEAVY_HEX = "heavy_hex"
    ALL_TO_ALL = "all_to_all"
    CUSTOM = "custom"


class TopologyError(ValueError):
    pass


@dataclass(frozen=True)
class CouplingGraph:
    n_physical: int
    edges: frozenset[tuple[int, int]]
    kind: GraphKind = GraphKind.CUSTOM

    def __post_init__(self) -> None:
        norm = set()
        for a, b in self.edges:
            if a == b or not (0 <= a < self.n_physical and 0 <= b < self.n_physical):
                raise TopologyError(f"bad edge ({a}, {b})")
            norm.add((min(a, b), max(a, b)))
        object.__setattr__(self, "edges", frozenset(norm))

    @cached_property
    def adjacency(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.n_physical)]
        for a, b in sorted(self.edges):
            adj[a].append(b)
            adj[b].append(a)
        return adj

    def has_edge(self, a: int, b: int) -> bool:
        if self.kind is GraphKind.ALL_TO_ALL:
            return a != b
        return (min(a, b), max(a, b)) in self.edges

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n_physical))
        g.add_edges_from(self.edges)
        return g

    def is_connected(self) -> bool:
        return self.n_physical > 0 and nx.is_connected(self.to_networkx())

    @cached_property
    def distance(self) -> np.ndarray:
        """All-pairs hop distance (int matrix); inf becomes a large sentinel."""
        if not self.edges:
            d = np.full((self.n_physical, self.n_physical), 10**6, dtype=np.int64)
            np.fill_diagonal(d, 0)
            return d
        rows, cols = zip(*self.edges)
        m = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(self.n_physical,) * 2)
        d = shortest_path(m, directed=False, unweighted=True)
        d[np.isinf(d)] = 10**6
        return d.astype(np.int64)

    def max_degree(self) -> int:
        return max((len(a) for a in self.adjacency), default=0)

    def to_json(self) -> dict:
        return {"n": self.n_physical, "edges": [list(e) for e in sorted(self.edges)], "kind": self.kind.value}

    @classmethod
    def from_json(cls, data: dict) -> CouplingGraph:
        return cls(int(data["n"]), frozenset(tuple(e) for e in data["edges"]), GraphKind(data.get("kind", "custom")))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json()) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> CouplingGraph:
        return cls.from_json(json.loads(Path(path).read_text()))


HEAVY_HEX_ROW = 16


def heavy_hex_graph(target_qubits: int = 156) -> CouplingGraph:
    """Heavy-hex lattice with rows of 16 qubits joined by 4 bridge qubits per gap.

    Eight rows give the 156-qubit, 176-edge Heron r2 layout. Bridges alternate
    between columns 3,7,11,15 and 1,5,9,13 so every cell is a heavy hexagon.
    """
    if target_qubits < 5:
        raise TopologyError("heavy-hex needs at least 5 qubits")
    rows = 1
    while HEAVY_HEX_ROW * rows + 4 * (rows - 1) < target_qubits:
        rows += 1
    edges = set()
    row_start = []
    nxt = 0
    bridges = []
    for r in range(rows):
        row_start.append(nxt)
        for c in range(HEAVY_HEX_ROW - 1):
            edges.add((nxt + c, nxt + c + 1))
        nxt += HEAVY_HEX_ROW
        if r < rows - 1:
            cols = (3, 7, 11, 15) if r % 2 == 0 else (1, 5, 9, 13)
            bridges.append([(nxt + i, c) for i, c in enumerate(cols)])
            nxt += 4
    for r, group in enumerate(bridges):
        for node, c in group:
            edges.add((row_start[r] + c, node))
            edges.add((node, row_start[r + 1] + c))
    return CouplingGraph(nxt, frozenset(edges), GraphKind.HEAVY_HEX)


def all_to_all_graph(n: int = 36) -> CouplingGraph:
    edges = frozenset((a, b) for a in range(n) for b in range(a + 1, n))
    return CouplingGraph(n, edges, GraphKind.ALL_TO_ALL)


def line_graph(n: int) -> CouplingGraph:
    return CouplingGraph(n, frozenset((i, i + 1) for i in range(n - 1)), GraphKind.CUSTOM)


def filter_edges(g: CouplingGraph, cal, threshold: float = 0.10) -> CouplingGraph:
    """Drop couplers whose calibrated 2Q error exceeds ``threshold``."""
    missing = [e for e in g.edges if e not in cal.per_edge_p2q]
    if missing and g.kind is not GraphKind.ALL_TO_ALL:
        raise TopologyError(f"calibration lacks {len(missing)} edge(s), e.g. {missing[0]}")
    kept = frozenset(e for e in g.edges if cal.p2q(*e) <= threshold)
    out = CouplingGraph(g.n_physical, kept, g.kind if kept == g.edges else GraphKind.CUSTOM)
    if not out.is_connected():
        raise TopologyError("edge filtering disconnects the coupling graph")
    return out


def chain_layout(g: CouplingGraph, n: int, prefix: tuple[int, ...] = ()) -> tuple[int, ...]:
    """Physical qubits forming a simple path of length ``n`` (for nearest-neighbour circuits).

    A non-empty ``prefix`` must itself be a path; the chain then starts with it.
    """
    if g.kind is GraphKind.ALL_TO_ALL and not prefix:
        return tuple(range(n))
    adj = g.adjacency
    if prefix:
        if len(set(prefix)) != len(prefix) or any(not g.has_edge(a, b) for a, b in zip(prefix, prefix[1:])):
            raise TopologyError(f"prefix {prefix} is not a simple path")
        starts = [None]
    else:
        # DFS from low-degree nodes; heavy-hex rows suffice for n <= 16+
        starts = sorted(range(g.n_physical), key=lambda q: (len(adj[q]), q))
    for s in starts:
        path = list(prefix) if s is None else [s]
        seen = set(path)
        found = _extend_path(adj, path, seen, n, budget=[20000])
        if found:
            return tuple(found)
    raise TopologyError(f"no simple path of length {n}")


def _extend_path(adj, path, seen, n, budget):
    if len(path) == n:
        return list(path)
    budget[0] -= 1
    if budget[0] < 0:
        return None
    for nb in adj[path[-1]]:
        if nb not in seen:
            path.append(nb)
            seen.add(nb)
            res = _extend_path(adj, path, seen, n, budget)
            if res:
                return res
            path.pop()
            seen.discard(nb)
    return None


def graph_diameter(g: CouplingGraph) -> int:
    d = g.distance
    return int(d[d < 10**6].max()) if d.size else 0


def ceil_fraction(fraction: float, total: int) -> int:
    return int(math.ceil(fraction * total - 1e-9))
