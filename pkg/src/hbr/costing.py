"""CX-equivalent accounting and the stage snapshots/deltas fed to the fidelity engine."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .circuit import Circuit, DepthMetrics, Gate, GateCounts, GateKind, count_gates, depth_metrics
from .fidelity import Stage, StageDelta

_CXEQ = {
    GateKind.CX: 1, GateKind.CZ: 1, GateKind.MS: 1,
    GateKind.CP: 2, GateKind.CRZ: 2,
    GateKind.RXX: 2, GateKind.RYY: 2, GateKind.RZZ: 2,
    GateKind.SWAP: 3,
}


class CostingError(ValueError):
    pass


def cxeq_cost(g: Gate) -> int:
    if g.kind.is_two_qubit:
        if g.is_cz_equivalent:
            return 1
        try:
            return _CXEQ[g.kind]
        except KeyError:
            raise CostingError(f"no CXeq rule for {g.kind.value}") from None
    # 1Q, virtual, measure, barrier; MCX/MCZ cost materializes after synthesis
    return 0


def circuit_cxeq(c: Circuit) -> int:
    return sum(cxeq_cost(g) for g in c.gates)


class SnapshotStage(Enum):
    INPUT = "INPUT"
    POST_H = "POST_H"
    POST_B = "POST_B"
    POST_R = "POST_R"


_ORDER = list(SnapshotStage)
_DELTA_STAGE = {SnapshotStage.POST_H: Stage.H, SnapshotStage.POST_B: Stage.B, SnapshotStage.POST_R: Stage.R}


@dataclass(frozen=True)
class StageSnapshot:
    stage: SnapshotStage
    counts: GateCounts
    depth: DepthMetrics
    cxeq_total: int
    swap_count: int = 0

    def to_json(self) -> dict:
        return {
            "stage": self.stage.value,
            "n_2q": self.counts.n_2q,
            "n_1q_phys": self.counts.n_1q_phys,
            "n_1q_virtual": self.counts.n_1q_virtual,
            "n_multi": self.counts.n_multi,
            "n_measure": self.counts.n_measure,
            "per_kind": self.counts.per_kind,
            "d_tot": self.depth.d_tot,
            "d_2q": self.depth.d_2q,
            "d_1q": self.depth.d_1q,
            "cxeq_total": self.cxeq_total,
            "swap_count": self.swap_count,
        }


def snapshot(stage: SnapshotStage, c: Circuit, swap_count: int = 0) -> StageSnapshot:
    return StageSnapshot(stage, count_gates(c), depth_metrics(c), circuit_cxeq(c), swap_count)


def stage_delta(prev: StageSnapshot, nxt: StageSnapshot) -> StageDelta:
    """Gate-count change across one stage boundary.

    The INPUT snapshot is the abstract algorithm: none of its gates has been
    compiled yet, so the H stage is charged for everything it emits (the H-stage
    counting proxy) rather than for the difference against the input listing.
    """
    i = _ORDER.index(prev.stage)
    if i + 1 >= len(_ORDER) or _ORDER[i + 1] is not nxt.stage:
        raise CostingError(f"{prev.stage.value} -> {nxt.stage.value} are not consecutive stages")
    if prev.stage is SnapshotStage.INPUT:
        base_2q = base_1q = 0
    else:
        base_2q, base_1q = prev.counts.n_2q, prev.counts.n_1q_phys
    return StageDelta(_DELTA_STAGE[nxt.stage], nxt.counts.n_2q - base_2q, nxt.counts.n_1q_phys - base_1q)


def stage_deltas(snapshots) -> list[StageDelta]:
    return [stage_delta(a, b) for a, b in zip(snapshots, snapshots[1:])]
