"""H -> B -> R pipeline with a metered snapshot at every stage boundary."""
from __future__ import annotations

from dataclasses import dataclass, field, replace

from .benchmarks import BenchmarkSpec, generate
from .circuit import Circuit
from .costing import SnapshotStage, StageSnapshot, snapshot, stage_deltas
from .fidelity import FidelityBreakdown, ModelConfig, total_fidelity
from .noise import IBM_HERON, IONQ_FORTE, CalibrationModel
from .routing import RouterAlgorithm, RouterConfig, RoutingReport, route
from .synthesis import McxStrategy, SynthesisPolicy, synthesize
from .topology import CouplingGraph, all_to_all_graph, heavy_hex_graph
from .translate import NativeGateSet, translate


class PipelineError(RuntimeError):
    """A stage failed; ``stage`` names which one."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"{stage} stage failed: {cause}")
        self.stage = stage
        self.cause = cause


def default_graph(basis: NativeGateSet) -> CouplingGraph:
    return heavy_hex_graph(156) if basis is NativeGateSet.IBM_HERON else all_to_all_graph(36)


def default_calibration(basis: NativeGateSet) -> CalibrationModel:
    return CalibrationModel.uniform(IBM_HERON if basis is NativeGateSet.IBM_HERON else IONQ_FORTE)


@dataclass(frozen=True)
class Variant:
    """One compiler configuration; plays the part of an SDK in comparisons."""

    name: str
    policy: SynthesisPolicy = field(default_factory=SynthesisPolicy)
    router: RouterConfig = field(default_factory=RouterConfig)

    def with_seed(self, seed: int) -> Variant:
        return replace(self, router=replace(self.router, seed=seed))

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "mcx_strategy": self.policy.mcx_strategy.value,
            "local_cleanup": self.policy.local_cleanup,
            "router": self.router.algorithm.value,
            "router_seed": self.router.seed,
            "lookahead_window": self.router.lookahead_window,
            "post_route_cleanup": self.router.post_route_cleanup,
        }

    @classmethod
    def from_json(cls, d: dict) -> Variant:
        policy = SynthesisPolicy(McxStrategy(d.get("mcx_strategy", "compact")),
                                 local_cleanup=bool(d.get("local_cleanup", False)))
        router = RouterConfig(RouterAlgorithm(d.get("router", "stochastic")), int(d.get("router_seed", 16)),
                              int(d.get("lookahead_window", 20)), bool(d.get("post_route_cleanup", False)))
        return cls(d["name"], policy, router)


@dataclass(frozen=True)
class PipelineRun:
    circuits: dict[SnapshotStage, Circuit]
    snapshots: tuple[StageSnapshot, ...]
    report: RoutingReport
    basis: NativeGateSet
    graph: CouplingGraph

    @property
    def routed(self) -> Circuit:
        return self.circuits[SnapshotStage.POST_R]

    def snapshot(self, stage: SnapshotStage) -> StageSnapshot:
        return next(s for s in self.snapshots if s.stage is stage)

    def breakdown(self, cal: CalibrationModel | None = None, cfg: ModelConfig | None = None) -> FidelityBreakdown:
        cal = cal or default_calibration(self.basis)
        return total_fidelity(stage_deltas(self.snapshots), self.routed, cfg or ModelConfig.attribution(), cal,
                              n_qubits=self.circuits[SnapshotStage.INPUT].n_qubits)


def compile_circuit(c: Circuit, policy: SynthesisPolicy, basis: NativeGateSet,
                    graph: CouplingGraph, router: RouterConfig) -> PipelineRun:
    circuits = {SnapshotStage.INPUT: c}
    try:
        circuits[SnapshotStage.POST_H] = synthesize(c, policy)
    except Exception as exc:
        raise PipelineError("H", exc) from exc
    try:
        circuits[SnapshotStage.POST_B] = translate(circuits[SnapshotStage.POST_H], basis)
    except Exception as exc:
        raise PipelineError("B", exc) from exc
    try:
        routed, report = route(circuits[SnapshotStage.POST_B], graph, router, basis)
    except Exception as exc:
        raise PipelineError("R", exc) from exc
    circuits[SnapshotStage.POST_R] = routed
    snaps = tuple(
        snapshot(stage, circ, report.swap_count if stage is SnapshotStage.POST_R else 0)
        for stage, circ in circuits.items()
    )
    return PipelineRun(circuits, snaps, report, basis, graph)


def run_pipeline(spec: BenchmarkSpec, policy: SynthesisPolicy | None = None,
                 basis: NativeGateSet = NativeGateSet.IBM_HERON, graph: CouplingGraph | None = None,
                 cfg: RouterConfig | None = None) -> PipelineRun:
    """Generate ``spec`` and compile it; snapshots come back INPUT, POST_H, POST_B, POST_R."""
    return compile_circuit(generate(spec), policy or SynthesisPolicy(), basis,
                           graph or default_graph(basis), cfg or RouterConfig())
