from __future__ import annotations

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hbr.benchmarks import Algorithm, BenchmarkSpec
from hbr.circuit import Circuit, GateKind, gate
from hbr.costing import CostingError, SnapshotStage, circuit_cxeq, cxeq_cost, snapshot, stage_delta, stage_deltas
from hbr.fidelity import Stage
from hbr.pipeline import run_pipeline
from hbr.synthesis import synthesize


@pytest.mark.parametrize("g, cost", [
    (gate(GateKind.CX, 0, 1), 1),
    (gate(GateKind.CZ, 0, 1), 1),
    (gate(GateKind.MS, 0, 1), 1),
    (gate(GateKind.SWAP, 0, 1), 3),
    (gate(GateKind.CP, 0, 1, params=(math.pi,)), 1),
    (gate(GateKind.CP, 0, 1, params=(0.4,)), 2),
    (gate(GateKind.CRZ, 0, 1, params=(0.4,)), 2),
    (gate(GateKind.RZZ, 0, 1, params=(0.7,)), 2),
    (gate(GateKind.RXX, 0, 1, params=(0.7,)), 2),
    (gate(GateKind.RYY, 0, 1, params=(0.7,)), 2),
    (gate(GateKind.H, 0), 0),
    (gate(GateKind.RZ, 0, params=(0.1,)), 0),
    (gate(GateKind.MCX, 0, 1, 2), 0),
])
def test_cxeq_table(g, cost):
    assert cxeq_cost(g) == cost


def test_empty_and_small_qft():
    assert circuit_cxeq(Circuit(3)) == 0
    qft4 = run_pipeline(BenchmarkSpec(Algorithm.QFT, 4))
    # 6 CP(pi/2^k) at 2 each plus 2 SWAPs at 3 each, before lowering
    assert circuit_cxeq(qft4.circuits[SnapshotStage.INPUT]) == 18


@settings(max_examples=60, deadline=None)
@given(st.lists(st.sampled_from([GateKind.CX, GateKind.SWAP, GateKind.RZZ, GateKind.H]), max_size=20),
       st.lists(st.sampled_from([GateKind.CZ, GateKind.CP, GateKind.SX]), max_size=20))
def test_cxeq_additive(kinds_a, kinds_b):
    def build(kinds):
        return tuple(gate(k, 0, 1, params=(0.3,)) if k.parameter_count and k.is_two_qubit
                     else gate(k, 0, 1) if k.is_two_qubit else gate(k, 0) for k in kinds)
    a, b = Circuit(2, build(kinds_a)), Circuit(2, build(kinds_b))
    assert circuit_cxeq(Circuit(2, a.gates + b.gates)) == circuit_cxeq(a) + circuit_cxeq(b)


def test_every_two_qubit_kind_has_a_rule():
    assert all(cxeq_cost(gate(k, 0, 1, params=(0.2,) * k.parameter_count)) > 0
               for k in GateKind if k.is_two_qubit)


def test_identical_snapshots_give_zero_delta():
    c = Circuit(2, (gate(GateKind.CZ, 0, 1), gate(GateKind.SX, 0)))
    a = snapshot(SnapshotStage.POST_B, c)
    b = snapshot(SnapshotStage.POST_R, c)
    d = stage_delta(a, b)
    assert (d.stage, d.d_n2q, d.d_n1q_phys) == (Stage.R, 0, 0)


def test_swaps_cost_three_native_gates():
    base = Circuit(2, (gate(GateKind.CZ, 0, 1),))
    routed = base.with_gates(base.gates + tuple(gate(GateKind.CZ, 0, 1) for _ in range(30)))
    d = stage_delta(snapshot(SnapshotStage.POST_B, base), snapshot(SnapshotStage.POST_R, routed, 10))
    assert d.d_n2q == 30


def test_negative_delta_when_b_cancels():
    h = Circuit(1, (gate(GateKind.H, 0), gate(GateKind.H, 0), gate(GateKind.X, 0)))
    b = Circuit(1, (gate(GateKind.X, 0),))
    d = stage_delta(snapshot(SnapshotStage.POST_H, h), snapshot(SnapshotStage.POST_B, b))
    assert d.d_n1q_phys == -2


def test_non_consecutive_rejected():
    c = Circuit(1)
    with pytest.raises(CostingError):
        stage_delta(snapshot(SnapshotStage.INPUT, c), snapshot(SnapshotStage.POST_B, c))


@pytest.mark.parametrize("alg, n", [("grover", 4), ("qft", 6), ("qaoa", 6), ("ghz", 5)])
def test_deltas_telescope_from_zero_input(alg, n):
    run = run_pipeline(BenchmarkSpec(Algorithm(alg), n))
    ds = stage_deltas(run.snapshots)
    final = run.snapshot(SnapshotStage.POST_R).counts
    assert sum(d.d_n2q for d in ds) == final.n_2q
    assert sum(d.d_n1q_phys for d in ds) == final.n_1q_phys


def test_h_stage_charged_for_everything_it_emits():
    c = Circuit(3, (gate(GateKind.MCZ, 0, 1, 2),))
    h = synthesize(c)
    d = stage_delta(snapshot(SnapshotStage.INPUT, c), snapshot(SnapshotStage.POST_H, h))
    assert d.d_n2q == 6
