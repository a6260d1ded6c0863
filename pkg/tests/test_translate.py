from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import unitary_group

from conftest import equal_up_to_phase, unitary
from hbr.circuit import Circuit, GateKind, gate
from hbr.translate import NativeGateSet, TranslationError, euler_native, translate, zyz_angles

BASES = list(NativeGateSet)
TWO_Q = [k for k in GateKind if k.is_two_qubit]


def _matrix(gates, n=1):
    return unitary(Circuit(n, tuple(gates)))


@pytest.mark.parametrize("basis", BASES)
def test_euler_reproduces_random_unitaries(basis):
    for k in range(25):
        u = unitary_group.rvs(2, random_state=k)
        seq = euler_native(u, 0, basis)
        assert {g.kind for g in seq} <= basis.members
        assert equal_up_to_phase(_matrix(seq), u)


@pytest.mark.parametrize("basis", BASES)
@pytest.mark.parametrize("kind, params", [
    (GateKind.H, ()), (GateKind.X, ()), (GateKind.SX, ()),
    (GateKind.RZ, (0.0,)), (GateKind.RX, (math.pi,)), (GateKind.RY, (math.pi / 2,)),
    (GateKind.RY, (-math.pi,)), (GateKind.P, (1e-12,)),
])
def test_euler_edge_angles(basis, kind, params):
    g = gate(kind, 0, params=params)
    u = _matrix([g])
    assert equal_up_to_phase(_matrix(euler_native(u, 0, basis)), u)


def test_identity_lowers_to_nothing():
    assert euler_native(np.eye(2), 0, NativeGateSet.IBM_HERON) == []


def test_zyz_angles_of_hadamard():
    theta, _, _ = zyz_angles(_matrix([gate(GateKind.H, 0)]))
    assert theta == pytest.approx(math.pi / 2)


@pytest.mark.parametrize("basis", BASES)
@pytest.mark.parametrize("kind", TWO_Q)
def test_every_two_qubit_kind_lowers_exactly(basis, kind):
    g = gate(kind, 0, 1, params=(0.37,) * kind.parameter_count)
    c = Circuit(2, (gate(GateKind.H, 0), g, gate(GateKind.RY, 1, params=(0.2,))))
    out = translate(c, basis)
    assert {g.kind for g in out.gates} <= basis.members
    assert equal_up_to_phase(unitary(out), unitary(c))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.sampled_from(TWO_Q), st.booleans(), st.floats(-3, 3)), max_size=6),
       st.sampled_from(BASES))
def test_translation_preserves_unitary(ops, basis):
    gates = []
    for kind, flip, angle in ops:
        qs = (1, 0) if flip else (0, 1)
        gates.append(gate(kind, *qs, params=(angle,) * kind.parameter_count))
        gates.append(gate(GateKind.RX, qs[0], params=(angle / 2,)))
    c = Circuit(2, tuple(gates))
    assert equal_up_to_phase(unitary(translate(c, basis)), unitary(c))


def test_cz_family_is_native_on_heron():
    c = Circuit(2, (gate(GateKind.CP, 0, 1, params=(math.pi,)),))
    assert [g.kind for g in translate(c, NativeGateSet.IBM_HERON).gates] == [GateKind.CZ]


def test_fusion_leaves_one_run_per_qubit():
    c = Circuit(1, tuple(gate(GateKind.RX, 0, params=(0.1 * k,)) for k in range(1, 8)))
    out = translate(c, NativeGateSet.IONQ_FORTE)
    assert sum(g.kind in (GateKind.RX, GateKind.RY) for g in out.gates) == 1


def test_multi_controlled_gates_are_rejected():
    with pytest.raises(TranslationError):
        translate(Circuit(3, (gate(GateKind.MCX, 0, 1, 2),)), NativeGateSet.IBM_HERON)


def test_basis_parse():
    assert NativeGateSet.parse("IBM_HERON") is NativeGateSet.IBM_HERON
    with pytest.raises(TranslationError):
        NativeGateSet.parse("rigetti")
