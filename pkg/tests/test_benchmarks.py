from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hbr.benchmarks import (
    Algorithm, BenchmarkError, BenchmarkSpec, HamiltonianSpec, bv_secret, expected_output, generate,
    grover_iterations, grover_marked_state, matching_layers, qdrift_sample_count, sample_qdrift_terms,
    three_regular_edges,
)
from hbr.circuit import GateKind, count_gates
from hbr.simulator import ideal_distribution


def test_grover_finds_marked_state():
    for n in (3, 4, 5):
        dist = ideal_distribution(generate(BenchmarkSpec(Algorithm.GROVER, n)))
        target = grover_marked_state(n)
        assert max(dist, key=dist.get) == target
        assert dist[target] > 0.9


def test_grover_marks_min_42():
    assert grover_marked_state(4) == "1111"
    assert grover_marked_state(10) == format(42, "010b")


def test_bv_recovers_secret():
    for n in (5, 12):
        spec = BenchmarkSpec(Algorithm.BV, n)
        dist = ideal_distribution(generate(spec))
        assert dist == pytest.approx({bv_secret(n): 1.0})
        assert expected_output(spec) == bv_secret(n)


def test_qft_maps_plus_state_to_zero():
    spec = BenchmarkSpec(Algorithm.QFT, 4)
    dist = ideal_distribution(generate(spec))
    assert dist == pytest.approx({"0000": 1.0})
    assert expected_output(spec) == "0000"


def test_ghz_distribution():
    dist = ideal_distribution(generate(BenchmarkSpec(Algorithm.GHZ, 5)))
    assert dist == pytest.approx({"00000": 0.5, "11111": 0.5})


def test_qdrift_count_rounding_and_errors():
    assert qdrift_sample_count(14, 1, 0.05) == 1960
    assert qdrift_sample_count(1, 1, 0.3) == 2  # 1.666.. rounds up
    with pytest.raises(BenchmarkError):
        qdrift_sample_count(0, 1, 0.05)


def test_qdrift_is_seed_deterministic():
    a = generate(BenchmarkSpec(Algorithm.QDRIFT, 6, seed=43))
    b = generate(BenchmarkSpec(Algorithm.QDRIFT, 6, seed=43))
    c = generate(BenchmarkSpec(Algorithm.QDRIFT, 6, seed=44))
    assert a == b and a != c


def test_qdrift_term_frequencies_follow_weights():
    ham = HamiltonianSpec(4)
    draws = sample_qdrift_terms(ham, 20000, 5)
    zz = sum(1 for k, _, _ in draws if k == "ZZ") / len(draws)
    assert zz == pytest.approx(3 / 5, abs=0.02)


def test_qpe_register_split():
    c = generate(BenchmarkSpec(Algorithm.QPE, 4))
    assert c.n_qubits == 4 and c.measured_qubits == (0, 1, 2)
    c10 = generate(BenchmarkSpec(Algorithm.QPE, 10))
    assert c10.measured_qubits == (0, 1, 2, 3)


def test_trotter_gate_budget():
    c = generate(BenchmarkSpec(Algorithm.TROTTER, 6, trotter_steps=4))
    k = count_gates(c)
    assert k.per_kind["rzz"] == 4 * 5 and k.per_kind["rx"] == 4 * 6


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([4, 6, 8, 10, 12, 20]), st.integers(0, 10_000))
def test_three_regular(n, seed):
    edges = three_regular_edges(n, seed)
    deg = np.bincount(np.array(edges).ravel(), minlength=n)
    assert len(edges) == 3 * n // 2 and set(deg) == {3}


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 9), st.integers(0, 9)).filter(lambda e: e[0] != e[1]),
                unique=True, max_size=30))
def test_matching_layers_partition(edges):
    layers = matching_layers(edges)
    assert sorted(e for layer in layers for e in layer) == sorted(edges)
    for layer in layers:
        used = [q for e in layer for q in e]
        assert len(used) == len(set(used))


def test_qaoa_needs_even_width():
    with pytest.raises(BenchmarkError):
        generate(BenchmarkSpec(Algorithm.QAOA, 7))
    c = generate(BenchmarkSpec(Algorithm.QAOA, 10, seed=42))
    assert count_gates(c).per_kind["rzz"] == 15


def test_grover_iteration_formula():
    for n in range(1, 15):
        assert grover_iterations(n) == round(math.pi / 4 * math.sqrt(2**n))


def test_spec_json_round_trip():
    spec = BenchmarkSpec(Algorithm.QDRIFT, 6, seed=44, qdrift_epsilon=0.1)
    assert BenchmarkSpec.from_json(spec.to_json()) == spec
    assert BenchmarkSpec("ghz", 3).algorithm is Algorithm.GHZ
