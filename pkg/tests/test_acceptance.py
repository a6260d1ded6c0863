"""Acceptance gate: one test per criterion, each at its stated tolerance.

Every test records a PASS/FAIL line that is printed in the terminal summary.
"""
from __future__ import annotations

import math
from dataclasses import replace

import numpy as np
from conftest import equal_up_to_phase, record
from hbr.analysis import (
    amplification_factor, cliff_sweep, measure_run, pearson_r, perturb_calibration, rank_agreement,
    seed_sweep, sensitivity,
)
from hbr.benchmarks import (
    Algorithm, BenchmarkSpec, bv_secret, generate, grover_iterations, qdrift_sample_count,
)
from hbr.circuit import Circuit, GateKind, count_gates, depth_metrics, gate
from hbr.costing import SnapshotStage
from hbr.fidelity import (
    FidelityBreakdown, Stage, StageDelta, phase_fidelity, readout_penalty, t2_penalty, timing,
)
from hbr.noise import IBM_HERON, IONQ_FORTE, CalibrationModel, NoiseParams, heterogeneous_calibration
from hbr.pipeline import Variant, compile_circuit, default_graph, run_pipeline
from hbr.routing import RouterAlgorithm, RouterConfig, logical_view
from hbr.simulator import statevector
from hbr.synthesis import McxStrategy, SynthesisPolicy
from hbr.topology import chain_layout, heavy_hex_graph
from hbr.translate import NativeGateSet

IBM, IONQ = NativeGateSet.IBM_HERON, NativeGateSet.IONQ_FORTE
SEEDS_25 = tuple(range(16, 65, 2))
DETERMINISTIC = RouterConfig(RouterAlgorithm.DETERMINISTIC_GREEDY)


# --------------------------------------------------------------- criterion 1

def test_criterion_1_structural_golden_values():
    checks = {}
    ghz = generate(BenchmarkSpec(Algorithm.GHZ, 8))
    checks["ghz8 2Q=7"] = count_gates(ghz).n_2q == 7
    bv = generate(BenchmarkSpec(Algorithm.BV, 12))
    checks["bv12 secret"] = bv_secret(12) == "110010100110"
    checks["bv12 CX=6"] = count_gates(bv).per_kind.get("cx") == 6
    qaoa = generate(BenchmarkSpec(Algorithm.QAOA, 10, seed=42))
    checks["qaoa10 RZZ=15"] = count_gates(qaoa).per_kind.get("rzz") == 15
    qft = run_pipeline(BenchmarkSpec(Algorithm.QFT, 10))
    checks["qft10 post-B cxeq=105"] = qft.snapshot(SnapshotStage.POST_B).cxeq_total == 105
    checks["grover k(10)=25"] = grover_iterations(10) == 25
    checks["grover k(4)=3"] = grover_iterations(4) == 3
    checks["qdrift N=1960"] = qdrift_sample_count(14, 1, 0.05) == 1960
    ok = all(checks.values())
    record(1, ok, "; ".join(k for k, v in checks.items() if not v) or "all golden values exact")
    assert ok, checks


# --------------------------------------------------------------- criterion 2

def _published(h, b, r):
    return FidelityBreakdown(h, b, r, 0.0, 0.0)


# (algorithm, sdk, backend): (dF_H, dF_B, dF_R, H%, B%, R%) as printed
PUBLISHED = {
    ("grover", "tket", "ibm"): (-31.9, -3.9, -50.2, 37.1, 4.5, 58.4),
    ("grover", "tket", "ionq"): (-40.6, 1.4, 0.0, 96.7, 3.3, 0.0),
    ("grover", "qiskit", "ibm"): (-33.4, -4.2, -55.6, 35.8, 4.5, 59.7),
    ("grover", "qiskit", "ionq"): (-41.5, 0.2, 0.0, 99.4, 0.6, 0.0),
    ("grover", "pennylane", "ibm"): (-57.0, -16.4, -88.7, 35.1, 10.1, 54.7),
    ("grover", "pennylane", "ionq"): (-71.8, 0.0, 0.0, 100.0, 0.0, 0.0),
    ("qpe", "tket", "ibm"): (-13.8, -2.0, -12.5, 48.7, 7.2, 44.1),
    ("qpe", "tket", "ionq"): (-17.6, 0.5, 0.0, 97.4, 2.6, 0.0),
    ("qpe", "qiskit", "ibm"): (-13.5, -2.7, -18.2, 39.1, 7.9, 52.9),
    ("qpe", "qiskit", "ionq"): (-17.0, -0.8, 0.0, 95.6, 4.4, 0.0),
    ("qpe", "pennylane", "ibm"): (-15.5, -4.2, -24.3, 35.3, 9.6, 55.1),
    ("qpe", "pennylane", "ionq"): (-19.8, 0.0, 0.0, 100.0, 0.0, 0.0),
    ("qdrift", "tket", "ibm"): (-2.2, -0.4, 0.0, 84.2, 15.8, 0.0),
    ("qdrift", "tket", "ionq"): (-2.8, 0.0, 0.0, 98.6, 1.4, 0.0),
    ("qdrift", "qiskit", "ibm"): (-3.4, -0.7, 0.0, 81.8, 18.2, 0.0),
    ("qdrift", "qiskit", "ionq"): (-4.4, 0.0, 0.0, 100.0, 0.0, 0.0),
    ("qdrift", "pennylane", "ibm"): (-2.6, -0.7, 0.0, 79.8, 20.2, 0.0),
    ("qdrift", "pennylane", "ionq"): (-3.3, 0.0, 0.0, 99.6, 0.4, 0.0),
}
# The combined H+B and H+B+R columns are printed separately and are what the ratio is built from.
PUBLISHED_HB = {
    ("grover", "qiskit", "ibm"): -37.6, ("grover", "pennylane", "ibm"): -73.4,
    ("qpe", "tket", "ibm"): -15.9, ("qpe", "pennylane", "ibm"): -19.8,
    ("qdrift", "tket", "ibm"): -2.6, ("qdrift", "qiskit", "ibm"): -4.1,
}
RHO_PAIRS = {
    "grover": (("grover", "pennylane", "ibm"), ("grover", "qiskit", "ibm"), 1.92),
    "qpe": (("qpe", "pennylane", "ibm"), ("qpe", "tket", "ibm"), 4.01),
    "qdrift": (("qdrift", "qiskit", "ibm"), ("qdrift", "tket", "ibm"), 1.00),
}


def _row_breakdown(key):
    h, b, r, *_ = PUBLISHED[key]
    hb = PUBLISHED_HB.get(key, h + b)
    # keep the printed H+B total; B absorbs the rounding of the printed components
    return _published(h, hb - h, r)


def test_criterion_2_formula_regression():
    lines, ok = [], True
    for name, (weak, strong, expected) in RHO_PAIRS.items():
        a, b = _row_breakdown(weak), _row_breakdown(strong)
        amp = amplification_factor(a, b)
        independent = abs((a.df_hb + a.df_r) - (b.df_hb + b.df_r)) / abs(a.df_hb - b.df_hb)
        formula_ok = abs(amp.rho - independent) <= 1e-9
        value_ok = abs(round(amp.rho, 2) - expected) <= 1e-9
        ok &= formula_ok and value_ok
        lines.append(f"rho[{name}]={amp.rho:.4f} (printed {expected:.2f}){'' if value_ok else ' MISMATCH'}")
    worst = []
    for key, (h, b, r, ph, pb, pr) in PUBLISHED.items():
        bd = _published(h, b, r)
        err = max(abs(bd.pct_h - ph), abs(bd.pct_b - pb), abs(bd.pct_r - pr))
        if err > 0.15:
            worst.append(f"{'/'.join(key)}:{err:.2f}")
    ok &= not worst
    lines.append("pct rows within 0.15" if not worst else "pct rows off: " + ", ".join(worst))
    record(2, ok, "; ".join(lines))
    assert ok, lines


# --------------------------------------------------------------- criterion 3

def test_criterion_3_model_consistency(rng):
    failures = []
    for _ in range(200):
        p = NoiseParams(p_2q=float(rng.uniform(1e-4, 0.05)), p_1q=float(rng.uniform(1e-5, 5e-3)),
                        p_ro=float(rng.uniform(1e-3, 0.05)), tau_2q=68e-9, tau_1q=32e-9, t2=79e-6)
        deltas = [StageDelta(s, int(rng.integers(-50, 500)), int(rng.integers(-50, 500))) for s in Stage]
        n_meas = int(rng.integers(1, 20))
        idle = float(rng.uniform(0, 1e-4))
        log_form = sum(phase_fidelity(d, p) for d in deltas) + readout_penalty(n_meas, p.p_ro) \
            - idle / p.t2 * math.log10(math.e)
        n2 = sum(d.d_n2q for d in deltas)
        n1 = sum(d.d_n1q_phys for d in deltas)
        linear = (1 - p.p_2q) ** n2 * (1 - p.p_1q) ** n1 * (1 - p.p_ro) ** n_meas * math.exp(-idle / p.t2)
        if abs(log_form - math.log10(linear)) > 1e-9 * max(1.0, abs(log_form)):
            failures.append("log-additivity")
            break
        # linearity of the per-stage term in its counts
        d1, d2 = deltas[0], deltas[1]
        joint = StageDelta(Stage.H, d1.d_n2q + d2.d_n2q, d1.d_n1q_phys + d2.d_n1q_phys)
        if abs(phase_fidelity(joint, p) - phase_fidelity(d1, p) - phase_fidelity(d2, p)) > 1e-9:
            failures.append("stage linearity")
            break
        bd = FidelityBreakdown(*(phase_fidelity(d, p) for d in deltas), 0.0, 0.0)
        if bd.pct_h + bd.pct_b + bd.pct_r and abs(bd.pct_h + bd.pct_b + bd.pct_r - 100) > 1e-9:
            failures.append("percentages")
            break
    busy = Circuit(2, tuple(gate(GateKind.CZ, 0, 1) for _ in range(9)), (0, 1))
    t = timing(count_gates(busy), depth_metrics(busy), 2, IBM_HERON)
    if t.t_idle != 0 or t2_penalty(t, IBM_HERON.t2) != 0:
        failures.append("t_idle on busy single edge")
    record(3, not failures, "; ".join(failures) or "log/linear agree to 1e-9 on 200 draws; busy edge idle 0")
    assert not failures


# --------------------------------------------------------------- criterion 4

def test_criterion_4_pipeline_contracts():
    failures = []
    for alg, n in (("grover", 5), ("qft", 8), ("ghz", 8), ("qaoa", 8)):
        run = run_pipeline(BenchmarkSpec(Algorithm(alg), n), basis=IONQ)
        b = run.breakdown()
        if run.report.swap_count or b.df_r != 0 or b.pct_r != 0:
            failures.append(f"all-to-all {alg}")
    hh = heavy_hex_graph(156)
    for alg in ("qdrift", "trotter"):
        for n in (4, 8, 12):
            cfg = RouterConfig(RouterAlgorithm.STOCHASTIC_LOOKAHEAD, initial_layout=chain_layout(hh, n))
            run = run_pipeline(BenchmarkSpec(Algorithm(alg), n), graph=hh, cfg=cfg)
            if run.report.swap_count:
                failures.append(f"chain {alg} n={n}: {run.report.swap_count} swaps")
    spec = BenchmarkSpec(Algorithm.QFT, 8)
    stats, _ = seed_sweep(spec, [Variant("det", router=DETERMINISTIC)], SEEDS_25, IBM)
    if stats.sigma["det"] != 0.0:
        failures.append(f"deterministic sigma {stats.sigma['det']}")
    a = run_pipeline(spec, cfg=RouterConfig(seed=30))
    b = run_pipeline(spec, cfg=RouterConfig(seed=30))
    if a.routed != b.routed or a.report != b.report:
        failures.append("stochastic router not reproducible")
    record(4, not failures, "; ".join(failures) or "0 SWAPs all-to-all and on chains; sigma_det=0; seeded replay equal")
    assert not failures


# --------------------------------------------------------------- criterion 5

SEMANTIC_CASES = (("ghz", 6), ("grover", 4), ("bv", 6), ("qft", 5), ("qpe", 4),
                  ("trotter", 4), ("qdrift", 4), ("qaoa", 6))


def _routed_matches(run, reference: np.ndarray) -> bool:
    compact, final = logical_view(run.routed, run.report)
    psi = statevector(replace(compact, measured_qubits=()), max_qubits=20)
    rest = [q for q in range(compact.n_qubits) if q not in final]
    tensor = np.transpose(psi.reshape((2,) * compact.n_qubits), list(final) + rest)
    logical = tensor[(Ellipsis,) + (0,) * len(rest)] if rest else tensor
    return abs(np.linalg.norm(logical) - 1) < 1e-8 and equal_up_to_phase(logical, reference)


def test_criterion_5_semantic_preservation():
    failures = []
    for basis in (IBM, IONQ):
        for alg, n in SEMANTIC_CASES:
            spec = BenchmarkSpec(Algorithm(alg), n)
            for router in (RouterConfig(), DETERMINISTIC):
                run = run_pipeline(spec, basis=basis, cfg=router)
                src = run.circuits[SnapshotStage.INPUT]
                ref = statevector(replace(src, measured_qubits=()))
                post_b = statevector(replace(run.circuits[SnapshotStage.POST_B], measured_qubits=()))
                if not equal_up_to_phase(post_b, ref):
                    failures.append(f"{alg}/{basis.value} post-B")
                if not _routed_matches(run, ref):
                    failures.append(f"{alg}/{basis.value} post-R {router.algorithm.value}")
    record(5, not failures, "; ".join(failures) or "POST_B and POST_R match INPUT for 8 benchmarks, both bases")
    assert not failures, failures


# --------------------------------------------------------------- criterion 6

def test_criterion_6_cliff_projections():
    v = Variant("compact-stochastic")
    lines, ok = [], True
    grover = cliff_sweep(BenchmarkSpec(Algorithm.GROVER, 3), v, range(3, 7), IBM)
    ok &= grover.first_crossing == 5
    lines.append(f"grover first crossing {grover.first_crossing}")
    for alg in ("ghz", "bv", "qaoa"):
        res = cliff_sweep(BenchmarkSpec(Algorithm(alg), 4), v, range(4, 21), IBM)
        evaluated = [p.n for p in res.points if p.total is not None]
        ok &= res.first_crossing is None and 20 in evaluated
        worst = min(p.total for p in res.points if p.total is not None)
        lines.append(f"{alg} crossing {res.first_crossing} (min {worst:.2f})")
    qft = cliff_sweep(BenchmarkSpec(Algorithm.QFT, 6), v, range(6, 15), IBM)
    ok &= qft.first_crossing is not None and 9 <= qft.first_crossing <= 13
    lines.append(f"qft first crossing {qft.first_crossing}")
    record(6, ok, "; ".join(lines))
    assert ok, lines


# --------------------------------------------------------------- criterion 7

VALIDATION_SIZES = (("grover", 4), ("qft", 4), ("qpe", 4), ("qdrift", 4),
                    ("bv", 12), ("qaoa", 8), ("ghz", 8), ("trotter", 4))
VALIDATION_VARIANTS = (
    Variant("compact-stochastic"),
    Variant("recursive-stochastic", SynthesisPolicy(McxStrategy.RECURSIVE)),
    Variant("compact-deterministic", router=DETERMINISTIC),
)
SHOTS = 8192
SAMPLER_SEED = 11


def _validation_calibration(basis, graph):
    if basis is IBM:
        return heterogeneous_calibration(graph, IBM_HERON)
    return CalibrationModel.uniform(IONQ_FORTE)


def test_criterion_7_rank_validation():
    lines, ok = [], True
    grover = BenchmarkSpec(Algorithm.GROVER, 4)
    n2q = {v.name: count_gates(compile_circuit(generate(grover), v.policy, IONQ, default_graph(IONQ),
                                               v.router).routed).n_2q for v in VALIDATION_VARIANTS[:2]}
    strict = n2q["compact-stochastic"] < n2q["recursive-stochastic"]
    ok &= strict
    lines.append(f"grover4 all-to-all N2Q {n2q['compact-stochastic']} < {n2q['recursive-stochastic']}: {strict}")
    rs = []
    for alg, n in VALIDATION_SIZES:
        spec = BenchmarkSpec(Algorithm(alg), n)
        circuit = generate(spec)
        xs, ys = [], []
        for basis in (IBM, IONQ):
            graph = default_graph(basis)
            cal = _validation_calibration(basis, graph)
            pred, meas = {}, {}
            for v in VALIDATION_VARIANTS:
                run = compile_circuit(circuit, v.policy, basis, graph, v.router)
                m = measure_run(run, spec, cal, SHOTS, SAMPLER_SEED)
                pred[v.name], meas[v.name] = m.f_pred, (m.value, m.sigma)
                xs.append(m.f_pred)
                ys.append(m.value)
            verdict = rank_agreement(pred, meas)
            if not verdict.agree:
                ok = False
                lines.append(f"{alg}/{basis.value} disagree")
        r = pearson_r(xs, ys)
        rs.append(r)
        if r < 0.9:
            ok = False
            lines.append(f"{alg} r={r:.3f} < 0.9")
    lines.append("16/16 cells agree" if not any("disagree" in x for x in lines) else "rank disagreement")
    lines.append(f"mean within-circuit r={np.mean(rs):.3f}")
    record(7, ok, "; ".join(lines))
    assert ok, lines


# --------------------------------------------------------------- criterion 8

def test_criterion_8_sensitivity():
    graph = heavy_hex_graph(156)
    cal = heterogeneous_calibration(graph, IBM_HERON)
    perturbed, edges = perturb_calibration(cal, 0.10, 0.20, graph.edges)
    off_graph = replace(graph, edges=frozenset(graph.edges - edges))
    circuit = generate(BenchmarkSpec(Algorithm.GHZ, 8))
    cells = []
    layouts = {"off": chain_layout(off_graph, 8)}
    for i, (a, b) in enumerate(sorted(edges)[:4]):
        layouts[f"on{i}"] = chain_layout(graph, 8, (a, b))
    for name, layout in layouts.items():
        run = compile_circuit(circuit, SynthesisPolicy(), IBM, graph,
                              RouterConfig(RouterAlgorithm.DETERMINISTIC_GREEDY, initial_layout=layout))
        cells.append(sensitivity(name, run.routed, cal, perturbed, edges))
    failures = []
    for c in cells:
        if not c.touches_perturbed and c.f_after != c.f_before:
            failures.append(f"{c.variant} off-edge changed by {c.delta}")
        if c.touches_perturbed and not c.f_after < c.f_before:
            failures.append(f"{c.variant} crossing did not degrade")
    if cells[0].touches_perturbed or not all(c.touches_perturbed for c in cells[1:]):
        failures.append("layout construction did not separate on/off edges")
    deltas = ", ".join(f"{c.variant}:{c.delta:+.2e}" for c in cells)
    record(8, not failures, "; ".join(failures) or f"{len(edges)} edges perturbed; dF_pred {deltas}")
    assert not failures
