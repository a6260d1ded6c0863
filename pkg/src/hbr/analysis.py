"""Result surfaces built on pipeline runs: attribution tables, routing amplification,
cliff sweeps, seed variance, calibration sensitivity and rank agreement."""
from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass, field, replace
from itertools import combinations
from pathlib import Path
from typing import Callable, Iterable, Mapping

import numpy as np

from .benchmarks import Algorithm, BenchmarkSpec
from .circuit import Circuit
from .costing import StageSnapshot
from .fidelity import FidelityBreakdown
from .noise import CalibrationModel
from .simulator import Counts

COMPARABILITY_DECADES = 0.5
BOUNDARY_SENSITIVE = frozenset({Algorithm.QDRIFT, Algorithm.TROTTER})


class AnalysisError(ValueError):
    pass


@dataclass(frozen=True)
class VariantResult:
    variant_id: str
    breakdown: FidelityBreakdown
    snapshots: tuple[StageSnapshot, ...] = ()
    f_pred: float | None = None
    measured: float | None = None
    measured_sigma: float | None = None


# ---------------------------------------------------------------- attribution

ATTRIBUTION_COLUMNS = ("variant", "df_h", "df_b", "df_hb", "df_r", "pct_h", "pct_b", "pct_r", "boundary_flag")


@dataclass(frozen=True)
class AttributionRow:
    variant: str
    df_h: float
    df_b: float
    df_hb: float
    df_r: float
    pct_h: float
    pct_b: float
    pct_r: float
    boundary_flag: bool

    def as_dict(self) -> dict:
        return {c: getattr(self, c) for c in ATTRIBUTION_COLUMNS}


def attribution_table(results: Iterable[VariantResult], algorithm: Algorithm | None = None) -> list[AttributionRow]:
    """One row per variant in the usual column order. QDRIFT/Trotter rows carry the
    boundary flag: their H/B split depends on where a compiler draws that line."""
    flag = algorithm in BOUNDARY_SENSITIVE
    rows = []
    for r in results:
        b = r.breakdown
        rows.append(AttributionRow(r.variant_id, b.df_h, b.df_b, b.df_hb, b.df_r, b.pct_h, b.pct_b, b.pct_r, flag))
    return rows


# -------------------------------------------------------------- amplification

@dataclass(frozen=True)
class Amplification:
    rho: float | None
    gap_hb: float
    gap_hbr: float

    @property
    def defined(self) -> bool:
        return self.rho is not None


def _breakdown(x) -> FidelityBreakdown:
    return x.breakdown if isinstance(x, VariantResult) else x


def amplification_factor(a, b) -> Amplification:
    """rho = |gap after routing| / |gap before routing| for two variants.

    Accepts VariantResult or FidelityBreakdown. A zero pre-routing gap gives
    ``rho=None`` rather than an exception.
    """
    fa, fb = _breakdown(a), _breakdown(b)
    gap_hb = abs(fa.df_hb - fb.df_hb)
    gap_hbr = abs(fa.df_hbr - fb.df_hbr)
    if gap_hb <= 1e-12:
        return Amplification(None, gap_hb, gap_hbr)
    return Amplification(gap_hbr / gap_hb, gap_hb, gap_hbr)


# ---------------------------------------------------------------------- cliff

@dataclass(frozen=True)
class CliffPoint:
    n: int
    total: float | None
    status: str = "ok"  # ok | error: ... | timeout | skipped


@dataclass(frozen=True)
class CliffResult:
    points: tuple[CliffPoint, ...]
    threshold: float
    first_crossing: int | None

    @property
    def gaps(self) -> list[int]:
        return [p.n for p in self.points if p.total is None]

    def to_json(self) -> dict:
        return {
            "threshold": self.threshold,
            "first_crossing": self.first_crossing,
            "gaps": self.gaps,
            "points": [{"n": p.n, "total": p.total, "status": p.status} for p in self.points],
        }


def cliff_projection(evaluate: Callable[[int], float], n_range: Iterable[int], threshold: float = -1.0,
                     time_budget: float = 300.0, stop_at_crossing: bool = False) -> CliffResult:
    """Sweep ``evaluate(n)`` (total decades at width n) and find the first n below ``threshold``.

    Failing widths become gap markers. A width that overruns ``time_budget``
    seconds is marked ``timeout`` and every larger width ``skipped``: cost only
    grows with n.
    """
    points: list[CliffPoint] = []
    first = None
    exhausted = False
    for n in n_range:
        if exhausted:
            points.append(CliffPoint(n, None, "skipped"))
            continue
        t0 = time.monotonic()
        try:
            total = float(evaluate(n))
        except Exception as exc:  # generator/pipeline failure at this width
            points.append(CliffPoint(n, None, f"error: {exc}"))
            continue
        if time.monotonic() - t0 > time_budget:
            points.append(CliffPoint(n, None, "timeout"))
            exhausted = True
            continue
        points.append(CliffPoint(n, total))
        if first is None and total < threshold:
            first = n
            if stop_at_crossing:
                exhausted = True
    return CliffResult(tuple(points), threshold, first)


# --------------------------------------------------------------- seed variance

def is_significant(gap: float, sigma: float) -> bool:
    return gap > COMPARABILITY_DECADES and gap > 2 * sigma


@dataclass(frozen=True)
class SeedStats:
    seeds: tuple[int, ...]
    mean: dict[str, float]
    sigma: dict[str, float]
    winner: str | None
    gap: float
    significant: bool

    def to_json(self) -> dict:
        return {"seeds": list(self.seeds), "mean": self.mean, "sigma": self.sigma,
                "winner": self.winner if self.winner is not None else "tie",
                "gap": self.gap, "significant": self.significant}


def seed_variance(samples: Mapping[str, Mapping[int, float]]) -> SeedStats:
    """Summarize H+B+R decades per variant over router seeds.

    ``samples[variant][seed]`` is the H+B+R total of that variant at that seed.
    The winner is the best mean; the gap to the runner-up is significant when it
    clears 0.5 decades and twice the combined seed sigma. With a single variant
    there is no comparison and no winner.
    """
    if not samples:
        raise AnalysisError("no variants")
    seeds = sorted({s for per in samples.values() for s in per})
    if len(seeds) < 2:
        raise AnalysisError("seed variance needs at least two seeds")
    mean, sigma = {}, {}
    for name in sorted(samples):
        vals = np.array([samples[name][s] for s in sorted(samples[name])], dtype=float)
        if np.all(vals == vals[0]):
            # a seed-independent router must report sigma = 0 exactly, not rounding noise
            mean[name], sigma[name] = float(vals[0]), 0.0
        else:
            mean[name] = float(vals.mean())
            sigma[name] = float(vals.std(ddof=1))
    ranked = sorted(mean, key=lambda k: (-mean[k], k))
    if len(ranked) < 2:
        return SeedStats(tuple(seeds), mean, sigma, None, 0.0, False)
    best, second = ranked[0], ranked[1]
    gap = mean[best] - mean[second]
    combined = math.hypot(sigma[best], sigma[second])
    sig = is_significant(gap, combined)
    return SeedStats(tuple(seeds), mean, sigma, best if sig else None, gap, sig)


# ------------------------------------------------------------- sensitivity

def perturb_calibration(cal: CalibrationModel, worst_fraction: float, factor: float,
                        edges: Iterable[tuple[int, int]] | None = None) -> tuple[CalibrationModel, frozenset]:
    """Raise the error of the worst ``ceil(fraction * |E|)`` edges by ``factor`` (relative).

    ``edges`` supplies the coupling map when the calibration only stores medians.
    Ties in error rate are broken by edge index so the selection is stable.
    Returns the new calibration and the set of perturbed edges.
    """
    if not 0 < worst_fraction <= 1:
        raise AnalysisError("worst_fraction must lie in (0, 1]")
    if factor < 0:
        raise AnalysisError("factor must be non-negative")
    table = dict(cal.per_edge_p2q)
    for e in edges or ():
        e = (min(e), max(e))
        table.setdefault(e, cal.p2q(*e))
    if not table:
        raise AnalysisError("calibration has no edges to perturb")
    k = math.ceil(worst_fraction * len(table) - 1e-9)
    worst = sorted(table, key=lambda e: (-table[e], e))[:k]
    for e in worst:
        table[e] = min(table[e] * (1 + factor), 1.0)
    return replace(cal, per_edge_p2q=table), frozenset(worst)


# --------------------------------------------------------- measured metrics

def success_probability(counts: Counts, target: str) -> float:
    widths = {len(k) for k in counts.counts}
    if widths and widths != {len(target)}:
        raise AnalysisError(f"target width {len(target)} does not match counts width {widths}")
    return counts.counts.get(target, 0) / counts.shots


def binomial_sigma(p: float, shots: int) -> float:
    return math.sqrt(max(p * (1 - p), 0.0) / shots)


def hellinger_fidelity(p: Mapping[str, float], q: Mapping[str, float], tol: float = 1e-6) -> float:
    for name, dist in (("p", p), ("q", q)):
        total = sum(dist.values())
        if abs(total - 1.0) > tol or any(v < 0 for v in dist.values()):
            raise AnalysisError(f"{name} is not a normalized distribution (sum {total})")
    overlap = sum(math.sqrt(p[k] * q[k]) for k in p.keys() & q.keys())
    return min(overlap, 1.0) ** 2


def bootstrap_hellinger_sigma(counts: Counts, reference: Mapping[str, float], resamples: int = 200,
                              seed: int = 0) -> float:
    """Std of the Hellinger fidelity over multinomial resamples of ``counts``."""
    keys = sorted(counts.counts)
    probs = np.array([counts.counts[k] for k in keys], dtype=float) / counts.shots
    rng = np.random.default_rng(seed)
    vals = []
    for _ in range(resamples):
        draw = rng.multinomial(counts.shots, probs)
        dist = {k: c / counts.shots for k, c in zip(keys, draw) if c}
        vals.append(hellinger_fidelity(dist, reference))
    return float(np.std(vals, ddof=1))


# ------------------------------------------------------------ rank agreement

@dataclass(frozen=True)
class RankRuleConfig:
    epsilon_pred: float = 0.01
    measured_tie_sigmas: float = 2.0

    def __post_init__(self) -> None:
        if self.epsilon_pred <= 0 or self.measured_tie_sigmas <= 0:
            raise AnalysisError("tie thresholds must be positive")


@dataclass(frozen=True)
class PairVerdict:
    a: str
    b: str
    predicted: int  # +1: a above b, -1: below, 0: tie
    measured: int

    @property
    def consistent(self) -> bool:
        return self.predicted == 0 or self.measured == 0 or self.predicted == self.measured


@dataclass(frozen=True)
class RankVerdict:
    agree: bool
    pairs: tuple[PairVerdict, ...] = field(default_factory=tuple)

    @property
    def label(self) -> str:
        return "agree" if self.agree else "disagree"


def _sign(x: float) -> int:
    return (x > 0) - (x < 0)


def rank_agreement(predicted: Mapping[str, float], measured: Mapping[str, tuple[float, float]],
                   rule: RankRuleConfig | None = None) -> RankVerdict:
    """Compare the weak orderings induced by predictions and measurements.

    Two variants tie on the predicted side when their F_pred differ by at most
    epsilon, on the measured side when their values differ by at most
    ``measured_tie_sigmas`` combined standard deviations. The orderings agree
    unless some pair is strictly ordered one way predicted and the other way measured.
    """
    rule = rule or RankRuleConfig()
    if set(predicted) != set(measured):
        raise AnalysisError("predicted and measured variant sets differ")
    pairs = []
    for a, b in combinations(sorted(predicted), 2):
        dp = predicted[a] - predicted[b]
        pr = 0 if abs(dp) <= rule.epsilon_pred else _sign(dp)
        (va, sa), (vb, sb) = measured[a], measured[b]
        dm = va - vb
        ms = 0 if abs(dm) <= rule.measured_tie_sigmas * math.hypot(sa, sb) else _sign(dm)
        pairs.append(PairVerdict(a, b, pr, ms))
    return RankVerdict(all(p.consistent for p in pairs), tuple(pairs))


def pearson_r(xs, ys) -> float:
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.size < 2:
        raise AnalysisError("pearson_r needs two equal-length samples of size >= 2")
    dx, dy = x - x.mean(), y - y.mean()
    sx, sy = math.sqrt(float(dx @ dx)), math.sqrt(float(dy @ dy))
    if sx == 0 or sy == 0:
        raise AnalysisError("pearson_r is undefined for a constant sample")
    return float(max(-1.0, min(1.0, (dx @ dy) / (sx * sy))))


# -------------------------------------------------------------------- output

def _cell(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if v is None:
        return ""
    return str(v)


def to_csv(rows: Iterable[Mapping], columns: Iterable[str]) -> str:
    cols = list(columns)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_cell(r.get(c)) for c in cols])
    return buf.getvalue()


def write_csv(path: str | Path, rows: Iterable[Mapping], columns: Iterable[str]) -> None:
    Path(path).write_text(to_csv(rows, columns))


def write_json(path: str | Path, data) -> None:
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def waterfall(breakdown: FidelityBreakdown) -> list[dict]:
    """Cumulative decades after each term, in H, B, R, readout, T2 order."""
    rows, acc = [], 0.0
    for term, value in (("H", breakdown.df_h), ("B", breakdown.df_b), ("R", breakdown.df_r),
                        ("readout", breakdown.df_readout), ("T2", breakdown.df_t2)):
        acc += value
        rows.append({"term": term, "delta": value, "cumulative": acc})
    return rows


def spec_label(spec: BenchmarkSpec) -> str:
    return f"{spec.algorithm.value}-n{spec.n}"


# ------------------------------------------------------- pipeline-level sweeps

def cliff_sweep(spec: BenchmarkSpec, variant, n_range: Iterable[int], basis=None, graph=None,
                cal: CalibrationModel | None = None, threshold: float = -1.0,
                time_budget: float = 300.0) -> CliffResult:
    """:func:`cliff_projection` of total log10 F (stages, readout and idle T2) for ``spec`` under ``variant``."""
    from .pipeline import compile_circuit, default_graph
    from .benchmarks import generate
    from .translate import NativeGateSet

    basis = basis or NativeGateSet.IBM_HERON
    graph = graph or default_graph(basis)

    def evaluate(n: int) -> float:
        run = compile_circuit(generate(spec.with_n(n)), variant.policy, basis, graph, variant.router)
        return run.breakdown(cal).total

    return cliff_projection(evaluate, n_range, threshold, time_budget)


def seed_sweep(spec: BenchmarkSpec, variants, seeds: Iterable[int], basis=None, graph=None,
               cal: CalibrationModel | None = None) -> tuple[SeedStats, dict[str, dict[int, float]]]:
    """Compile ``spec`` once per (variant, router seed) and summarize with :func:`seed_variance`."""
    from .pipeline import compile_circuit, default_graph
    from .benchmarks import generate
    from .translate import NativeGateSet

    basis = basis or NativeGateSet.IBM_HERON
    graph = graph or default_graph(basis)
    circuit = generate(spec)
    samples: dict[str, dict[int, float]] = {}
    for v in sorted(variants, key=lambda v: v.name):
        per = samples.setdefault(v.name, {})
        for s in sorted(seeds):
            vs = v.with_seed(s)
            per[s] = compile_circuit(circuit, vs.policy, basis, graph, vs.router).breakdown(cal).df_hbr
    return seed_variance(samples), samples


# ------------------------------------------------------------------ validation

@dataclass(frozen=True)
class Measurement:
    f_pred: float
    value: float
    sigma: float
    metric: str  # "success" or "hellinger"


def measure_run(run, spec: BenchmarkSpec, cal: CalibrationModel, shots: int = 8192, seed: int = 0,
                counts: Counts | None = None) -> Measurement:
    """Per-edge prediction and a measured metric for one compiled run.

    Circuits with a single correct answer use success probability with a
    binomial sigma; the rest use Hellinger fidelity against the ideal output of
    the uncompiled circuit with a bootstrap sigma. ``counts`` replaces the
    internal sampler when supplied.
    """
    from .benchmarks import expected_output
    from .costing import SnapshotStage
    from .fidelity import ModelConfig, per_edge_prediction
    from .simulator import ideal_distribution, noisy_sample

    routed = run.routed
    f_pred = per_edge_prediction(routed, cal, ModelConfig.validation())
    if counts is None:
        counts = noisy_sample(routed, cal, shots, seed)
    target = expected_output(spec)
    if target is not None:
        p = success_probability(counts, target)
        return Measurement(f_pred, p, binomial_sigma(p, counts.shots), "success")
    ideal = ideal_distribution(run.circuits[SnapshotStage.INPUT])
    h = hellinger_fidelity(counts.probabilities(), ideal)
    return Measurement(f_pred, h, bootstrap_hellinger_sigma(counts, ideal, seed=seed), "hellinger")


@dataclass(frozen=True)
class SensitivityCell:
    variant: str
    f_before: float
    f_after: float
    touches_perturbed: bool

    @property
    def delta(self) -> float:
        return self.f_after - self.f_before


def used_edges(c: Circuit) -> frozenset[tuple[int, int]]:
    return frozenset((min(g.qubits), max(g.qubits)) for g in c.gates if g.kind.is_two_qubit)


def sensitivity(name: str, routed: Circuit, cal: CalibrationModel, perturbed: CalibrationModel,
                edges: frozenset) -> SensitivityCell:
    """Per-edge F_pred of one routed circuit before and after a calibration perturbation."""
    from .fidelity import ModelConfig, per_edge_prediction

    cfg = ModelConfig.validation()
    return SensitivityCell(name, per_edge_prediction(routed, cal, cfg), per_edge_prediction(routed, perturbed, cfg),
                           bool(used_edges(routed) & edges))
