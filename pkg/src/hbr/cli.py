"""Command-line front end. Every command writes ``manifest.json`` into its output
directory; ``hbr replay manifest.json`` re-runs it and reproduces the outputs."""
from __future__ import annotations

import json
import sys
from dataclasses import asdict, dataclass
from itertools import product
from pathlib import Path

import click

from . import analysis as an
from .benchmarks import Algorithm, BenchmarkSpec, generate
from .fidelity import Mode, ModelConfig
from .noise import PROFILES, CalibrationModel, heterogeneous_calibration, resolve_profile
from .pipeline import PipelineError, Variant, compile_circuit, default_graph
from .qasm import emit_qasm
from .routing import RouterAlgorithm, RouterConfig
from .simulator import Counts
from .synthesis import McxStrategy, SynthesisPolicy
from .translate import NativeGateSet

HETEROGENEOUS = "heterogeneous"


@dataclass(frozen=True)
class RunManifest:
    command: str
    spec: dict
    variants: tuple[dict, ...]
    basis: str
    profile: str
    mode: str = "attribution"
    seeds: tuple[int, ...] = ()
    shots: int = 8192
    sampler_seed: int = 0
    threshold: float = -1.0
    n_range: tuple[int, ...] = ()
    worst_fraction: float = 0.10
    factor: float = 0.20
    time_budget: float = 300.0
    counts_path: str | None = None
    out: str = "out"

    def to_json(self) -> dict:
        d = asdict(self)
        for k in ("variants", "seeds", "n_range"):
            d[k] = list(d[k])
        return d

    @classmethod
    def from_json(cls, d: dict) -> RunManifest:
        d = dict(d)
        for k in ("variants", "seeds", "n_range"):
            d[k] = tuple(d.get(k, ()))
        return cls(**d)

    # resolved views
    @property
    def benchmark(self) -> BenchmarkSpec:
        return BenchmarkSpec.from_json(self.spec)

    @property
    def native(self) -> NativeGateSet:
        return NativeGateSet.parse(self.basis)

    def variant_objects(self) -> list[Variant]:
        return [Variant.from_json(v) for v in self.variants]

    def calibration(self, graph) -> CalibrationModel:
        if self.profile == HETEROGENEOUS:
            base = PROFILES[self.native.value]
            return heterogeneous_calibration(graph, base)
        return resolve_profile(self.profile)

    def model(self) -> ModelConfig:
        return ModelConfig.validation() if self.mode == Mode.VALIDATION.value else ModelConfig.attribution()


def make_variants(policies, routers, router_seed: int) -> tuple[dict, ...]:
    out = []
    for pol, rt in product(policies, routers):
        cleanup = pol.endswith("+cleanup")
        strategy = McxStrategy(pol.removesuffix("+cleanup"))
        name = f"{pol}-{rt}"
        v = Variant(name, SynthesisPolicy(strategy, local_cleanup=cleanup),
                    RouterConfig(RouterAlgorithm(rt), router_seed, post_route_cleanup=cleanup))
        out.append(v.to_json())
    return tuple(out)


def _parse_range(text: str) -> tuple[int, ...]:
    parts = [int(x) for x in text.split(":")]
    if len(parts) == 1:
        return (parts[0],)
    lo, hi, *step = parts
    return tuple(range(lo, hi + 1, step[0] if step else 1))


# ----------------------------------------------------------------- execution

def run_attribute(m: RunManifest, out: Path) -> bool:
    spec, basis = m.benchmark, m.native
    graph = default_graph(basis)
    cal = m.calibration(graph)
    circuit = generate(spec)
    results, snaps, waterfall = [], {}, []
    for v in m.variant_objects():
        run = compile_circuit(circuit, v.policy, basis, graph, v.router)
        b = run.breakdown(cal, m.model())
        results.append(an.VariantResult(v.name, b, run.snapshots))
        snaps[v.name] = {"snapshots": [s.to_json() for s in run.snapshots], "breakdown": b.to_json(),
                         "routing": run.report.to_json()}
        waterfall += [{"variant": v.name, **row} for row in an.waterfall(b)]
    rows = [r.as_dict() for r in an.attribution_table(results, spec.algorithm)]
    an.write_csv(out / "attribution.csv", rows, an.ATTRIBUTION_COLUMNS)
    an.write_json(out / "attribution.json", {"spec": an.spec_label(spec), "rows": rows, "variants": snaps})
    an.write_csv(out / "waterfall.csv", waterfall, ("variant", "term", "delta", "cumulative"))
    return True


def run_cliff(m: RunManifest, out: Path) -> bool:
    basis = m.native
    graph = default_graph(basis)
    cal = m.calibration(graph)
    report, rows = {}, []
    for v in m.variant_objects():
        res = an.cliff_sweep(m.benchmark, v, m.n_range, basis, graph, cal, m.threshold, m.time_budget)
        report[v.name] = res.to_json()
        rows += [{"variant": v.name, "n": p.n, "total": p.total, "status": p.status} for p in res.points]
    an.write_json(out / "cliff.json", report)
    an.write_csv(out / "cliff.csv", rows, ("variant", "n", "total", "status"))
    return True  # failed widths are reported as gap markers, not as a failed analysis


def run_seeds(m: RunManifest, out: Path) -> bool:
    basis = m.native
    graph = default_graph(basis)
    stats, samples = an.seed_sweep(m.benchmark, m.variant_objects(), m.seeds, basis, graph, m.calibration(graph))
    an.write_json(out / "seeds.json", {"stats": stats.to_json(), "samples": {k: {str(s): x for s, x in v.items()}
                                                                             for k, v in samples.items()}})
    rows = [{"variant": k, "seed": s, "total": x} for k in sorted(samples) for s, x in sorted(samples[k].items())]
    an.write_csv(out / "seeds.csv", rows, ("variant", "seed", "total"))
    return True


def run_sensitivity(m: RunManifest, out: Path) -> bool:
    basis = m.native
    graph = default_graph(basis)
    cal = m.calibration(graph)
    perturbed, edges = an.perturb_calibration(cal, m.worst_fraction, m.factor, graph.edges)
    circuit = generate(m.benchmark)
    rows = []
    for v in m.variant_objects():
        run = compile_circuit(circuit, v.policy, basis, graph, v.router)
        cell = an.sensitivity(v.name, run.routed, cal, perturbed, edges)
        rows.append({"variant": cell.variant, "f_before": cell.f_before, "f_after": cell.f_after,
                     "delta": cell.delta, "touches_perturbed": cell.touches_perturbed})
    an.write_csv(out / "sensitivity.csv", rows, ("variant", "f_before", "f_after", "delta", "touches_perturbed"))
    an.write_json(out / "sensitivity.json", {"perturbed_edges": sorted(list(e) for e in edges), "rows": rows})
    return True


def run_validate(m: RunManifest, out: Path) -> bool:
    spec, basis = m.benchmark, m.native
    graph = default_graph(basis)
    cal = m.calibration(graph)
    external = None
    if m.counts_path:
        external = json.loads(Path(m.counts_path).read_text())
        missing = [v["name"] for v in m.variants if v["name"] not in external]
        if missing:
            raise click.ClickException(f"counts file lacks variants: {', '.join(missing)}")
    circuit = generate(spec)
    pred, meas, rows = {}, {}, []
    for v in m.variant_objects():
        run = compile_circuit(circuit, v.policy, basis, graph, v.router)
        counts = Counts.from_json(external[v.name]) if external else None
        r = an.measure_run(run, spec, cal, m.shots, m.sampler_seed, counts)
        pred[v.name], meas[v.name] = r.f_pred, (r.value, r.sigma)
        rows.append({"variant": v.name, "f_pred": r.f_pred, "measured": r.value, "sigma": r.sigma, "metric": r.metric})
    verdict = an.rank_agreement(pred, meas)
    try:
        r_value = an.pearson_r([pred[k] for k in sorted(pred)], [meas[k][0] for k in sorted(meas)])
    except an.AnalysisError:
        r_value = None
    an.write_csv(out / "validation.csv", rows, ("variant", "f_pred", "measured", "sigma", "metric"))
    an.write_json(out / "validation.json", {
        "spec": an.spec_label(spec), "verdict": verdict.label, "pearson_r": r_value, "rows": rows,
        "pairs": [{"a": p.a, "b": p.b, "predicted": p.predicted, "measured": p.measured} for p in verdict.pairs],
    })
    return verdict.agree


RUNNERS = {"attribute": run_attribute, "cliff": run_cliff, "seeds": run_seeds,
           "sensitivity": run_sensitivity, "validate": run_validate}


def execute(m: RunManifest) -> bool:
    out = Path(m.out)
    out.mkdir(parents=True, exist_ok=True)
    an.write_json(out / "manifest.json", m.to_json())
    try:
        return RUNNERS[m.command](m, out)
    except PipelineError as exc:
        raise click.ClickException(str(exc)) from exc


# ----------------------------------------------------------------- commands

def _spec_options(f):
    f = click.option("--alg", "alg", required=True, type=click.Choice([a.value for a in Algorithm]))(f)
    f = click.option("--n", "n", type=int, required=True)(f)
    f = click.option("--seed", type=int, default=42, show_default=True, help="Circuit seed.")(f)
    return f


def _pipeline_options(f):
    f = click.option("--policy", multiple=True, default=("compact",), show_default=True,
                     type=click.Choice(["compact", "recursive", "compact+cleanup", "recursive+cleanup"]))(f)
    f = click.option("--basis", default="ibm-heron", show_default=True,
                     type=click.Choice([b.value for b in NativeGateSet]))(f)
    f = click.option("--router", multiple=True, default=("stochastic",), show_default=True,
                     type=click.Choice([r.value for r in RouterAlgorithm]))(f)
    f = click.option("--router-seed", type=int, default=16, show_default=True)(f)
    f = click.option("--profile", default=None,
                     help="Shipped profile name, 'heterogeneous', or a calibration JSON path.")(f)
    f = click.option("--mode", default="attribution", show_default=True,
                     type=click.Choice([m.value for m in Mode]))(f)
    f = click.option("--out", type=click.Path(file_okay=False), default="out", show_default=True)(f)
    return f


def _manifest(command, alg, n, seed, policy, basis, router, router_seed, profile, mode, out, **kw) -> RunManifest:
    spec = BenchmarkSpec(Algorithm(alg), n, seed)
    return RunManifest(command, spec.to_json(), make_variants(policy, router, router_seed), basis,
                       profile or basis, mode, out=out, **kw)


def _finish(ok: bool) -> None:
    if not ok:
        click.echo("analysis reported a failure", err=True)
        sys.exit(1)


@click.group()
def main() -> None:
    """Staged (H, B, R) compilation with per-stage fidelity attribution."""


@main.command()
@click.option("--alg", required=True, type=click.Choice([a.value for a in Algorithm]))
@click.option("--n", type=int, required=True)
@click.option("--seed", type=int, default=42, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def generate_cmd(alg, n, seed, out):
    """Write the uncompiled benchmark circuit as OpenQASM 2."""
    Path(out).write_text(emit_qasm(generate(BenchmarkSpec(Algorithm(alg), n, seed))))


generate_cmd.name = "generate"


@main.command()
@_spec_options
@_pipeline_options
def attribute(**kw):
    """Per-variant stage snapshots, breakdowns, attribution table and waterfall."""
    _finish(execute(_manifest("attribute", **kw)))


@main.command()
@click.option("--alg", required=True, type=click.Choice([a.value for a in Algorithm]))
@click.option("--n", "n_text", required=True, help="lo:hi[:step]")
@click.option("--seed", type=int, default=42, show_default=True)
@_pipeline_options
@click.option("--threshold", type=float, default=-1.0, show_default=True)
@click.option("--time-budget", type=float, default=300.0, show_default=True)
def cliff(alg, n_text, seed, threshold, time_budget, **kw):
    """Total decades over a width sweep and the first crossing of the threshold."""
    widths = _parse_range(n_text)
    _finish(execute(_manifest("cliff", alg, widths[0], seed, n_range=widths, threshold=threshold,
                              time_budget=time_budget, **kw)))


@main.command()
@_spec_options
@_pipeline_options
@click.option("--seeds", "seed_text", default="16:64:2", show_default=True, help="lo:hi[:step]")
def seeds(seed_text, router_seed, **kw):
    """Router-seed variance and winner significance."""
    _finish(execute(_manifest("seeds", router_seed=router_seed, seeds=_parse_range(seed_text), **kw)))


@main.command()
@_spec_options
@_pipeline_options
@click.option("--worst-fraction", type=float, default=0.10, show_default=True)
@click.option("--factor", type=float, default=0.20, show_default=True)
def sensitivity(worst_fraction, factor, **kw):
    """Per-edge F_pred before and after degrading the worst edges."""
    _finish(execute(_manifest("sensitivity", worst_fraction=worst_fraction, factor=factor, **kw)))


@main.command()
@_spec_options
@_pipeline_options
@click.option("--shots", type=int, default=8192, show_default=True)
@click.option("--sampler-seed", type=int, default=0, show_default=True)
@click.option("--counts", "counts_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="JSON mapping variant name to {counts, shots}; replaces the internal sampler.")
def validate(shots, sampler_seed, counts_path, **kw):
    """Rank agreement between predicted and measured fidelities."""
    _finish(execute(_manifest("validate", shots=shots, sampler_seed=sampler_seed, counts_path=counts_path, **kw)))


@main.command()
@click.argument("manifest", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(file_okay=False), default=None, help="Override the output directory.")
def replay(manifest, out):
    """Re-run a manifest written by an earlier command."""
    m = RunManifest.from_json(json.loads(Path(manifest).read_text()))
    if out:
        m = RunManifest.from_json({**m.to_json(), "out": out})
    _finish(execute(m))


if __name__ == "__main__":
    main()
