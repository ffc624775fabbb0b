"""Command line experiment runner.

    cmekit run --model isomer --method exact --out runs/exact
    cmekit run --model schlogl --method ssa --samples 10000 --seed 1 --out runs/ssa
    cmekit compare runs/exact runs/ssa
    cmekit dump-generator --model isomer --caps 2,2
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import propagator as prop
from .analysis import ComparisonReport, compare, describe
from .model import ModelError, format_model, load_model, parse_model
from .operators import assemble_generator
from .samplers import METHODS as SAMPLERS
from .samplers import EnsembleResult, format_ensemble, parse_ensemble, run_ensemble
from .statespace import StateSpace

log = logging.getLogger("cmekit")

DENSITY_METHODS = ("exact", "frozen-sum", "lie-product", "strang", "column-split", "reaction-product")
STEPPED_DENSITIES = ("lie-product", "strang", "column-split", "reaction-product")
ALL_METHODS = DENSITY_METHODS + tuple(SAMPLERS)


class UsageError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    model: str
    method: str
    tau: float | None = None
    T: float | None = None
    n_samples: int | None = None
    seed: int = 0
    out: str | None = None
    refreeze: bool = False
    paper_strang: bool = False
    caps: tuple[int, ...] | None = None
    stream_offset: int = 0
    threads: int | None = None

    def validate(self) -> None:
        if self.method not in ALL_METHODS:
            raise UsageError(f"unknown method {self.method!r}; choose from {', '.join(ALL_METHODS)}")
        if self.method in SAMPLERS:
            if not self.n_samples or self.n_samples < 1:
                raise UsageError(f"{self.method} needs --samples >= 1")
            if self.method != "ssa" and self.tau is None:
                raise UsageError(f"{self.method} needs --tau")
        elif self.method in STEPPED_DENSITIES and self.tau is None:
            raise UsageError(f"{self.method} needs --tau")
        if self.tau is not None and not self.tau > 0:
            raise UsageError("--tau must be positive")
        if self.T is not None and self.T < 0:
            raise UsageError("--T must be non-negative")
        if not 0 <= self.seed < 2**64:
            raise UsageError("--seed must fit in 64 unsigned bits")


def _load(config: ExperimentConfig):
    try:
        model, init, horizon = load_model(config.model)
    except FileNotFoundError:
        raise UsageError(f"no built-in model or file named {config.model!r}") from None
    if config.caps is not None:
        model = model.with_caps(config.caps)
        model.check_initial(init)
    T = config.T if config.T is not None else horizon
    if T is None:
        raise UsageError("model file has no horizon; pass --T")
    return model, init, float(T)


def _density(config, model, space, x0, T):
    if config.method == "exact":
        return prop.exact_solution(model, space, x0, T)
    if config.method == "frozen-sum":
        return prop.frozen_sum_solution(model, space, x0, T)
    plan = prop.StepPlan.from_tau(T, config.tau)
    if config.method == "lie-product":
        return prop.lie_product_solution(model, space, x0, plan, refreeze=config.refreeze)
    if config.method == "strang":
        return prop.strang_solution(model, space, x0, plan, half_centre=config.paper_strang)
    if config.method == "column-split":
        return prop.column_split_solution(model, space, x0, plan)
    return prop.reaction_product_solution(model, space, x0, plan)


def format_density(p, space: StateSpace) -> str:
    """One line per state: index, molecule counts, probability."""
    values = np.asarray(p, dtype=np.float64)
    lines = []
    for j, (state, v) in enumerate(zip(space.states, values), start=1):
        lines.append(" ".join([str(j), *map(str, state), repr(float(v))]))
    return "\n".join(lines) + "\n"


def parse_density(text: str, space: StateSpace) -> np.ndarray:
    out = np.zeros(space.size)
    for line in text.splitlines():
        if line.strip():
            parts = line.split()
            out[int(parts[0]) - 1] = float(parts[-1])
    return out


def _write_marginals(report: ComparisonReport, out: Path) -> None:
    for name in report.species:
        rows = ["value,probability"]
        rows += [f"{k},{v!r}" for k, v in enumerate(report.marginals[name])]
        (out / f"marginal_{name}.csv").write_text("\n".join(rows) + "\n")


def run_experiment(config: ExperimentConfig):
    """Run one configured method; returns (report, result) and writes files
    to ``config.out`` when set."""
    config.validate()
    model, init, T = _load(config)
    if config.tau is not None and config.method not in ("exact", "frozen-sum", "ssa"):
        n = round(T / config.tau)
        if n < 1 or abs(n * config.tau - T) > 1e-9 * max(T, config.tau):
            raise UsageError(f"horizon {T} is not a multiple of --tau {config.tau}")
    space = StateSpace.for_model(model)
    start = time.perf_counter()
    if config.method in DENSITY_METHODS:
        result = _density(config, model, space, init.state, T)
        diagnostics = {"mass": result.mass, "clamped_mass": result.clamped_mass}
    else:
        result = run_ensemble(
            config.method, model, init.state, T, config.tau, config.n_samples,
            config.seed, stream_offset=config.stream_offset, threads=config.threads,
        )
        diagnostics = {
            "boundary_clamps": result.diagnostics["boundary_clamps"],
            "trajectories_clamped": result.diagnostics["trajectories_clamped"],
        }
    elapsed = time.perf_counter() - start
    report = describe(result, space, model.species_names, diagnostics)

    if config.out:
        out = Path(config.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "model.txt").write_text(format_model(model, init, T))
        if isinstance(result, EnsembleResult):
            (out / "ensemble.txt").write_text(format_ensemble(result, model.name))
        else:
            (out / "density.txt").write_text(format_density(result, space))
        _write_marginals(report, out)
        payload = {"config": asdict(config), "report": report.to_dict()}
        (out / "report.json").write_text(json.dumps(payload, indent=2) + "\n")
        (out / "timing.json").write_text(json.dumps({"seconds": elapsed}) + "\n")
    log.info("%s on %s finished in %.2f s", config.method, model.name, elapsed)
    return report, result


def load_run(directory):
    """Load a run directory; returns (model, space, distribution)."""
    d = Path(directory)
    model, _, _ = parse_model((d / "model.txt").read_text())
    space = StateSpace.for_model(model)
    if (d / "ensemble.txt").exists():
        dist = parse_ensemble((d / "ensemble.txt").read_text())
    elif (d / "density.txt").exists():
        dist = parse_density((d / "density.txt").read_text(), space)
    else:
        raise UsageError(f"{d} holds neither density.txt nor ensemble.txt")
    return model, space, dist


def report_from_run(directory) -> ComparisonReport:
    d = Path(directory)
    model, space, dist = load_run(d)
    saved = json.loads((d / "report.json").read_text())["report"]
    return describe(dist, space, model.species_names, saved.get("diagnostics"))


def compare_runs(dir_a, dir_b) -> ComparisonReport:
    model_a, space_a, a = load_run(dir_a)
    model_b, space_b, b = load_run(dir_b)
    if space_a.caps != space_b.caps or model_a.species_names != model_b.species_names:
        raise UsageError("runs use different state spaces")
    return compare(a, b, space_a, model_a.species_names)


def _caps(text):
    try:
        return tuple(int(c) for c in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad caps {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cmekit", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a density propagator or sampler ensemble")
    run.add_argument("--model", required=True, help="built-in name (isomer, schlogl) or model file")
    run.add_argument("--method", required=True, choices=ALL_METHODS)
    run.add_argument("--tau", type=float)
    run.add_argument("--T", type=float, help="horizon (defaults to the model's)")
    run.add_argument("--samples", type=int)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--stream-offset", type=int, default=0)
    run.add_argument("--out", default=None)
    run.add_argument("--caps", type=_caps)
    run.add_argument("--refreeze", action="store_true", help="re-freeze lie-product at the modal state")
    run.add_argument("--paper-strang", action="store_true", help="use tau/2 weight on the Strang centre")
    run.add_argument("--threads", type=int)

    cmp_ = sub.add_parser("compare", help="compare two run directories")
    cmp_.add_argument("dir_a")
    cmp_.add_argument("dir_b")
    cmp_.add_argument("--out", default=None)

    dump = sub.add_parser("dump-generator", help="print the dense generator for small boxes")
    dump.add_argument("--model", required=True)
    dump.add_argument("--caps", type=_caps)
    dump.add_argument("--max-size", type=int, default=100)
    return parser


def _summary(report: ComparisonReport) -> dict:
    d = report.to_dict()
    d.pop("marginals")
    return d


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        if args.command == "run":
            threads = args.threads
            if threads is None and os.environ.get("CMEKIT_NUM_THREADS"):
                threads = int(os.environ["CMEKIT_NUM_THREADS"])
            config = ExperimentConfig(
                model=args.model, method=args.method, tau=args.tau, T=args.T,
                n_samples=args.samples, seed=args.seed, out=args.out, refreeze=args.refreeze,
                paper_strang=args.paper_strang, caps=args.caps,
                stream_offset=args.stream_offset, threads=threads,
            )
            report, _ = run_experiment(config)
            print(json.dumps(_summary(report), indent=2))
        elif args.command == "compare":
            report = compare_runs(args.dir_a, args.dir_b)
            text = json.dumps(_summary(report), indent=2)
            if args.out:
                Path(args.out).write_text(text + "\n")
            print(text)
        else:
            model, _, _ = load_model(args.model)
            if args.caps:
                model = model.with_caps(args.caps)
            space = StateSpace.for_model(model)
            if space.size > args.max_size:
                raise UsageError(f"state space has {space.size} states, above --max-size {args.max_size}")
            sys.stdout.write(assemble_generator(model, space).dense_text())
    except (UsageError, ModelError, FileNotFoundError) as exc:
        print(f"cmekit: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
