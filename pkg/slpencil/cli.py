#!/usr/bin/env python3
"""
slpencil command-line interface

    slpencil direct       --input problem.yaml --output data.json
    slpencil inverse      --input data.json --output problem.yaml [--finite --M 0 --N 0]
    slpencil transform    --input problem.yaml --chain "T- T+(auto)" --output out.yaml [--data]
    slpencil finite-study --input problem.yaml --output study.csv [--m 4 8 16 --eps 0 1e-3]
    slpencil stability    --output ratios.csv [--pairs 100 --direction direct]

Exit codes: 0 success, 2 domain error, 3 convergence failure, 1 anything else.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np
import pandas as pd
from pydantic import ValidationError

from . import __version__
from .config import SlpencilConfig, load_config
from .darboux import apply_chain, apply_data_chain, parse_chain, spectral_data_by_reduction
from .direct_solver import SturmLiouvilleSolver, complete_finite_data
from .exceptions import DomainError, SlpencilError
from .experiments import finite_data_study
from .inverse_solver import InverseSolver, finite_config
from .problem_io import load_data, load_problem, load_problem_file, save_data, save_json, save_problem
from .stability_metrics import DataSampler, ProblemSampler, d_alpha, lipschitz_experiment

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
BASELINE_FACTOR = 2.0

logger = logging.getLogger("slpencil")


def setup_logging(level: str = "INFO", output: Optional[str] = None) -> Optional[logging.Handler]:
    """Console logging, plus slpencil.log next to the output when one is given"""
    logging.basicConfig(level=getattr(logging, level.upper()), format=LOG_FORMAT)
    logging.getLogger().setLevel(getattr(logging, level.upper()))
    if not output:
        return None

    output_path = Path(output)
    log_dir = output_path if output_path.is_dir() else output_path.parent
    log_dir.mkdir(parents=True, exist_ok=True)
    file_handler = logging.FileHandler(log_dir / "slpencil.log")
    file_handler.setLevel(getattr(logging, level.upper()))
    file_handler.setFormatter(logging.Formatter(LOG_FORMAT))
    logging.getLogger().addHandler(file_handler)
    return file_handler


def _sidecar(output: str, suffix: str) -> Path:
    return Path(f"{output}.{suffix}.json")


def _settings(args) -> SlpencilConfig:
    """Config file, then problem-file experiment blocks, then command-line flags"""
    config = load_config(args.config)
    update = {}
    if getattr(args, "input", None) and args.command in ("direct", "transform", "finite-study", "stability"):
        spec = load_problem_file(args.input)
        for section in ("study", "metric", "sampler"):
            block = getattr(spec, section)
            if block is not None:
                update[section] = block
    if args.grid_size is not None:
        update["solver"] = config.solver.model_copy(update={"grid_size": args.grid_size})
    config = config.model_copy(update=update)

    metric = {}
    if args.alpha is not None:
        metric["alpha"] = args.alpha
    if args.n_max is not None and args.command == "stability":
        metric["n_max"] = args.n_max
    if metric:
        config = config.model_copy(update={"metric": config.metric.model_copy(update=metric)})
    # re-run validators on the merged bundle
    return SlpencilConfig.model_validate(config.model_dump())


def _n_max(args, spec_n_max: int) -> int:
    return args.n_max if args.n_max is not None else spec_n_max


def _grid_size(args, config: SlpencilConfig, spec=None) -> Optional[int]:
    """--grid-size, then a config file, then the problem file"""
    if args.grid_size is not None or args.config:
        return config.solver.grid_size
    return spec.solver.grid_size if spec is not None else None


# Commands


def cmd_direct(args, config: SlpencilConfig) -> int:
    spec = load_problem_file(args.input)
    problem = spec.to_problem(_grid_size(args, config, spec))
    n_max = _n_max(args, spec.solver.n_max)
    print(f"🚀 Solving direct problem {problem.describe()} for n <= {n_max}")

    if args.by_reduction:
        data = spectral_data_by_reduction(problem, n_max, config.solver)
    else:
        data = SturmLiouvilleSolver(problem, config.solver).spectral_data(n_max)

    if args.output:
        save_data(data, args.output)
        print(f"📁 Spectral data saved to: {args.output}")
    else:
        print(json.dumps(data.to_dict(), indent=2))
    print(f"✅ lambda_1 = {data.eigenvalues[0]:.12g}, lambda_{n_max} = {data.eigenvalues[-1]:.12g}")
    return 0


def cmd_inverse(args, config: SlpencilConfig) -> int:
    data = load_data(args.input, args.M, args.N)
    solver_config = config.solver
    inverse_config = config.inverse
    if args.finite:
        inverse_config = finite_config(inverse_config, len(data))
    solver = InverseSolver(inverse_config, solver_config)
    if args.finite:
        needed = solver.required_pairs(data.M, data.N)
        print(f"📋 Completing {len(data)} finite pairs with asymptotic values up to n={needed}")
        data = complete_finite_data(data.eigenvalues, data.norming, data.M, data.N, needed)

    print(f"🚀 Inverting ({data.M}, {data.N}) spectral data with {len(data)} pairs")
    problem = solver.solve(data)
    report = solver.report.to_dict()
    report["M"], report["N"] = problem.indices
    report["f"], report["F"] = problem.f.to_dict(), problem.F.to_dict()

    if args.reference:
        reference = load_problem(args.reference, problem.grid_size)
        report["d_0"] = d_alpha(reference, problem, 0.0)
        report[f"d_{config.metric.alpha:g}"] = d_alpha(reference, problem, config.metric.alpha)
        print(f"📊 d_0 to reference: {report['d_0']:.3e}")

    if args.output:
        save_problem(problem, args.output, name=Path(args.output).stem, description="reconstructed by slpencil inverse")
        save_json(report, _sidecar(args.output, "report"))
        print(f"📁 Reconstructed problem saved to: {args.output}")
    else:
        print(json.dumps(report, indent=2))
    print(f"✅ Base-case residual {solver.report.base_residual:.3e}, data mismatch {solver.report.data_mismatch:.3e}")
    return 0


def cmd_transform(args, config: SlpencilConfig) -> int:
    spec = load_problem_file(args.input)
    problem = spec.to_problem(_grid_size(args, config, spec))
    steps = parse_chain(args.chain)
    print(f"🚀 Applying {' '.join(str(s) for s in steps)} to {problem.describe()}")

    result = apply_chain(problem, steps, config.solver)
    report = {
        "chain": [str(s) for s in steps],
        "history": [{"step": name, "M": idx[0], "N": idx[1]} for name, idx in result.history],
        "f": result.problem.f.to_dict(),
        "F": result.problem.F.to_dict(),
    }
    if result.problem.indices == problem.indices:
        report["d_0_to_input"] = d_alpha(problem, result.problem, 0.0)
        print(f"📊 d_0 to input: {report['d_0_to_input']:.3e}")

    if args.data:
        n_max = _n_max(args, spec.solver.n_max)
        pops = sum(1 for s in steps if s.kind == "T-")
        before = SturmLiouvilleSolver(problem, config.solver).spectral_data(n_max + pops)
        predicted = apply_data_chain(before, steps)
        n = min(n_max, len(predicted))
        after = SturmLiouvilleSolver(result.problem, config.solver).spectral_data(n)
        lam_err = np.abs(after.eigenvalues - predicted.eigenvalues[:n]) / (1.0 + np.abs(predicted.eigenvalues[:n]))
        gam_err = np.abs(after.norming / predicted.norming[:n] - 1.0)
        report["commutation_error"] = float(max(lam_err.max(), gam_err.max()))
        report["commutation_pairs"] = n
        print(f"📊 Data-side commutation error over {n} pairs: {report['commutation_error']:.3e}")

    if args.output:
        save_problem(result.problem, args.output, name=Path(args.output).stem, description=f"{args.chain} applied to {spec.name or Path(args.input).stem}")
        save_json(report, _sidecar(args.output, "report"))
        print(f"📁 Transformed problem saved to: {args.output}")
    else:
        print(json.dumps(report, indent=2))
    print(f"✅ Result indices {result.problem.indices}")
    return 0


def cmd_finite_study(args, config: SlpencilConfig) -> int:
    problem = load_problem(args.input, _grid_size(args, config))
    study = config.study
    update = {}
    if args.m:
        update["m_values"] = args.m
    if args.eps:
        update["eps_values"] = args.eps
    if args.alpha is not None:
        update["alpha1"] = args.alpha
    if args.alpha2 is not None:
        update["alpha2"] = args.alpha2
    if args.seed is not None:
        update["seed"] = args.seed
    study = type(study).model_validate({**study.model_dump(), **update})

    print(f"🚀 Finite-data study on {problem.describe()}")
    result = finite_data_study(problem, study, config.inverse, config.solver, workers=args.workers)
    summary = result.summary()

    if args.output:
        Path(args.output).parent.mkdir(parents=True, exist_ok=True)
        result.to_csv(args.output)
        save_json(summary, _sidecar(args.output, "summary"))
        print(f"📁 Study table saved to: {args.output}")
    else:
        print(result.rows.to_csv(index=False, float_format="%.17g"))
    slope = summary["loglog_slope"]
    if slope is not None:
        print(f"📊 log-log slope {slope:.4f} vs theoretical {summary['theoretical_slope']:.4f}")
    print("✅ Finite-data study complete")
    return 0


def cmd_stability(args, config: SlpencilConfig) -> int:
    sampler_config = config.sampler
    update = {}
    if args.M is not None:
        update["M"] = args.M
    if args.N is not None:
        update["N"] = args.N
    if args.pairs is not None:
        update["pair_count"] = args.pairs
    if args.direction is not None:
        update["direction"] = args.direction
    sampler_config = type(sampler_config).model_validate({**sampler_config.model_dump(), **update})
    metric = config.metric

    problems = ProblemSampler(
        sampler_config.M,
        sampler_config.N,
        metric.Q,
        metric.delta,
        metric.alpha,
        n_cos=sampler_config.n_cos,
        grid_size=config.solver.grid_size,
        solver_config=config.solver,
        max_attempts=sampler_config.max_attempts,
    )
    sampler = DataSampler(problems, metric.R, metric.eps, metric.n_max) if args.data_set else problems
    print(
        f"🚀 Lipschitz experiment: {sampler_config.pair_count} {sampler_config.direction} pairs, "
        f"(M, N)=({sampler_config.M}, {sampler_config.N}), Q={metric.Q:g}, delta={metric.delta:g}"
    )
    table = lipschitz_experiment(
        sampler,
        sampler_config.pair_count,
        metric.alpha,
        direction=sampler_config.direction,
        seed=args.seed if args.seed is not None else 0,
        n_max=metric.n_max,
        scale=sampler_config.perturbation,
        workers=max(args.workers, sampler_config.workers),
        inverse_config=config.inverse,
    )
    summary = table.summary()

    status = 0
    if args.baseline:
        baseline = _baseline_max(args.baseline)
        summary["baseline_max_ratio"] = baseline
        summary["within_baseline"] = bool(table.max_ratio <= BASELINE_FACTOR * baseline)
        if not summary["within_baseline"]:
            logger.error(f"Max ratio {table.max_ratio:.4g} exceeds {BASELINE_FACTOR:g} x baseline {baseline:.4g}")
            print(f"❌ Max ratio {table.max_ratio:.4g} exceeds {BASELINE_FACTOR:g} x baseline {baseline:.4g}")
            status = 1

    if args.output:
        Path(args.output).parent.mkdir(parents=True, exist_ok=True)
        table.to_csv(args.output)
        save_json(summary, _sidecar(args.output, "summary"))
        print(f"📁 Ratio table saved to: {args.output}")
    else:
        print(table.rows.to_csv(index=False, float_format="%.17g"))
    print(f"📊 Max ratio {table.max_ratio:.4g}, median {table.median_ratio:.4g}, skipped {table.skipped}")
    return status


def _baseline_max(path: str) -> float:
    """Baseline max ratio from an earlier ratio CSV or its summary JSON"""
    if path.endswith(".json"):
        with open(path, "r") as f:
            return float(json.load(f)["max_ratio"])
    return float(pd.read_csv(path)["ratio"].max())


COMMANDS = {
    "direct": cmd_direct,
    "inverse": cmd_inverse,
    "transform": cmd_transform,
    "finite-study": cmd_finite_study,
    "stability": cmd_stability,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="Problem file (YAML) or spectral data (JSON)")
    common.add_argument("--output", help="Output file; prints to stdout when omitted")
    common.add_argument("--n-max", type=int, help="Number of spectral pairs")
    common.add_argument("--alpha", type=float, help="Sobolev exponent in [0, 1/2)")
    common.add_argument("--seed", type=int, help="Random seed")
    common.add_argument("--grid-size", type=int, help="Grid intervals G on [0, pi]")
    common.add_argument("--config", help="Configuration file (YAML or JSON)")
    common.add_argument("--workers", type=int, default=1, help="Worker processes for sweeps")
    common.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])

    parser = argparse.ArgumentParser(
        prog="slpencil",
        description="Sturm-Liouville problems with rational Herglotz-Nevanlinna boundary conditions",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    direct = sub.add_parser("direct", parents=[common], help="Eigenvalues and norming constants of a problem")
    direct.add_argument("--by-reduction", action="store_true", help="Solve through the Dirichlet reduction")

    inverse = sub.add_parser("inverse", parents=[common], help="Reconstruct a problem from spectral data")
    inverse.add_argument("--M", type=int, help="Index of f when the data file has none")
    inverse.add_argument("--N", type=int, help="Index of F when the data file has none")
    inverse.add_argument("--finite", action="store_true", help="Complete finitely many pairs with asymptotic values")
    inverse.add_argument("--reference", help="Problem file to measure the reconstruction against")

    transform = sub.add_parser("transform", parents=[common], help="Apply a chain of transforms")
    transform.add_argument("--chain", required=True, help='e.g. "T- T+(auto)" or "T-+ T+-"')
    transform.add_argument("--data", action="store_true", help="Cross-check against the data-side chain")

    study = sub.add_parser("finite-study", parents=[common], help="Finite-data approximation study")
    study.add_argument("--m", type=int, nargs="+", help="Numbers of known pairs")
    study.add_argument("--eps", type=float, nargs="+", help="Noise levels")
    study.add_argument("--alpha2", type=float, help="Smoothness exponent of the true potential")

    stability = sub.add_parser("stability", parents=[common], help="Empirical Lipschitz ratios")
    stability.add_argument("--pairs", type=int, help="Number of sampled pairs")
    stability.add_argument("--direction", choices=["direct", "inverse", "conditional"])
    stability.add_argument("--M", type=int, help="Index of sampled f")
    stability.add_argument("--N", type=int, help="Index of sampled F")
    stability.add_argument("--data-set", action="store_true", help="Also require the data to lie in B_(R,eps)")
    stability.add_argument("--baseline", help="Earlier ratio CSV or summary JSON to regress against")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point"""
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = setup_logging(args.log_level, args.output)

    try:
        if args.command in ("direct", "transform", "finite-study", "inverse") and not args.input:
            raise DomainError(f"{args.command} needs --input")
        config = _settings(args)
        return COMMANDS[args.command](args, config)
    except ValidationError as e:
        logger.error(f"Invalid settings: {e}")
        print(f"❌ Invalid settings: {e}", file=sys.stderr)
        return DomainError.exit_code
    except SlpencilError as e:
        logger.error(f"{type(e).__name__}: {e}")
        print(f"❌ {type(e).__name__}: {e}", file=sys.stderr)
        return e.exit_code
    except Exception as e:
        logger.exception(f"Unexpected failure: {e}")
        print(f"❌ Unexpected failure: {e}", file=sys.stderr)
        return 1
    finally:
        if handler is not None:
            logging.getLogger().removeHandler(handler)
            handler.close()


if __name__ == "__main__":
    sys.exit(main())
