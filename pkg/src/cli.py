"""Command-line interface for the almost-elliptic decision toolkit."""

import argparse
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

from .config import AppConfig, load_environment_variables
from .decision import DecisionEngine
from .ellipticity import elliptic_density, local_elliptic_density, power_norm_divergence
from .errors import AlmostEllipticError, InputError, PreconditionError
from .gallery import GALLERY_NAMES, GalleryRunner
from .lie_algebra import validate
from .logger import get_logger, setup_logger
from .presentation import validate_group_presentation
from .presentation_io import PresentationLoader, read_json
from .reports import envelope, render_json, render_text
from .solvable_group import delta, delta_solve
from .torus_rep import fixed_subspace, has_trivial_weight, weights

SUBCOMMANDS = ("validate", "weights", "decide", "sample", "solve-delta", "battery", "gallery", "power-norms")

logger = get_logger(__name__)


@dataclass
class RunConfig:
    """One CLI invocation; seed and samples are echoed into every report."""

    subcommand: str
    input_path: Optional[str] = None
    seed: int = 0
    samples: int = 10000
    output: Optional[str] = None
    format: str = "json"
    scale: Optional[float] = None
    tol_spectral: Optional[float] = None
    kmax: Optional[int] = None
    workers: Optional[int] = None
    config_path: Optional[str] = None
    gallery_name: Optional[str] = None
    layer: Optional[int] = None


def build_app_config(run_config: RunConfig) -> AppConfig:
    """File configuration with command-line overrides applied."""
    config = AppConfig.load(run_config.config_path)
    sampling = replace(config.sampling, seed=run_config.seed, samples=run_config.samples)
    if run_config.scale is not None:
        sampling = replace(sampling, scale=run_config.scale)
    if run_config.workers is not None:
        sampling = replace(sampling, workers=run_config.workers)
    config.sampling = sampling
    if run_config.tol_spectral is not None:
        config.tolerances = replace(config.tolerances, spectral=run_config.tol_spectral)
    if run_config.kmax is not None:
        config.power_norms = replace(config.power_norms, kmax=run_config.kmax)
    return config


def _load(run_config: RunConfig, config: AppConfig) -> Tuple[Any, PresentationLoader]:
    if not run_config.input_path:
        raise InputError(f"{run_config.subcommand} needs --input")
    data, text = read_json(run_config.input_path)
    return data, PresentationLoader(text, run_config.input_path, config.sampling.quadrature_points)


def cmd_validate(run_config: RunConfig, config: AppConfig) -> Tuple[Any, int]:
    """Check every part of a presentation against its invariants."""
    data, loader = _load(run_config, config)
    presentation = loader.document(data)
    reports = []
    if presentation.kind == "general":
        reports.append(validate(presentation.lie_algebra, config.tolerances))
    reports.extend(validate_group_presentation(presentation, config.tolerances))
    accepted = all(report.accepted for report in reports)
    payload = {"name": presentation.name, "kind": presentation.kind, "accepted": accepted, "reports": reports}
    return payload, 0 if accepted else 2


def cmd_weights(run_config: RunConfig, config: AppConfig) -> Tuple[Any, int]:
    """Weights of the torus action on V, the solvable algebra or g."""
    data, loader = _load(run_config, config)
    presentation = loader.document(data)
    if presentation.compact is None:
        raise PreconditionError("presentation has no torus; there are no weights to compute")
    engine = DecisionEngine(config)
    rep = presentation.compact.torus if presentation.kind == "vector_by_compact" else None
    rep = rep or engine.skew_rep(presentation.action_generators())
    multiset = weights(rep, config.tolerances)
    payload = {
        "name": presentation.name,
        "weights": multiset,
        "trivial_weight": has_trivial_weight(rep, config.tolerances, multiset),
        "fixed_dim": fixed_subspace(rep, config.tolerances).shape[0],
        "negation_closed": multiset.is_negation_closed(),
    }
    return payload, 0


def cmd_decide(run_config: RunConfig, config: AppConfig) -> Tuple[Any, int]:
    """Decide (openly) almost-ellipticity; optionally run the permanence check at a layer."""
    data, loader = _load(run_config, config)
    presentation = loader.document(data)
    engine = DecisionEngine(config)
    payload: Dict[str, Any] = {"decision": engine.decide(presentation)}
    if run_config.layer is not None:
        payload["permanence"] = engine.permanence_check(presentation, run_config.layer)
    return payload, 0


def cmd_sample(run_config: RunConfig, config: AppConfig) -> Tuple[Any, int]:
    """Global elliptic density, or local density when the input has a ``local`` block."""
    data, loader = _load(run_config, config)
    presentation = loader.document(data)
    local = loader.local_center(data, presentation)
    if local is None:
        estimate = elliptic_density(
            presentation, run_config.samples, run_config.seed, config.sampling, config.solver, config.tolerances
        )
    else:
        center, radius = local
        estimate = local_elliptic_density(
            presentation,
            center,
            radius,
            run_config.samples,
            run_config.seed,
            config.sampling,
            config.solver,
            config.tolerances,
        )
    return {"name": presentation.name, "estimate": estimate}, 2 if estimate.undetermined else 0


def cmd_solve_delta(run_config: RunConfig, config: AppConfig) -> Tuple[Any, int]:
    """Solve x^-1 phi(x) = v for the given automorphism and target coordinates."""
    data, loader = _load(run_config, config)
    solvable, phi, target = loader.delta_problem(data)
    solution = delta_solve(solvable, phi, target, config.solver, config.tolerances)
    check = delta(solvable, phi, solution.element, config.tolerances)
    return {"solution": solution, "delta": check.coords, "target": target.coords}, 0


def cmd_battery(run_config: RunConfig, config: AppConfig) -> Tuple[Any, int]:
    """Evaluate conditions (a) through (g) and require agreement."""
    data, loader = _load(run_config, config)
    presentation = loader.document(data)
    return DecisionEngine(config).equivalence_battery(presentation, run_config.samples), 0


def cmd_gallery(run_config: RunConfig, config: AppConfig) -> Tuple[Any, int]:
    """Run one bundled gallery entry or all of them."""
    runner = GalleryRunner(config, run_config.seed, run_config.samples)
    names = [run_config.gallery_name] if run_config.gallery_name else None
    return {"results": runner.run(names)}, 0


def cmd_power_norms(run_config: RunConfig, config: AppConfig) -> Tuple[Any, int]:
    """``max_k ||t^k - 1||`` for a matrix family."""
    data, loader = _load(run_config, config)
    family, labels = loader.power_family(data.get("family", data) if isinstance(data, dict) else data)
    return power_norm_divergence(family, config.power_norms.kmax, labels, config.tolerances), 0


COMMANDS: Dict[str, Callable[[RunConfig, AppConfig], Tuple[Any, int]]] = {
    "validate": cmd_validate,
    "weights": cmd_weights,
    "decide": cmd_decide,
    "sample": cmd_sample,
    "solve-delta": cmd_solve_delta,
    "battery": cmd_battery,
    "gallery": cmd_gallery,
    "power-norms": cmd_power_norms,
}


def run(run_config: RunConfig) -> Tuple[int, Dict[str, Any]]:
    """Execute one subcommand and write its report; returns (exit code, report)."""
    config = AppConfig()
    payload: Any = None
    error = None
    try:
        config = build_app_config(run_config)
        handler = COMMANDS.get(run_config.subcommand)
        if handler is None:
            raise InputError(f"unknown subcommand {run_config.subcommand!r}; expected one of {list(SUBCOMMANDS)}")
        payload, exit_code = handler(run_config, config)
    except AlmostEllipticError as e:
        exit_code = e.exit_code
        error = e.to_dict()
        logger.error(f"{run_config.subcommand} failed: {e.message}")
    except (TypeError, ValueError) as e:
        exit_code = 1
        error = {"type": type(e).__name__, "message": str(e), "details": {}}
        logger.error(f"{run_config.subcommand} failed on invalid configuration: {e}")

    report = envelope(
        run_config.subcommand,
        payload,
        config.tolerances,
        run_config.seed,
        run_config.samples,
        exit_code,
        error,
    )
    write_report(report, run_config)
    return exit_code, report


def write_report(report: Dict[str, Any], run_config: RunConfig) -> None:
    rendered = render_text(report) if run_config.format == "text" else render_json(report)
    if run_config.output:
        Path(run_config.output).write_text(rendered)
        logger.info(f"Report written to {run_config.output}")
    else:
        sys.stdout.write(rendered)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Decide whether a connected Lie group is (openly) almost-elliptic",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="JSON input file")
    common.add_argument("--seed", type=int, default=0, help="Monte Carlo seed")
    common.add_argument("--samples", type=int, default=10000, help="Monte Carlo sample count")
    common.add_argument("--output", help="Report file (default: stdout)")
    common.add_argument("--format", choices=("json", "text"), default="json", help="Report format")
    common.add_argument("--scale", type=float, help="Gaussian scale of translation coordinates (default 1.0)")
    common.add_argument("--tol-spectral", type=float, help="Spectral tolerance override (default 1e-8)")
    common.add_argument("--kmax", type=int, help="Largest power for power-norms (default 10000)")
    common.add_argument("--workers", type=int, help="Sampling worker threads (default 1)")
    common.add_argument("--config", help="YAML configuration file (default: $ALMELL_CONFIG or config.yaml)")
    common.add_argument("--log-level", default=None, help="Logging level (default from configuration)")

    subparsers = parser.add_subparsers(dest="command", help="Available commands")
    subparsers.add_parser("validate", parents=[common], help="Validate a presentation")
    subparsers.add_parser("weights", parents=[common], help="Weights of the torus action")
    decide_parser = subparsers.add_parser("decide", parents=[common], help="Decide almost-ellipticity")
    decide_parser.add_argument("--layer", type=int, help="Also run the permanence check at this derived term")
    subparsers.add_parser("sample", parents=[common], help="Sampled elliptic density")
    subparsers.add_parser("solve-delta", parents=[common], help="Solve x^-1 phi(x) = v")
    subparsers.add_parser("battery", parents=[common], help="Evaluate all equivalent conditions")
    gallery_parser = subparsers.add_parser("gallery", parents=[common], help="Run bundled examples")
    gallery_parser.add_argument("name", nargs="?", help=f"One of {', '.join(GALLERY_NAMES)} (default: all)")
    subparsers.add_parser("power-norms", parents=[common], help="Power-norm suprema of a matrix family")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main CLI entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help()
        return 1

    load_environment_variables()
    file_config = AppConfig.load(args.config)
    setup_logger(level=args.log_level or file_config.log_level, log_file=file_config.log_file)

    run_config = RunConfig(
        subcommand=args.command,
        input_path=args.input,
        seed=args.seed,
        samples=args.samples,
        output=args.output,
        format=args.format,
        scale=args.scale,
        tol_spectral=args.tol_spectral,
        kmax=args.kmax,
        workers=args.workers,
        config_path=args.config,
        gallery_name=getattr(args, "name", None),
        layer=getattr(args, "layer", None),
    )
    try:
        exit_code, _ = run(run_config)
    except KeyboardInterrupt:
        logger.warning("Operation cancelled by user")
        return 1
    return exit_code


if __name__ == "__main__":
    sys.exit(main())
