"""
Command-line front end: JSON matrices in, calculus results and iteration reports out.

    python main.py sqrt --in g.json --out r.json
    python main.py spectral --in g.json --lambda 1.5
    python main.py step-approx --in g.json --n 64 --report
"""
import argparse
import logging
import os
import sys
from collections import OrderedDict
from functools import lru_cache
from pathlib import Path
from typing import Callable, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, ValidationError, field_validator

import axiom_suite
import commutant_blocks
import constructive_calculus as calculus
import projection_lattice
import spectral
import states_norms
from constructive_calculus import IterationReport, Method
from errors import DocumentError, HermitiaError
from hermitian_core import DEFAULT_TOLERANCES, HermitianMatrix, Projection, ToleranceConfig, commutes
from utils import block_to_json, dump_json, load_family, load_matrix, matrix_to_json, resolution_to_json

logger = logging.getLogger("hermitia")

Payload = Tuple[object, List[IterationReport]]


class UsageError(Exception):
    pass


@lru_cache()
def get_settings():
    return {
        "seed": int(os.getenv("HERMITIA_SEED", "0")),
        "config_path": os.getenv("HERMITIA_CONFIG"),
        "log_level": os.getenv("HERMITIA_LOG_LEVEL", "WARNING"),
    }


class CliConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    in_paths: List[Path] = []
    out_path: Optional[Path] = None
    method: Method = Method.ITERATIVE
    overrides: Dict[str, str] = {}
    seed: int = 0
    format: Literal["json", "text"] = "json"

    @field_validator("in_paths")
    @classmethod
    def _inputs_exist(cls, paths: List[Path]) -> List[Path]:
        missing = [str(p) for p in paths if not p.is_file()]
        if missing:
            raise ValueError(f"input file not found: {', '.join(missing)}")
        return paths


def _parse_overrides(pairs: List[str]) -> Dict[str, str]:
    overrides = {}
    for pair in pairs:
        name, sep, value = pair.partition("=")
        if not sep or name not in ToleranceConfig.model_fields:
            raise UsageError(f"--tol expects NAME=VALUE with NAME one of {sorted(ToleranceConfig.model_fields)}")
        overrides[name] = value
    return overrides


def _tolerances(args, cli: CliConfig) -> ToleranceConfig:
    config_path = args.config or get_settings()["config_path"]
    cfg = ToleranceConfig.from_yaml(config_path) if config_path else DEFAULT_TOLERANCES
    overrides: Dict[str, object] = dict(cli.overrides)
    if args.max_iter is not None:
        overrides["max_iter"] = args.max_iter
    if args.workers is not None:
        overrides["workers"] = args.workers
    return cfg.with_overrides(**overrides) if overrides else cfg


# --- commands -----------------------------------------------------------------------


def _inputs(cli: CliConfig, cfg: ToleranceConfig, count: int) -> List[HermitianMatrix]:
    if len(cli.in_paths) != count:
        raise UsageError(f"expected {count} --in file(s), got {len(cli.in_paths)}")
    return [load_matrix(path, cfg, strict=True) for path in cli.in_paths]


def _sqrt(args, cli, cfg) -> Payload:
    reports: List[IterationReport] = []
    (g,) = _inputs(cli, cfg, 1)
    root, _ = calculus.sqrt(g, cfg, cli.method, reports)
    return matrix_to_json(root), reports


def _abs(args, cli, cfg) -> Payload:
    reports: List[IterationReport] = []
    (g,) = _inputs(cli, cfg, 1)
    return matrix_to_json(calculus.absolute(g, cfg, cli.method, reports)), reports


def _parts(args, cli, cfg) -> Payload:
    reports: List[IterationReport] = []
    (g,) = _inputs(cli, cfg, 1)
    a, pos, neg = calculus.parts(g, cfg, cli.method, reports)
    return {"abs": matrix_to_json(a), "pos": matrix_to_json(pos), "neg": matrix_to_json(neg)}, reports


def _carrier(args, cli, cfg) -> Payload:
    reports: List[IterationReport] = []
    (g,) = _inputs(cli, cfg, 1)
    p, _ = calculus.carrier(g, cfg, cli.method, reports)
    return matrix_to_json(p), reports


def _polar(args, cli, cfg) -> Payload:
    reports: List[IterationReport] = []
    (g,) = _inputs(cli, cfg, 1)
    polar = calculus.polar_decompose(g, cfg, cli.method, reports)
    payload = {
        "abs": matrix_to_json(polar.abs),
        "pos": matrix_to_json(polar.pos),
        "neg": matrix_to_json(polar.neg),
        "signum": matrix_to_json(polar.signum),
        "carrier": matrix_to_json(polar.carrier),
    }
    return payload, reports


def _invert(args, cli, cfg) -> Payload:
    reports: List[IterationReport] = []
    (g,) = _inputs(cli, cfg, 1)
    return matrix_to_json(calculus.invert(g, cfg, cli.method, reports)), reports


def _bounds(args, cli, cfg) -> Payload:
    (g,) = _inputs(cli, cfg, 1)
    bounds = spectral.spectral_bounds(g, cfg)
    return {"L": bounds.lower, "U": bounds.upper, "norm": bounds.norm}, []


def _spectral(args, cli, cfg) -> Payload:
    if args.lam is None:
        raise UsageError("spectral needs --lambda")
    reports: List[IterationReport] = []
    (g,) = _inputs(cli, cfg, 1)
    if args.eigen:
        return matrix_to_json(spectral.eigenprojection(g, args.lam, cfg, cli.method, reports)), reports
    return matrix_to_json(spectral.spectral_projection(g, args.lam, cfg, cli.method, reports)), reports


def _resolution(args, cli, cfg) -> Payload:
    reports: List[IterationReport] = []
    (g,) = _inputs(cli, cfg, 1)
    resolution = spectral.full_resolution(g, args.n or 16, cfg, cli.method, reports)
    return resolution_to_json(resolution), reports


def _step_approx(args, cli, cfg) -> Payload:
    reports: List[IterationReport] = []
    (g,) = _inputs(cli, cfg, 1)
    step = spectral.step_approximation(g, args.n or 16, cfg, cli.method, gamma=args.gamma, reports=reports)
    if not args.report:
        return matrix_to_json(step.approximation), reports
    payload = {
        "approximation": matrix_to_json(step.approximation),
        "error": step.achieved_error,
        "mesh": step.partition.mesh,
        "partition": list(step.partition.points),
        "gamma": args.gamma,
    }
    return payload, reports


def _commute(args, cli, cfg) -> Payload:
    g, h = _inputs(cli, cfg, 2)
    return {"commutes": commutes(g, h, cfg)}, []


def _projections(cli, cfg) -> List[Projection]:
    return [Projection.from_matrix(m, cfg) for m in _inputs(cli, cfg, 2)]


def _meet(args, cli, cfg) -> Payload:
    reports: List[IterationReport] = []
    p, q = _projections(cli, cfg)
    return matrix_to_json(projection_lattice.meet(p, q, cfg, cli.method, reports)), reports


def _join(args, cli, cfg) -> Payload:
    reports: List[IterationReport] = []
    p, q = _projections(cli, cfg)
    return matrix_to_json(projection_lattice.join(p, q, cfg, cli.method, reports)), reports


def _block(args, cli, cfg) -> Payload:
    if len(cli.in_paths) != 1:
        raise UsageError("block expects one --in family file")
    block = commutant_blocks.generate_block(load_family(cli.in_paths[0], cfg), cfg)
    payload = block_to_json(block)
    payload["degenerate"] = block.degenerate
    return payload, []


def _cblock_lattice(args, cli, cfg) -> Payload:
    reports: List[IterationReport] = []
    g, h = _inputs(cli, cfg, 2)
    meet = commutant_blocks.cblock_meet(g, h, cfg, cli.method, reports)
    join = commutant_blocks.cblock_join(g, h, cfg, cli.method, reports)
    return {"meet": matrix_to_json(meet), "join": matrix_to_json(join)}, reports


def _state_range(args, cli, cfg) -> Payload:
    (g,) = _inputs(cli, cfg, 1)
    low, high = states_norms.state_range(g, args.samples or 100, cli.seed, cfg)
    return {"min": low, "max": high}, []


def _check_axioms(args, cli, cfg) -> Payload:
    dims = tuple(int(d) for d in args.dims.split(",")) if args.dims else tuple(range(1, 9))
    reports = axiom_suite.run_default_suite(
        cfg, dims=dims, samples=args.samples or 500, seed=cli.seed, chain_length=args.chain_length
    )
    failed = [r.axiom for r in reports if not r.passed]
    if failed:
        logger.error(f"axiom checks failed: {', '.join(failed)}")
    return {"reports": [r.to_json() for r in reports], "pass": not failed}, []


COMMANDS: Dict[str, Callable[..., Payload]] = OrderedDict(
    [
        ("sqrt", _sqrt),
        ("abs", _abs),
        ("parts", _parts),
        ("carrier", _carrier),
        ("polar", _polar),
        ("invert", _invert),
        ("bounds", _bounds),
        ("spectral", _spectral),
        ("resolution", _resolution),
        ("step-approx", _step_approx),
        ("commute", _commute),
        ("meet", _meet),
        ("join", _join),
        ("block", _block),
        ("cblock-lattice", _cblock_lattice),
        ("state-range", _state_range),
        ("check-axioms", _check_axioms),
    ]
)


# --- plumbing -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--in", dest="in_paths", action="append", type=Path, default=[], help="input JSON (repeatable)")
    common.add_argument("--out", dest="out_path", type=Path, help="write the result document here")
    common.add_argument("--method", choices=[m.value for m in Method], default=Method.ITERATIVE.value)
    common.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE", help="override a tolerance")
    common.add_argument("--max-iter", type=int, help="iteration cap")
    common.add_argument("--workers", type=int, help="threads for grid and sample evaluation")
    common.add_argument("--config", type=Path, help="YAML tolerance file")
    common.add_argument("--seed", type=int, help="random seed (default: $HERMITIA_SEED or 0)")
    common.add_argument("--format", choices=["json", "text"], default="json")
    common.add_argument("--verbose", "-v", action="count", default=0)
    common.add_argument("--lambda", dest="lam", type=float, help="spectral parameter")
    common.add_argument("--eigen", action="store_true", help="spectral: return the eigenprojection d_λ")
    common.add_argument("--n", type=int, help="grid size / number of cells")
    common.add_argument("--gamma", choices=["left", "midpoint"], default="left")
    common.add_argument("--report", action="store_true", help="step-approx: include error and mesh")
    common.add_argument("--samples", type=int, help="sample count")
    common.add_argument("--dims", help="check-axioms: comma separated dimensions")
    common.add_argument("--chain-length", type=int, default=6)

    parser = argparse.ArgumentParser(prog="hermitia", description="Constructive Hermitian operator calculus")
    commands = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        commands.add_parser(name, parents=[common])
    return parser


def configure_logging(verbose: int) -> None:
    if verbose >= 2:
        level = logging.DEBUG
    elif verbose == 1:
        level = logging.INFO
    else:
        level = getattr(logging, get_settings()["log_level"].upper(), logging.WARNING)
    logging.basicConfig(stream=sys.stderr, level=level, format="%(levelname)s %(name)s: %(message)s")


def summarize_reports(reports: List[IterationReport]) -> List[dict]:
    """One entry per (operation, method) with call count, total iterations and worst residual."""
    grouped: Dict[Tuple[str, str], dict] = OrderedDict()
    for r in reports:
        key = (r.operation, r.method.value)
        entry = grouped.setdefault(
            key,
            {"operation": r.operation, "method": r.method.value, "calls": 0, "iterations": 0, "residual": 0.0, "converged": True},
        )
        entry["calls"] += 1
        entry["iterations"] += r.iterations
        entry["residual"] = max(entry["residual"], r.residual)
        entry["converged"] = entry["converged"] and r.converged
    return list(grouped.values())


def _render_text(result, reports: List[dict]) -> str:
    lines = []

    def walk(value, prefix=""):
        if isinstance(value, dict) and set(value) == {"n", "entries"}:
            n = value["n"]
            lines.append(f"{prefix}{n}×{n} matrix")
            for i in range(n):
                row = value["entries"][i * n : (i + 1) * n]
                lines.append("    " + "  ".join(f"{e['re']:+.6f}{e['im']:+.6f}i" for e in row))
        elif isinstance(value, dict):
            for key, item in value.items():
                walk(item, f"{prefix}{key}: ")
        elif isinstance(value, list) and value and isinstance(value[0], dict):
            for i, item in enumerate(value):
                walk(item, f"{prefix}[{i}] ")
        else:
            lines.append(f"{prefix}{value}")

    walk(result)
    for r in reports:
        lines.append(
            f"report {r['operation']} [{r['method']}]: {r['calls']} calls, {r['iterations']} iterations, "
            f"residual {r['residual']:.3e}, converged={r['converged']}"
        )
    return "\n".join(lines)


def _emit(result, reports: List[IterationReport], cli: CliConfig) -> None:
    summary = summarize_reports(reports)
    if cli.format == "text":
        text = _render_text(result, summary)
        if cli.out_path:
            cli.out_path.write_text(text + "\n", encoding="utf-8")
            text = _render_text({}, summary)
        if text:
            sys.stdout.write(text + "\n")
        return
    if cli.out_path:
        cli.out_path.write_text(dump_json(result) + "\n", encoding="utf-8")
        sys.stdout.write(dump_json({"reports": summary}) + "\n")
    else:
        sys.stdout.write(dump_json({"result": result, "reports": summary}) + "\n")


def run(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    configure_logging(args.verbose)

    try:
        cli = CliConfig(
            in_paths=args.in_paths,
            out_path=args.out_path,
            method=Method(args.method),
            overrides=_parse_overrides(args.tol),
            seed=args.seed if args.seed is not None else get_settings()["seed"],
            format=args.format,
        )
        cfg = _tolerances(args, cli)
        result, reports = COMMANDS[args.command](args, cli, cfg)
        _emit(result, reports, cli)
    except (UsageError, DocumentError) as exc:
        sys.stderr.write(f"hermitia {args.command}: {exc}\n")
        return 2
    except ValidationError as exc:
        first = exc.errors()[0]
        location = ".".join(str(p) for p in first["loc"])
        sys.stderr.write(f"hermitia {args.command}: invalid option {location}: {first['msg']}\n")
        return 2
    except HermitiaError as exc:
        sys.stderr.write(f"hermitia {args.command}: {type(exc).__name__}: {exc}\n")
        return 1
    except OSError as exc:
        sys.stderr.write(f"hermitia {args.command}: {exc}\n")
        return 2

    if args.command == "check-axioms" and not result["pass"]:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(run())
