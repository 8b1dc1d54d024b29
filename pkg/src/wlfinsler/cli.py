"""Command-line front end.

``wlfinsler run CONFIG`` executes a JSON config; the other subcommands
build a config from flags (optionally layered on ``--config``) and run the
matching scenario.  Exit codes: 0 all pass, 2 some check failed, 3 only
inconclusive outcomes, 64 invalid configuration or parameters.
"""

from __future__ import annotations

import argparse
import json
import sys

from .autodiff import DomainError
from .expression import ExpressionError
from .geometry import GeometryError, ParameterError
from .models import ModelError
from .runner import ConfigError, emit_report, exit_code, load_config, parse_config, run_scenario

EXIT_CONFIG = 64

_SCENARIO = {"suite": "suite", "cones": "cones", "geodesic": "geodesic", "congruence": "congruence",
             "bonnet-myers": "bonnet_myers", "surface": "surface"}


def _value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _floats(text: str):
    return [float(t) for t in text.split(",") if t.strip()]


def _common(p: argparse.ArgumentParser):
    p.add_argument("--tol", type=float, help="integration tolerance")
    p.add_argument("--out", help="output directory for reports")
    p.add_argument("--format", action="append", choices=["csv", "json"],
                   help="report format (repeatable; default json)")
    p.add_argument("--seed", type=int, help="sampling seed")
    p.add_argument("-q", "--quiet", action="store_true", help="print only the exit status line")


def _model_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON config used as the base before flags apply")
    p.add_argument("--model", help="builtin model name")
    p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                   help="model parameter (repeatable)")
    p.add_argument("--expression-L", dest="expression_L", help="Lagrangian expression")
    p.add_argument("--expression-psi", dest="expression_psi", help="weight expression")
    p.add_argument("--dim", type=int, help="dimension for expression models")
    p.add_argument("--future-seed", dest="future_seed", type=_floats, help="comma-separated vector")
    p.add_argument("--x0", type=_floats, help="base point, comma-separated")
    p.add_argument("--v0", type=_floats, help="initial velocity, comma-separated")
    p.add_argument("--t-span", dest="t_span", type=_floats, help="start,end")
    p.add_argument("--grid", type=int, help="frame samples along the geodesic")
    p.add_argument("--N", dest="N", help="effective dimension (number or inf)")
    p.add_argument("--epsilon", type=_floats, help="comma-separated epsilon values")
    p.add_argument("--t0", type=float, help="reference time for the focusing bound")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wlfinsler", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="run a JSON config")
    p.add_argument("config")
    _common(p)
    p = sub.add_parser("suite", help="full invariant battery")
    _common(p)
    p = sub.add_parser("cones", help="cone component census")
    _model_flags(p)
    p.add_argument("--k", type=int, help="shorthand for --param k=K")
    p.add_argument("--samples", type=int)
    p.add_argument("--expected", type=int, dest="expected_components")
    _common(p)
    for name in ("geodesic", "congruence"):
        p = sub.add_parser(name, help=f"{name} scenario")
        _model_flags(p)
        _common(p)
    p = sub.add_parser("bonnet-myers", help="conjugate times along a fan versus pi sqrt(N/K)")
    _model_flags(p)
    p.add_argument("--K", type=float, dest="K")
    p.add_argument("--directions", type=int)
    _common(p)
    p = sub.add_parser("surface", help="lightlike normals and null expansions of a round sphere")
    _model_flags(p)
    p.add_argument("--radius", type=float)
    p.add_argument("--resolution", type=int)
    p.add_argument("--expect-trapped", dest="expect_trapped", choices=["yes", "no"])
    _common(p)
    return parser


def config_from_args(args) -> dict:
    if args.command == "run":
        base = json.loads(load_config(args.config).model_dump_json())
    else:
        base = {}
        if getattr(args, "config", None):
            base = json.loads(load_config(args.config).model_dump_json())
        base["scenario"] = _SCENARIO[args.command]
    model = base.setdefault("model", {})
    numeric = base.setdefault("numeric", {})
    output = base.setdefault("output", {})
    if getattr(args, "model", None):
        model.clear()
        model["builtin"] = args.model
    params = model.setdefault("params", {}) if model.get("expression_L") is None else None
    for item in getattr(args, "param", []) or []:
        if "=" not in item:
            raise ConfigError(f"model.params: expected KEY=VALUE, got {item!r}")
        key, val = item.split("=", 1)
        if params is None:
            raise ConfigError("model.params: not used by expression models")
        params[key] = _value(val)
    if getattr(args, "k", None) is not None:
        model.setdefault("builtin", "beem")
        model.setdefault("params", {})["k"] = args.k
    for key in ("expression_L", "expression_psi", "dim", "future_seed"):
        val = getattr(args, key, None)
        if val is not None:
            model[key] = val
            model.pop("builtin", None) if key == "expression_L" else None
    if model.get("expression_L"):
        model.pop("params", None)
        model["builtin"] = None
    for key in ("tol", "seed", "x0", "v0", "t_span", "grid", "epsilon", "t0", "K", "directions",
                "samples", "expected_components", "radius", "resolution"):
        val = getattr(args, key, None)
        if val is not None:
            numeric[key] = val
    if getattr(args, "N", None) is not None:
        numeric["N"] = "inf" if args.N.lower() in ("inf", "+inf") else _value(args.N)
    if getattr(args, "expect_trapped", None) is not None:
        numeric["expect_trapped"] = args.expect_trapped == "yes"
    if args.out:
        output["directory"] = args.out
    if args.format:
        output["formats"] = sorted(set(args.format))
    return base


def _report(result, config, quiet: bool):
    code = exit_code(result)
    if not quiet:
        for name, v in sorted(result.verdicts.items()):
            print(f"{v.status.upper():13s} {name}  margin={v.margin:.3g}  [{v.invariant}]"
                  + (f"  {v.detail}" if v.detail else ""))
        for path in result.artifacts:
            print(f"wrote {path}")
    print(f"exit {code}: {len(result.verdicts)} checks, {len(result.failures)} failed, "
          f"{result.timing.get('total', 0.0):.1f}s")
    return code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = parse_config(config_from_args(args))
        result = run_scenario(config)
    except (ConfigError, ParameterError, ModelError, ExpressionError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (GeometryError, DomainError) as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return 2
    if config.output.directory:
        emit_report(result, config.output.formats, config.output.directory, config)
    return _report(result, config, args.quiet)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
