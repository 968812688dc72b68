"""Command-line entry point: ``gasketforge <subcommand> ...``.

Exit codes: 0 success, 1 computation failure (or a gasket check that does not
pass), 2 usage error.  Errors are also written to stderr as one JSON object.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

import numpy as np

from gasketforge import __version__
from gasketforge import io as gio
from gasketforge.families import format_complex, parse_complex, parse_family

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# --- argument types -------------------------------------------------------------


def _complex(text) -> complex:
    try:
        return parse_complex(str(text))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive_int(text) -> int:
    try:
        v = int(text)
    except (TypeError, ValueError):
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _nonneg_int(text) -> int:
    try:
        v = int(text)
    except (TypeError, ValueError):
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {v}")
    return v


def _positive_float(text) -> float:
    try:
        v = float(text)
    except (TypeError, ValueError):
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not v > 0 or v == float("inf"):
        raise argparse.ArgumentTypeError(f"expected a positive finite number, got {text!r}")
    return v


def _int_list(text) -> list[int]:
    if isinstance(text, (list, tuple)):
        items = list(text)
    else:
        items = [t for t in str(text).split(",") if t.strip()]
    try:
        out = [int(t) for t in items]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not out or any(v < 1 for v in out):
        raise argparse.ArgumentTypeError(f"expected positive integers, got {text!r}")
    return out


def _critical(text):
    if str(text) == "auto":
        return "auto"
    return _nonneg_int(text)


# --- parser -------------------------------------------------------------------------


def _window_args(p, width=4.0):
    p.add_argument("--center", type=_complex, default=0j, help="window centre, e.g. 0.5-1i")
    p.add_argument("--width", type=_positive_float, default=width)
    p.add_argument("--height", type=_positive_float, default=None, help="defaults to --width")
    p.add_argument("--size", type=_positive_int, default=512, help="cells per side")
    p.add_argument("--cols", type=_positive_int, default=None)
    p.add_argument("--rows", type=_positive_int, default=None)
    p.add_argument("--workers", type=_positive_int, default=None)


def _render_args(p):
    p.add_argument("--chart", choices=("finite", "infinity"), default="finite",
                   help="'infinity' takes window coordinates as w = 1/z")
    p.add_argument("--max-iter", type=_positive_int, default=None)
    p.add_argument("--kappa", type=_positive_float, default=1.0)
    p.add_argument("--no-cell-test", action="store_true", help="classify cell centres only")
    p.add_argument("--supersample", action="store_true")
    p.add_argument("--max-period", type=_positive_int, default=16)
    p.add_argument("--siegel-trap", choices=("boundary", "disk"), default="boundary")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gasketforge", description="Julia-set rasters, parameter search and gasket checks.")
    parser.add_argument("--version", action="version", version=f"gasketforge {__version__}")
    parser.add_argument("--config", type=Path, default=None,
                        help="JSON file whose keys mirror the long flags (flags win)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("render-julia", help="dynamical-plane raster: PNG, GLB1 and sidecar")
    p.add_argument("--family", required=True)
    _window_args(p)
    _render_args(p)
    p.add_argument("--out", type=Path, required=True, help="GLB1 path; .png/.json written alongside")

    p = sub.add_parser("render-param", help="parameter-plane escape raster")
    p.add_argument("--family", required=True, help="free parameter may be omitted")
    _window_args(p, width=3.0)
    p.add_argument("--max-iter", type=_positive_int, default=2000)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("solve", help="Newton search for a critical-orbit relation")
    p.add_argument("--family", required=True, help="free parameter may be omitted")
    p.add_argument("--preperiod", type=_nonneg_int, default=0, help="k; 0 asks for a supercycle")
    p.add_argument("--period", type=_positive_int, required=True)
    p.add_argument("--seed", type=_complex, required=True)
    p.add_argument("--tol", type=_positive_float, default=1e-12)
    p.add_argument("--max-newton", type=_positive_int, default=100)
    p.add_argument("--critical", type=_critical, default="auto", help="'auto' or a candidate index")
    p.add_argument("--reference", type=_complex, default=None, help="report whether the result lies within 1e-6")
    p.add_argument("--out", type=Path, default=None, help="JSON record path (default: stdout)")

    p = sub.add_parser("verify-gasket", help="check the gasket conditions on a GLB1 label file")
    p.add_argument("--labels", type=Path, required=True)
    p.add_argument("--max-contacts", type=_positive_int, default=3, help="N")
    p.add_argument("--touch-radius", type=_positive_int, default=2)
    p.add_argument("--min-area", type=_positive_int, default=None)
    p.add_argument("--out", type=Path, default=None, help="report path (default: stdout)")

    p = sub.add_parser("estimate-dim", help="box-counting dimension of the label-0 cells")
    p.add_argument("--labels", type=Path, required=True)
    p.add_argument("--scales", type=_int_list, default=[1, 2, 4, 8, 16, 32])
    p.add_argument("--out", type=Path, default=None)

    p = sub.add_parser("area-ladder", help="undecided fraction over resolutions and budgets")
    p.add_argument("--family", required=True)
    _window_args(p)
    _render_args(p)
    p.add_argument("--resolutions", type=_int_list, default=[128, 256])
    p.add_argument("--budgets", type=_int_list, default=[1000, 10000, 20000])
    p.add_argument("--out", type=Path, required=True, help="CSV path; a .json record is written alongside")

    p = sub.add_parser("synth-gasket", help="rasterised Sierpinski gasket fixture")
    p.add_argument("--depth", type=_positive_int, required=True)
    p.add_argument("--size", type=_positive_int, required=True)
    p.add_argument("--out", type=Path, required=True)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    """Install the --config file's values as subcommand defaults, then parse,
    so explicit flags override the file and the file may supply required flags."""
    argv = _glue_negative_values(argv)
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", type=Path, default=None)
    known, rest = pre.parse_known_args(argv)
    command = next((t for t in rest if not t.startswith("-")), None)
    subparsers = _subparsers(parser)
    if known.config is None or command not in subparsers:
        return parser.parse_args(argv)
    try:
        config = json.loads(Path(known.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {known.config}: {exc}") from None
    if not isinstance(config, dict):
        raise UsageError("config file must hold a JSON object")
    subparser = subparsers[command]
    actions = {a.dest: a for a in subparser._actions if a.dest != "help"}
    defaults = {}
    for key, value in config.items():
        dest = key.lstrip("-").replace("-", "_")
        if dest == "command":
            continue
        if dest not in actions:
            raise UsageError(f"config key {key!r} is not a flag of {command}")
        action = actions[dest]
        if action.type is not None and value is not None and not isinstance(value, bool):
            try:
                value = action.type(value)
            except (argparse.ArgumentTypeError, TypeError, ValueError) as exc:
                raise UsageError(f"config key {key!r}: {exc}") from None
        if action.choices is not None and value not in action.choices:
            raise UsageError(f"config key {key!r}: {value!r} not in {list(action.choices)}")
        defaults[dest] = value
        action.required = False
    subparser.set_defaults(**defaults)
    return parser.parse_args(argv)


_NEGATIVE_VALUE = re.compile(r"^-(\d|\.\d|inf|nan)", re.IGNORECASE)


def _glue_negative_values(argv: list[str]) -> list[str]:
    """Turn ``--seed -0.6+0i`` into ``--seed=-0.6+0i``.

    argparse only recognises plain negative reals as values, so complex
    literals with a leading minus would otherwise be read as flags.
    """
    out: list[str] = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if (tok.startswith("--") and "=" not in tok and i + 1 < len(argv)
                and _NEGATIVE_VALUE.match(argv[i + 1])):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def _subparsers(parser) -> dict:
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices
    return {}


# --- helpers -----------------------------------------------------------------------


def _resolved(args) -> dict:
    out = {}
    for k, v in sorted(vars(args).items()):
        if isinstance(v, Path):
            v = str(v)
        elif isinstance(v, complex):
            v = format_complex(v)
        out[k] = v
    return out


def _provenance(args, argv) -> dict:
    return {"tool": "gasketforge", "version": __version__, "command": args.command,
            "argv": list(argv), "config": _resolved(args)}


def _shape(args) -> tuple[int, int]:
    return args.cols or args.size, args.rows or args.size


def _window(args, chart="finite"):
    from gasketforge.raster import Window

    return Window(args.center, args.width, args.height or args.width, chart)


def _render_config(args):
    from gasketforge.raster import RenderConfig

    return RenderConfig(max_iter=args.max_iter, cell_test=not args.no_cell_test, kappa=args.kappa,
                        supersample=args.supersample, max_period=args.max_period,
                        siegel_mode=args.siegel_trap, workers=args.workers)


def _legend_json(legend: dict) -> dict:
    out = {}
    for k, (kind, pt) in sorted(legend.items()):
        entry = {"kind": kind}
        if pt is not None:
            entry["chart"] = "finite" if pt.chart == 0 else "infinity"
            entry["value"] = [pt.value.real, pt.value.imag]
        out[str(k)] = entry
    return out


def _sibling(path: Path, suffix: str) -> Path:
    return path.with_name(path.stem + suffix)


def _emit(obj, out: Path | None):
    if out is None:
        sys.stdout.write(gio.dumps(obj))
    else:
        gio.write_json(out, obj)


# --- subcommands ----------------------------------------------------------------


def cmd_render_julia(args, prov) -> int:
    from gasketforge.raster import render_dynamical

    family = parse_family(args.family)
    cols, rows = _shape(args)
    cfg = _render_config(args)
    grid = render_dynamical(family, _window(args, args.chart), cols, rows, cfg)
    arr = grid.as_array()
    gio.write_glb1(args.out, arr)
    gio.write_png(_sibling(args.out, ".png"), gio.palette_image(arr))
    sidecar = {
        "window": grid.window.to_dict(),
        "cols": cols,
        "rows": rows,
        "family": family.descriptor(),
        "legend": _legend_json(grid.legend),
        "cfg": cfg.to_dict(),
        "undecided_fraction": float(np.mean(arr == 0)),
        "provenance": prov,
    }
    gio.write_json(_sibling(args.out, ".json"), sidecar)
    return EXIT_OK


def cmd_render_param(args, prov) -> int:
    from gasketforge.parameter import NON_ESCAPING, render_parameter_plane

    family = parse_family(args.family, require_param=False)
    cols, rows = _shape(args)
    grid = render_parameter_plane(family, _window(args), cols, rows, args.max_iter, args.workers)
    verdicts = grid.as_array()
    steps = grid.as_array("steps")
    gio.write_glb1(args.out, verdicts)
    gio.write_glb1(_sibling(args.out, ".steps.glb"), steps)
    gio.write_png(_sibling(args.out, ".png"), gio.shade_image(steps, verdicts == NON_ESCAPING))
    sidecar = {
        "window": grid.window.to_dict(),
        "cols": cols,
        "rows": rows,
        "family": family.kind,
        "free_parameter": family.free_parameter,
        "labels": {"0": "excluded", "1": "escaping", "2": "non-escaping"},
        "steps_file": str(_sibling(args.out, ".steps.glb").name),
        "max_iter": args.max_iter,
        "escaping_fraction": grid.escaping_fraction,
        "provenance": prov,
    }
    gio.write_json(_sibling(args.out, ".json"), sidecar)
    return EXIT_OK


def cmd_solve(args, prov) -> int:
    from gasketforge.solver import OrbitCondition, solve_preperiodic, solve_supercycle

    family = parse_family(args.family, require_param=False)
    if args.preperiod == 0:
        res = solve_supercycle(family, args.period, args.critical, args.seed, args.tol, args.max_newton,
                               reference=args.reference)
    else:
        cond = OrbitCondition(family, args.preperiod, args.period, args.critical)
        res = solve_preperiodic(cond, args.seed, args.tol, args.max_newton, reference=args.reference)
    record = res.to_record()
    record["provenance"] = prov
    _emit(record, args.out)
    return EXIT_OK


def cmd_verify_gasket(args, prov) -> int:
    from gasketforge.gasket import verify_grid

    labels = gio.read_glb1(args.labels)
    report = verify_grid(labels, args.max_contacts, args.touch_radius, args.min_area).to_dict()
    report["params"]["labels"] = str(args.labels)
    report["provenance"] = prov
    _emit(report, args.out)
    return EXIT_OK if report["pass"] else EXIT_FAIL


def cmd_estimate_dim(args, prov) -> int:
    from gasketforge.measure import box_dimension

    labels = gio.read_glb1(args.labels)
    est = box_dimension(labels == 0, args.scales)
    record = est.to_dict()
    record["mask"] = "label 0"
    record["provenance"] = prov
    _emit(record, args.out)
    return EXIT_OK


def cmd_area_ladder(args, prov) -> int:
    from gasketforge.measure import ladder_csv, undecided_area_ladder

    family = parse_family(args.family)
    rows = undecided_area_ladder(family, _window(args, args.chart), args.resolutions, args.budgets,
                                 _render_config(args))
    args.out.write_text(ladder_csv(rows))
    gio.write_json(_sibling(args.out, ".json"), {
        "family": family.descriptor(),
        "window": _window(args, args.chart).to_dict(),
        "rows": [{"resolution": r.resolution, "budget": r.budget, "undecided": r.undecided} for r in rows],
        "provenance": prov,
    })
    return EXIT_OK


def cmd_synth_gasket(args, prov) -> int:
    from gasketforge.gasket import synth_gasket

    grid = synth_gasket(args.depth, args.size)
    arr = grid.as_array()
    gio.write_glb1(args.out, arr)
    gio.write_png(_sibling(args.out, ".png"), gio.palette_image(arr))
    gio.write_json(_sibling(args.out, ".json"), {
        "depth": args.depth, "size": args.size, "components": int(arr.max()), "provenance": prov,
    })
    return EXIT_OK


COMMANDS = {
    "render-julia": cmd_render_julia,
    "render-param": cmd_render_param,
    "solve": cmd_solve,
    "verify-gasket": cmd_verify_gasket,
    "estimate-dim": cmd_estimate_dim,
    "area-ladder": cmd_area_ladder,
    "synth-gasket": cmd_synth_gasket,
}


# subcommands that search over the free parameter, so it may be left out
_PARAM_OPTIONAL = ("render-param", "solve")


def _error(kind: str, message: str, **extra) -> None:
    sys.stderr.write(json.dumps({"error": kind, "message": message, **extra}) + "\n")


def dispatch(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
    except UsageError as exc:
        sys.stderr.write(parser.format_usage())
        _error("usage", str(exc))
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    if getattr(args, "family", None) is not None:
        try:
            parse_family(args.family, require_param=args.command not in _PARAM_OPTIONAL)
        except ValueError as exc:
            sys.stderr.write(parser.format_usage())
            _error("usage", f"--family: {exc}")
            return EXIT_USAGE
    prov = _provenance(args, argv)
    from gasketforge.gasket import NothingToCheck
    from gasketforge.solver import SolverError

    try:
        return COMMANDS[args.command](args, prov)
    except SolverError as exc:
        _error(exc.kind, str(exc), trace=[[format_complex(t), r] for t, r in exc.trace[-5:]])
        return EXIT_FAIL
    except NothingToCheck as exc:
        _error("verification", str(exc))
        return EXIT_FAIL
    except gio.FormatError as exc:
        _error("input", str(exc))
        return EXIT_FAIL
    except (ValueError, ArithmeticError, OSError) as exc:
        _error("computation", str(exc))
        return EXIT_FAIL


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
