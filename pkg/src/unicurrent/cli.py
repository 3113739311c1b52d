"""Command-line front end.

    unicurrent run CONFIG [--out-dir DIR] [--seed N] [--tol X] [--threads N]
    unicurrent <kind> [--config CONFIG] [kind-specific flags]

Flags override config fields, which override defaults. Exit status: 0 ok,
2 unreadable config or bad command line, 3 invalid configuration,
4 numerical failure. Errors are reported as one JSON object on stderr.
"""

import argparse
import json
import os
import sys
import time

from ._version import __version__
from .config import KINDS, ConfigError, ExperimentConfig
from .errors import ConvergenceFailure, InvalidArgument, UnicurrentError

EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_NUMERICAL = 4


class _CliError(Exception):
    def __init__(self, code, kind, message):
        super().__init__(message)
        self.code = code
        self.kind = kind


def _common(p):
    p.add_argument("--config", help="experiment config (JSON)")
    p.add_argument("--out-dir", help="output directory (default $UNICURRENT_OUT_DIR or ./unicurrent-out)")
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int, help="cap on worker threads")
    p.add_argument("--tol", type=float)
    p.add_argument("--gnuplot", action="store_true", help="also write a gnuplot script")


def build_parser():
    parser = argparse.ArgumentParser(prog="unicurrent", description="short-time propagation and uni-directional currents")
    parser.add_argument("--version", action="version", version=f"unicurrent {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run the experiment a config describes")
    p.add_argument("config_path")
    _common(p)

    p = sub.add_parser("validate-config", help="check a config and print its hash")
    p.add_argument("config_path")

    for kind in KINDS:
        p = sub.add_parser(kind)
        _common(p)
        if kind in ("propagate", "mass-beyond", "current"):
            p.add_argument("--dt", type=float, dest="delta_t")
        if kind == "mass-beyond":
            p.add_argument("--c", type=float)
        if kind in ("sweep-dt", "mass-beyond", "current"):
            p.add_argument("--start", type=float)
            p.add_argument("--stop", type=float)
        if kind == "moments":
            p.add_argument("--sigma", type=float)
        if kind == "zeno":
            p.add_argument("--law", choices=["ZENO_3_2", "ANTIZENO_1_2"])
            p.add_argument("--c", type=float)
            p.add_argument("--T", type=float)
            p.add_argument("--N", type=int, nargs="+")
        if kind == "simulate-absorbing":
            p.add_argument("--n-paths", type=int)
            p.add_argument("--t-max", type=float)
            p.add_argument("--dt-step", type=float)
    return parser


def _load(path):
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise _CliError(EXIT_PARSE, "io", str(exc)) from exc
    except json.JSONDecodeError as exc:
        raise _CliError(EXIT_PARSE, "parse", f"{path}: {exc}") from exc
    if not isinstance(data, dict):
        raise _CliError(EXIT_PARSE, "parse", f"{path}: top level must be an object")
    return data


def _config_from_args(args):
    if args.command == "run":
        data = _load(args.config_path)
    else:
        data = _load(args.config) if args.config else {}
        data["kind"] = args.command
    params = dict(data.get("params") or {})
    for name in ("delta_t", "c", "sigma", "law", "T", "N", "n_paths", "t_max", "dt_step"):
        v = getattr(args, name, None)
        if v is not None:
            params[name] = v
    data["params"] = params
    if getattr(args, "start", None) is not None or getattr(args, "stop", None) is not None:
        sw = dict(data.get("sweep") or {})
        if args.start is not None:
            sw["start"] = args.start
        if args.stop is not None:
            sw["stop"] = args.stop
        data["sweep"] = sw
    if args.seed is not None:
        data["seed"] = args.seed
    if args.tol is not None:
        data["tol"] = args.tol
    if args.gnuplot:
        data["outputs"] = dict(data.get("outputs") or {}, gnuplot=True)
    return ExperimentConfig.from_dict(data)


def _out_dir(args, cfg):
    return args.out_dir or cfg.outputs.get("dir") or os.environ.get("UNICURRENT_OUT_DIR") or "unicurrent-out"


def _set_threads(n):
    if n is None:
        return
    if n < 1:
        raise ConfigError("--threads must be >= 1")
    from ._accel import HAVE_NUMBA

    if HAVE_NUMBA:
        import numba

        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))


def _fmt(v):
    return f"{v:.12g}"


def summary_line(summary, wall):
    kind = summary["kind"]
    parts = [f"{kind}: observable={summary.get('observable', kind)}"]
    if "exponent" in summary:
        parts.append(f"exponent={summary['exponent']:.3f}±{summary['stderr']:.3f}")
    for key in ("p_out", "value", "S_final", "max_rel_diff"):
        if key in summary:
            parts.append(f"{key}={_fmt(summary[key])}")
    parts.append(f"wall={wall:.2f}s")
    return " ".join(parts)


def _dispatch(args):
    from .runner import run_experiment

    if args.command == "validate-config":
        cfg = ExperimentConfig.from_dict(_load(args.config_path))
        print(f"ok kind={cfg.kind} config-hash={cfg.config_hash()}")
        return 0
    cfg = _config_from_args(args)
    _set_threads(args.threads)
    out = _out_dir(args, cfg)
    t0 = time.perf_counter()
    summary, files = run_experiment(cfg, out)
    wall = time.perf_counter() - t0
    if cfg.kind == "moments":
        print(" ".join(_fmt(v) for v in summary["values"]))
    print(summary_line(summary, wall))
    for f in files:
        print(f"wrote {f}")
    return 0


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except _CliError as exc:
        err = (exc.code, exc.kind, str(exc))
    except (ConfigError, InvalidArgument) as exc:
        err = (EXIT_VALIDATION, "validation", str(exc))
    except (ConvergenceFailure, ArithmeticError, UnicurrentError) as exc:
        err = (EXIT_NUMERICAL, "numerical", str(exc))
    code, kind, message = err
    payload = {"error": kind, "message": message, "exit_code": code}
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
