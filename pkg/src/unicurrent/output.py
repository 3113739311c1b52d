"""Artifact writers. Every file starts with a comment line carrying the tool
version and the config hash; numbers are written with ``repr`` so that the
same inputs give byte-identical files."""

import json
import os

from ._version import __version__
from .config import canonical_json

GNUPLOT = "gnuplot"
CSV = "csv"


def header(config_hash):
    return f"# unicurrent {__version__} config-hash={config_hash}\n"


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    if hasattr(v, "item"):
        return _fmt(v.item())
    return str(v)


def write_csv(path, columns, rows, config_hash):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header(config_hash))
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    return path


def write_json(path, payload, config_hash):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    doc = dict(payload, version=__version__)
    doc["config-hash"] = config_hash
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(canonical_json(doc) + "\n")
    return path


def _gnuplot(csv_name, xlabel, ylabel, loglog, fit=None):
    lines = [
        "set datafile separator ','",
        "set key top left",
        f"set xlabel '{xlabel}'",
        f"set ylabel '{ylabel}'",
    ]
    if loglog:
        lines.append("set logscale xy")
    plot = f"plot '{csv_name}' using 1:2 skip 2 with points title 'data'"
    if fit is not None:
        prefactor, exponent = fit
        plot += f", {prefactor!r}*x**{exponent!r} with lines title 'fit'"
    lines.append(plot)
    return "\n".join(lines) + "\n"


def emit_plot_data(result, out_dir, stem, config_hash, formats=(CSV,)):
    """Write plot-ready data for a sweep, survival curve or propagated grid.

    Returns the list of files written. A gnuplot script, when requested,
    reads the CSV written next to it.
    """
    from .diffusion import SurvivalCurve
    from .propagation import PropagationResult
    from .scaling import SweepResult

    csv_path = os.path.join(out_dir, stem + ".csv")
    files = []
    if isinstance(result, SweepResult):
        rows = [(x, y, e) for x, y, e in result.points]
        files.append(write_csv(csv_path, ("control", "value", "error"), rows, config_hash))
        script = _gnuplot(
            stem + ".csv", "control", result.observable or "value", True, (result.fitted_prefactor, result.fitted_exponent)
        )
    elif isinstance(result, SurvivalCurve):
        rows = zip(result.t.tolist(), result.survival.tolist(), result.stderr.tolist())
        files.append(write_csv(csv_path, ("t", "S", "stderr"), rows, config_hash))
        script = _gnuplot(stem + ".csv", "t", "S", False)
    elif isinstance(result, PropagationResult):
        g = result.grid
        y = g.x.tolist()
        s = g.samples
        rows = zip(y, s.real.tolist(), s.imag.tolist(), (abs(s) ** 2).tolist())
        files.append(write_csv(csv_path, ("y", "re_psi", "im_psi", "abs_psi_sq"), rows, config_hash))
        script = _gnuplot(stem + ".csv", "y", "|psi|^2", False).replace("using 1:2", "using 1:4")
    else:
        raise TypeError(f"no plot format for {type(result).__name__}")
    if GNUPLOT in formats:
        path = os.path.join(out_dir, stem + ".gp")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(header(config_hash))
            fh.write(script)
        files.append(path)
    return files
