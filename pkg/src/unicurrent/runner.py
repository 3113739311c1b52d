"""Execute an :class:`ExperimentConfig` and persist its artifacts.

Each handler returns ``(summary, files)``; the summary dict is also written as
``<kind>.json``. Nothing time-dependent goes into the files.
"""

import math
import os

from . import diffusion, output, propagation, scaling
from .config import ConfigError
from .errors import UnicurrentError

DEFAULT_SWEEP = {"start": 1e-5, "stop": 1e-2, "per_decade": scaling.PER_DECADE}


def _p(cfg, name, default=None, required=False):
    if name in cfg.params:
        return cfg.params[name]
    if required:
        raise ConfigError(f"params.{name} is required for kind {cfg.kind!r}")
    return default


def _formats(cfg):
    fmts = [output.CSV]
    if cfg.outputs.get("gnuplot"):
        fmts.append(output.GNUPLOT)
    return tuple(fmts)


def parse_model(spec):
    spec = dict(spec or {"name": "brownian", "sigma": math.sqrt(2.0)})
    name = spec.pop("name", "brownian")
    try:
        if name == "brownian":
            return diffusion.DiffusionModel.brownian(float(spec.get("sigma", 1.0)))
        if name == "ou":
            return diffusion.DiffusionModel.ornstein_uhlenbeck(
                float(spec.get("theta", 1.0)), float(spec.get("sigma", math.sqrt(2.0))), float(spec.get("mean", 0.0))
            )
        if name == "custom-polynomial-drift":
            return diffusion.DiffusionModel.polynomial_drift(spec["coeffs"], float(spec.get("sigma", 1.0)))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad model: {exc}") from exc
    raise ConfigError(f"unknown model {name!r}")


def parse_density(spec):
    spec = dict(spec or {})
    name = spec.pop("name", "gaussian")
    makers = {
        "gaussian": diffusion.DensityField.gaussian,
        "ou-transient": diffusion.DensityField.ou_transient,
        "absorbed-brownian": diffusion.DensityField.absorbed_brownian,
    }
    if name not in makers:
        raise ConfigError(f"unknown density {name!r}")
    try:
        return makers[name](**{k: float(v) for k, v in spec.items()})
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad density: {exc}") from exc


def parse_sampler(spec):
    if spec is None:
        return diffusion.point_mass(-1.0)
    if "point" in spec:
        return diffusion.point_mass(float(spec["point"]))
    if "normal" in spec:
        mean, sd = spec["normal"]
        return diffusion.normal_sampler(float(mean), float(sd))
    raise ConfigError("initial sampler must be {'point': x0} or {'normal': [mean, sd]}")


def run_sweep(cfg, out_dir=None):
    """Sweep ``dt`` (``p_out`` / ``current``) or ``alpha`` (``mass_beyond``) and fit the exponent.

    On failure the points gathered so far are written with ``partial: true``
    before the error is re-raised.
    """
    wf = cfg.initial_state()
    units = cfg.natural_units()
    sw = dict(DEFAULT_SWEEP, **(cfg.sweep or {}))
    if cfg.kind == "mass-beyond":
        observable = "mass_beyond"
    elif cfg.kind == "current":
        observable = "current"
    else:
        observable = _p(cfg, "observable", "p_out")
    policy = scaling.WindowPolicy(
        min_points=int(_p(cfg, "min_points", 5)), min_decades=float(_p(cfg, "min_decades", 2.0))
    )
    h = cfg.config_hash()
    try:
        result = scaling.sweep(
            wf, observable, float(sw["start"]), float(sw["stop"]), units, float(_p(cfg, "c", 1.0)),
            int(sw["per_decade"]), policy,
        )
    except UnicurrentError as exc:
        partial = getattr(exc, "partial_result", None)
        if out_dir is not None and partial is not None:
            output.write_csv(os.path.join(out_dir, "sweep.csv"), ("control", "value", "error"), partial.points, h)
            output.write_json(os.path.join(out_dir, "sweep.json"), partial.summary(), h)
        raise
    files = []
    if out_dir is not None:
        files += output.emit_plot_data(result, out_dir, "sweep", h, _formats(cfg))
        files.append(output.write_json(os.path.join(out_dir, "sweep.json"), result.summary(), h))
    return result, files


def _sweep_handler(cfg, out_dir):
    result, files = run_sweep(cfg, out_dir)
    s = result.summary()
    expected = _p(cfg, "expected_exponent")
    if expected is not None:
        s["expected_exponent"] = expected
        s["within_tolerance"] = abs(result.fitted_exponent - expected) <= float(_p(cfg, "exponent_tol", 0.1))
    return s, files


def _propagate(cfg, out_dir):
    res = propagation.propagate(cfg.initial_state(), float(_p(cfg, "delta_t", required=True)), cfg.natural_units())
    s = {"observable": "p_out", "p_out": res.p_out, "p_out_error": res.p_out_error, "alpha": res.alpha,
         "validity_ok": res.validity_ok}
    files = output.emit_plot_data(res, out_dir, "psi", cfg.config_hash(), _formats(cfg)) if out_dir else []
    return s, files


def _mass_beyond(cfg, out_dir):
    if cfg.sweep is not None:
        return _sweep_handler(cfg, out_dir)
    dt = float(_p(cfg, "delta_t", required=True))
    c = float(_p(cfg, "c", 1.0))
    val, err = propagation.mass_beyond_estimate(cfg.initial_state(), c, dt, cfg.natural_units())
    return {"observable": "mass_beyond", "c": c, "delta_t": dt, "value": val, "error": err}, []


def _current(cfg, out_dir):
    if cfg.sweep is not None:
        return _sweep_handler(cfg, out_dir)
    dt = float(_p(cfg, "delta_t", required=True))
    est = propagation.unidirectional_current_lr(cfg.initial_state(), dt, cfg.natural_units())
    return {"observable": "j_lr", "delta_t": dt, "value": est.value, "error": est.error}, []


def _diffusion_flux(cfg, out_dir):
    model = parse_model(_p(cfg, "model", {"name": "ou"}))
    density = parse_density(_p(cfg, "density", {"name": "ou-transient"}))
    t = float(_p(cfg, "t", 0.0))
    points = [float(x) for x in _p(cfg, "x1", [0.0])]
    dts = tuple(float(d) for d in _p(cfg, "delta_ts", (1e-4, 2.5e-5, 6.25e-6, 1.5625e-6)))
    rows = []
    for x1 in points:
        est, err = diffusion.extrapolate_net_flux(model, density, x1, t, dts)
        rows.append((x1, est, err, diffusion.net_flux_closed_form(model, density, x1, t)))
    worst = max(abs(r[1] - r[3]) / max(abs(r[3]), 1e-300) for r in rows)
    files = []
    if out_dir:
        files.append(output.write_csv(os.path.join(out_dir, "flux.csv"), ("x1", "j_net_limit", "error", "j_net_closed"),
                                      rows, cfg.config_hash()))
    return {"observable": "j_net", "points": len(rows), "max_rel_diff": worst}, files


def _simulate(cfg, out_dir):
    model = parse_model(_p(cfg, "model"))
    curve = diffusion.simulate_absorbing(
        model,
        parse_sampler(_p(cfg, "initial")),
        float(_p(cfg, "boundary", 0.0)),
        float(_p(cfg, "t_max", 1.0)),
        float(_p(cfg, "dt_step", 1e-3)),
        int(_p(cfg, "n_paths", 10000)),
        cfg.seed,
        bool(_p(cfg, "bridge", True)),
        int(_p(cfg, "record_every", 1)),
    )
    files = output.emit_plot_data(curve, out_dir, "survival", cfg.config_hash(), _formats(cfg)) if out_dir else []
    return {"observable": "survival", "S_final": float(curve.survival[-1]), "n_paths": curve.n_paths}, files


def _zeno(cfg, out_dir):
    law = scaling.DecayLaw[_p(cfg, "law", "ZENO_3_2")]
    c = float(_p(cfg, "c", 0.1))
    T = float(_p(cfg, "T", 1.0))
    ns = [int(n) for n in _p(cfg, "N", [10, 100, 1000, 10000])]
    rows = []
    for n in ns:
        st = scaling.zeno_survival(law, c, T, n)
        rows.append((n, st.step_survival, st.product_survival, st.exponential_approx, st.expected_decays))
    files = []
    if out_dir:
        files.append(output.write_csv(os.path.join(out_dir, "zeno.csv"),
                                      ("N", "step_survival", "product", "exp_approx", "expected_decays"),
                                      rows, cfg.config_hash()))
    return {"observable": "expected_decays", "law": law.name, "expected_decays": [r[4] for r in rows]}, files


def _moments(cfg, out_dir):
    sigma = float(_p(cfg, "sigma", 1.0))
    vals = diffusion.gaussian_moment_identities(sigma)
    files = []
    if out_dir:
        files.append(output.write_csv(os.path.join(out_dir, "moments.csv"), ("sigma", "m4", "m2", "m2_quarter"),
                                      [(sigma,) + tuple(vals)], cfg.config_hash()))
    return {"observable": "moments", "sigma": sigma, "values": list(vals)}, files


HANDLERS = {
    "propagate": _propagate,
    "sweep-dt": _sweep_handler,
    "mass-beyond": _mass_beyond,
    "current": _current,
    "diffusion-flux": _diffusion_flux,
    "simulate-absorbing": _simulate,
    "zeno": _zeno,
    "moments": _moments,
}


def run_experiment(cfg, out_dir=None):
    summary, files = HANDLERS[cfg.kind](cfg, out_dir)
    summary = dict(summary, kind=cfg.kind)
    if out_dir is not None:
        files.append(output.write_json(os.path.join(out_dir, f"{cfg.kind}.json"), summary, cfg.config_hash()))
    return summary, files
