"""Power-law exponents from sweeps, and survival statistics under repeated observation."""

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import integrate

from .errors import InvalidArgument, UnicurrentError
from .propagation import admissible_dt, mass_beyond_estimate, propagate
from .wavefunction import NaturalUnits

PER_DECADE = 8


@dataclass(frozen=True)
class WindowPolicy:
    """Which sweep points enter the fit.

    Points with control value above ``max_control`` (e.g. the validity bound)
    are dropped; the remainder must number at least ``min_points`` and span at
    least ``min_decades``.
    """

    min_points: int = 5
    min_decades: float = 2.0
    max_control: float = math.inf
    min_control: float = 0.0


@dataclass
class SweepResult:
    points: list
    fitted_exponent: float
    exponent_stderr: float
    fitted_prefactor: float
    fit_window: tuple
    observable: str = ""
    partial: bool = False
    meta: dict = field(default_factory=dict)

    def summary(self):
        return {
            "observable": self.observable,
            "exponent": self.fitted_exponent,
            "stderr": self.exponent_stderr,
            "prefactor": self.fitted_prefactor,
            "window": list(self.fit_window),
            "n_points": len(self.points),
            "partial": self.partial,
        }


def _normalise(points):
    out = []
    for p in points:
        if len(p) == 2:
            x, y, e = p[0], p[1], 0.0
        elif len(p) == 3:
            x, y, e = p
        else:
            raise InvalidArgument(f"point must be (x, y) or (x, y, err), got {p!r}")
        out.append((float(x), float(y), float(e)))
    return sorted(out)


def fit_exponent(points, window_policy=WindowPolicy(), observable=""):
    """Ordinary least squares of ``log y`` on ``log x``.

    Returns the slope, its standard error, ``exp(intercept)`` and the range of
    control values actually used.
    """
    pts = _normalise(points)
    used = [p for p in pts if window_policy.min_control <= p[0] <= window_policy.max_control]
    if len(used) < max(window_policy.min_points, 2):
        raise InvalidArgument(f"need at least {window_policy.min_points} points in the window, got {len(used)}")
    x = np.array([p[0] for p in used])
    y = np.array([p[1] for p in used])
    if np.any(x <= 0) or np.any(y <= 0) or not np.all(np.isfinite(y)):
        raise InvalidArgument("log-log fit needs positive, finite values")
    lx, ly = np.log(x), np.log(y)
    span = (lx.max() - lx.min()) / math.log(10)
    if span < window_policy.min_decades - 1e-9:
        raise InvalidArgument(f"fit window spans {span:.2f} decades, need {window_policy.min_decades}")
    n = lx.size
    xm = lx.mean()
    sxx = float(np.sum((lx - xm) ** 2))
    slope = float(np.sum((lx - xm) * (ly - ly.mean())) / sxx)
    intercept = float(ly.mean() - slope * xm)
    resid = ly - (intercept + slope * lx)
    dof = n - 2
    stderr = math.sqrt(float(np.sum(resid**2)) / dof / sxx) if dof > 0 else math.inf
    return SweepResult(pts, slope, stderr, math.exp(intercept), (float(x.min()), float(x.max())), observable)


def log_grid(start, stop, per_decade=PER_DECADE):
    """Logarithmic grid with ``per_decade`` points per decade, endpoints included."""
    if not 0 < start < stop:
        raise InvalidArgument(f"need 0 < start < stop, got {start}, {stop}")
    n = int(round(per_decade * math.log10(stop / start))) + 1
    return np.logspace(math.log10(start), math.log10(stop), max(n, 2))


# ---------------------------------------------------------------------------
# repeated observation


class DecayLaw(Enum):
    ZENO_3_2 = 1.5
    ANTIZENO_1_2 = 0.5


@dataclass(frozen=True)
class SurvivalStatistics:
    law: DecayLaw
    prefactor: float
    total_time: float
    n_systems: int
    step_survival: float
    product_survival: float
    exponential_approx: float
    expected_decays: float

    @property
    def approx_error(self):
        return abs(self.product_survival - self.exponential_approx)


def zeno_survival(law, prefactor, total_time, n):
    """Survival when ``n`` observations split ``total_time`` into steps ``dt = T/n``.

    Each step survives with ``s = 1 - c dt^p``. The product ``s^n`` is compared
    with ``exp(-c T^p n^{1-p})``; for ``p = 3/2`` this is ``exp(-c T^{3/2}/sqrt(n))``
    (the constant there absorbs ``T^{3/2}``), for ``p = 1/2`` it is
    ``exp(-c sqrt(T n))``. Expected number of decays is ``n (1 - s)``.
    """
    law = DecayLaw(law) if not isinstance(law, DecayLaw) else law
    n = int(n)
    if n < 1 or not total_time > 0 or not prefactor >= 0:
        raise InvalidArgument("need n >= 1, T > 0, c >= 0")
    p = law.value
    dt = total_time / n
    leak = prefactor * dt**p
    s = 1.0 - leak
    if s <= 0:
        raise InvalidArgument(f"per-step survival {s:.3g} is not positive; decrease c or dt")
    product = math.exp(n * math.log1p(-leak))
    approx = math.exp(-prefactor * total_time**p * n ** (1 - p))
    return SurvivalStatistics(law, prefactor, total_time, n, s, product, approx, n * leak)


def decay_law(q0_sq, gamma, t, breakpoints=None):
    """``exp(-gamma int_0^t |q0(t')|^2 dt')``; ``breakpoints`` mark kinks of the integrand."""
    if not gamma > 0:
        raise InvalidArgument(f"gamma must be positive, got {gamma}")
    if t < 0:
        raise InvalidArgument("t must be non-negative")
    if t == 0:
        return 1.0
    pts = None if breakpoints is None else [b for b in breakpoints if 0 < b < t] or None
    val, _ = integrate.quad(q0_sq, 0.0, t, points=pts, limit=200, epsabs=1e-13, epsrel=1e-12)
    return math.exp(-gamma * val)


# ---------------------------------------------------------------------------
# sweeps


def _observable(kind, wf, control, units, c):
    if kind == "p_out":
        res = propagate(wf, control, units)
        return res.p_out, res.p_out_error
    if kind == "current":
        res = propagate(wf, control, units)
        return res.p_out / control, res.p_out_error / control
    if kind == "mass_beyond":
        return mass_beyond_estimate(wf, c, units.delta_t(control), units)
    raise InvalidArgument(f"unknown sweep observable {kind!r}")


def sweep(wf, observable, start, stop, units=NaturalUnits(), c=1.0, per_decade=PER_DECADE, policy=None):
    """Evaluate ``observable`` on a log grid and fit its exponent.

    The control variable is ``dt`` for ``p_out``/``current`` and ``alpha`` for
    ``mass_beyond``. Points beyond the validity bound are skipped. If a point
    fails, the points computed so far are attached to the raised error as
    ``partial_result``.
    """
    limit = admissible_dt(wf, units)
    if observable == "mass_beyond":
        limit = units.alpha(limit)
    grid = [x for x in log_grid(start, stop, per_decade) if x <= limit]
    pts = []
    for x in grid:
        try:
            y, err = _observable(observable, wf, float(x), units, c)
        except UnicurrentError as exc:
            exc.partial_result = SweepResult(pts, math.nan, math.nan, math.nan, (), observable, True)
            raise
        pts.append((float(x), float(y), float(err)))
    policy = policy or WindowPolicy()
    result = fit_exponent(pts, policy, observable)
    result.meta["pruned"] = len(log_grid(start, stop, per_decade)) - len(grid)
    return result


def run_sweep(experiment, out_dir=None):
    """Run a sweep described by an :class:`~unicurrent.config.ExperimentConfig`.

    Writes ``sweep.csv`` / ``sweep.json`` into ``out_dir`` when given.
    """
    from .runner import run_sweep as _run

    return _run(experiment, out_dir)
