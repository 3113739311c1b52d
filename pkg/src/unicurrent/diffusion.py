"""Fluxes of a one-dimensional diffusion ``dx = b dt + sigma dw`` across a point.

The finite-``dt`` uni-directional fluxes count the probability that moves from
one ray into the other in a single Gaussian step of length ``dt``; their
difference tends to the classical current ``-(sigma^2 p / 2)' + b p``.
Absorbing boundaries are checked against Euler-Maruyama simulation.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate, special

from . import kernels
from .errors import ConvergenceFailure, InvalidArgument
from .fresnel import _neville_at_zero

FD_STEP = 1e-4
BLOCK_PATHS = 8192
STEP_CHUNK = 256
_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _fd(f, x, t, h):
    # 4th-order central difference in x
    return (-f(x + 2 * h, t) + 8 * f(x + h, t) - 8 * f(x - h, t) + f(x - 2 * h, t)) / (12 * h)


@dataclass(frozen=True)
class DiffusionModel:
    """Drift ``b(x, t)`` and noise ``sigma(x, t)``, vectorised over ``x``.

    ``drift_coeffs`` / ``sigma_const`` are set by the polynomial built-ins and
    are what the Monte Carlo kernel needs; general callables are fine for the
    quadrature routines.
    """

    drift: Callable
    sigma: Callable
    sigma_dx: Optional[Callable] = None
    scale: float = 1.0
    drift_coeffs: Optional[tuple] = None
    sigma_const: Optional[float] = None
    name: str = "custom"

    @classmethod
    def brownian(cls, sigma=1.0):
        return cls.polynomial_drift((0.0,), sigma, name="brownian")

    @classmethod
    def ornstein_uhlenbeck(cls, theta=1.0, sigma=math.sqrt(2.0), mean=0.0):
        return cls.polynomial_drift((theta * mean, -theta), sigma, name="ou")

    @classmethod
    def polynomial_drift(cls, coeffs, sigma=1.0, name="custom-polynomial-drift"):
        coeffs = tuple(float(c) for c in coeffs) or (0.0,)
        sigma = float(sigma)
        if not sigma > 0:
            raise InvalidArgument(f"sigma must be positive, got {sigma}")
        c = np.array(coeffs)
        return cls(
            drift=lambda x, t: np.polynomial.polynomial.polyval(x, c) + 0.0 * np.asarray(x),
            sigma=lambda x, t: np.full(np.shape(x), sigma) if np.ndim(x) else sigma,
            sigma_dx=lambda x, t: np.zeros(np.shape(x)) if np.ndim(x) else 0.0,
            drift_coeffs=coeffs,
            sigma_const=sigma,
            name=name,
        )

    def sigma_sq_dx(self, x, t):
        if self.sigma_dx is not None:
            return 2.0 * self.sigma(x, t) * self.sigma_dx(x, t)
        return _fd(lambda z, s: self.sigma(z, s) ** 2, x, t, FD_STEP * self.scale)


@dataclass(frozen=True)
class DensityField:
    """Density ``p(x, t)`` with optional analytic ``dp/dx``."""

    p: Callable
    dp: Optional[Callable] = None
    scale: float = 1.0
    absorbing_at: Optional[float] = None

    def __call__(self, x, t):
        return self.p(x, t)

    def dx(self, x, t):
        if self.dp is not None:
            return self.dp(x, t)
        return _fd(self.p, x, t, FD_STEP * self.scale)

    @classmethod
    def zero(cls):
        return cls(lambda x, t: np.zeros(np.shape(x)) if np.ndim(x) else 0.0, lambda x, t: 0.0 * np.asarray(x))

    @classmethod
    def gaussian(cls, mean=0.0, var=1.0):
        """Time-independent normal density."""
        sd = math.sqrt(var)

        def p(x, t):
            return np.exp(-((x - mean) ** 2) / (2 * var)) / (_SQRT_2PI * sd)

        return cls(p, lambda x, t: -(x - mean) / var * p(x, t), sd)

    @classmethod
    def ou_transient(cls, theta=1.0, sigma=math.sqrt(2.0), mean0=1.0, var0=1.0):
        """Gaussian solution of the OU Fokker-Planck equation with drift ``-theta x``."""
        v_inf = sigma * sigma / (2 * theta)

        def moments(t):
            return mean0 * np.exp(-theta * t), v_inf + (var0 - v_inf) * np.exp(-2 * theta * t)

        def p(x, t):
            m, v = moments(t)
            return np.exp(-((x - m) ** 2) / (2 * v)) / np.sqrt(2 * np.pi * v)

        def dp(x, t):
            m, v = moments(t)
            return -(x - m) / v * p(x, t)

        return cls(p, dp, math.sqrt(min(var0, v_inf)))

    @classmethod
    def absorbed_brownian(cls, x0=-1.0, sigma=math.sqrt(2.0), boundary=0.0):
        """Method-of-images density for a point mass at ``x0 < boundary``; zero beyond it."""
        if not x0 < boundary:
            raise InvalidArgument("start must lie left of the absorbing boundary")

        def g(z, t):
            v = sigma * sigma * t
            return np.exp(-z * z / (2 * v)) / np.sqrt(2 * np.pi * v)

        mirror = 2 * boundary - x0

        def p(x, t):
            x = np.asarray(x, dtype=float)
            val = g(x - x0, t) - g(x - mirror, t)
            return np.where(x < boundary, val, 0.0)[()]

        def dp(x, t):
            x = np.asarray(x, dtype=float)
            v = sigma * sigma * t
            val = -(x - x0) / v * g(x - x0, t) + (x - mirror) / v * g(x - mirror, t)
            # left derivative at the boundary itself
            return np.where(x <= boundary, val, 0.0)[()]

        return cls(p, dp, boundary - x0, boundary)


@dataclass(frozen=True)
class FluxEstimate:
    j_lr: float
    j_rl: float
    j_net: float
    delta_t: float
    error: float = 0.0
    divergent: bool = False


def _one_sided(model, density, x1, t, dt, direction, tol):
    # (1/dt) int_{from ray} dy p(y, t - dt) Prob(step lands in the other ray);
    # with y = x1 - s eta sqrt(dt) the landing probability is erfc(...)/2 exactly
    s = 1.0 if direction == "lr" else -1.0
    r = math.sqrt(dt)

    def f(eta):
        y = x1 - s * eta * r
        sig = model.sigma(y, t)
        z = (eta - s * model.drift(y, t) * r) / (sig * math.sqrt(2.0))
        return float(density(y, t - dt) * 0.5 * special.erfc(z))

    val, err = integrate.quad(f, 0.0, math.inf, epsabs=0.0, epsrel=tol, limit=200)
    if not math.isfinite(val) or err > 10 * tol * max(abs(val), 1e-300):
        raise ConvergenceFailure(f"flux quadrature error {err:.2e} at x1={x1}, dt={dt}", (val, err))
    return val / r


def flux_lr_finite_dt(model, density, x1, t, delta_t, tol=1e-12):
    """Probability per unit time moving from ``x < x1`` into ``x > x1`` in one step ``dt``.

    The landing-side integral is done in closed form, leaving a single smooth
    integral over the departure point. Grows like ``sigma p / sqrt(2 pi dt)``
    wherever ``p(x1) > 0``.
    """
    if not delta_t > 0:
        raise InvalidArgument(f"delta_t must be positive, got {delta_t}")
    return _one_sided(model, density, float(x1), float(t), float(delta_t), "lr", tol)


def flux_rl_finite_dt(model, density, x1, t, delta_t, tol=1e-12):
    """Mirror of :func:`flux_lr_finite_dt` (from ``x > x1`` into ``x < x1``)."""
    if not delta_t > 0:
        raise InvalidArgument(f"delta_t must be positive, got {delta_t}")
    return _one_sided(model, density, float(x1), float(t), float(delta_t), "rl", tol)


def flux_double_integral(model, density, x1, t, delta_t, direction="lr", tol=1e-10):
    """Un-reduced two-dimensional form ``(1/dt) int dx int dy G(x|y) p(y)``.

    Used only as a cross-check at moderate ``dt``; integration variables are the
    scaled offsets ``xi, eta`` of the landing and departure points.
    """
    s = 1.0 if direction == "lr" else -1.0
    r = math.sqrt(delta_t)

    def f(eta, xi):
        y = x1 - s * eta * r
        sig = model.sigma(y, t)
        arg = xi + eta - s * model.drift(y, t) * r
        return math.exp(-arg * arg / (2 * sig * sig)) / (_SQRT_2PI * sig) * density(y, t - delta_t)

    val, _ = integrate.dblquad(f, 0.0, math.inf, 0.0, math.inf, epsabs=tol, epsrel=tol)
    return val / r


def flux_estimate(model, density, x1, t, delta_t, tol=1e-12):
    lr = flux_lr_finite_dt(model, density, x1, t, delta_t, tol)
    rl = flux_rl_finite_dt(model, density, x1, t, delta_t, tol)
    return FluxEstimate(lr, rl, lr - rl, delta_t, divergent=float(density(x1, t)) > 0)


def net_flux_closed_form(model, density, x1, t):
    """``-(sigma^2 p / 2)' + b p`` at ``x1``."""
    x1, t = float(x1), float(t)
    sig2 = float(model.sigma(x1, t)) ** 2
    p = float(density(x1, t))
    d = 0.5 * (float(model.sigma_sq_dx(x1, t)) * p + sig2 * float(density.dx(x1, t)))
    return -d + float(model.drift(x1, t)) * p


def extrapolate_net_flux(model, density, x1, t, delta_ts=(1e-4, 2.5e-5, 6.25e-6, 1.5625e-6), tol=1e-12):
    """``lim_{dt -> 0} (J_LR - J_RL)`` by polynomial extrapolation in ``sqrt(dt)``.

    Returns ``(value, error)`` where the error is the change when the largest
    ``dt`` is dropped.
    """
    dts = [float(d) for d in delta_ts]
    if len(dts) < 2 or any(b >= a for a, b in zip(dts, dts[1:])):
        raise InvalidArgument("delta_ts must be decreasing with at least two entries")
    diffs = [flux_estimate(model, density, x1, t, d, tol).j_net for d in dts]
    roots = [math.sqrt(d) for d in dts]
    est = _neville_at_zero(roots, diffs)
    prev = _neville_at_zero(roots[1:], diffs[1:])
    return est, abs(est - prev)


def gaussian_moment_identities(sigma, tol=1e-13):
    """The three Gaussian double integrals over ``0 < xi < zeta`` used for the net flux.

    Exact values are ``3 sigma^4 / 4``, ``sigma^2 / 2`` and ``sigma^2 / 4``.
    """
    if not sigma > 0:
        raise InvalidArgument(f"sigma must be positive, got {sigma}")
    norm = _SQRT_2PI * sigma

    def w(z):
        return math.exp(-z * z / (2 * sigma * sigma)) / norm

    out = []
    for g in (lambda z, x: z * z * (z - x), lambda z, x: z, lambda z, x: z - x):
        val, _ = integrate.dblquad(
            lambda z, x, g=g: g(z, x) * w(z), 0.0, math.inf, lambda x: x, math.inf, epsabs=tol, epsrel=tol
        )
        out.append(val)
    return tuple(out)


# ---------------------------------------------------------------------------
# Monte Carlo


def point_mass(x0):
    return lambda rng, n: np.full(n, float(x0))


def normal_sampler(mean, sd):
    return lambda rng, n: rng.normal(mean, sd, n)


@dataclass
class SurvivalCurve:
    t: np.ndarray
    survival: np.ndarray
    stderr: np.ndarray
    n_paths: int
    flux: np.ndarray = field(repr=False, default=None)

    def decay_rate(self, t, half_width):
        """``-dS/dt`` at ``t`` by a central difference over ``[t - w, t + w]`` and its standard error."""
        if t - half_width < self.t[0] - 1e-12 or t + half_width > self.t[-1] + 1e-12:
            raise InvalidArgument("decay-rate window extends beyond the simulated times")
        lo = int(np.argmin(np.abs(self.t - (t - half_width))))
        hi = int(np.argmin(np.abs(self.t - (t + half_width))))
        if hi <= lo:
            raise InvalidArgument("window does not span two recorded times")
        q = self.survival[lo] - self.survival[hi]
        span = self.t[hi] - self.t[lo]
        return q / span, math.sqrt(max(q * (1 - q), 0.0) / self.n_paths) / span


def simulate_absorbing(model, sampler, boundary, t_max, dt_step, n_paths, seed, bridge=True, record_every=1):
    """Euler-Maruyama paths killed when they first reach ``boundary`` from the left.

    ``bridge=True`` also kills a path when the Brownian bridge between two
    successive positions would have crossed (probability
    ``exp(-2 (B - x_k)(B - x_{k+1}) / (sigma^2 dt))``), removing the
    ``O(sqrt(dt))`` bias of step-resolution detection.

    Random numbers are drawn per block of ``BLOCK_PATHS`` paths from
    ``SeedSequence([seed, block])``, so results do not depend on the backend.
    """
    if model.drift_coeffs is None or model.sigma_const is None:
        raise InvalidArgument("Monte Carlo needs a polynomial-drift, constant-noise model")
    if n_paths < 1 or not t_max > 0 or not dt_step > 0:
        raise InvalidArgument("need n_paths >= 1, t_max > 0, dt_step > 0")
    n_steps = int(round(t_max / dt_step))
    if n_steps < 1 or abs(n_steps * dt_step - t_max) > 1e-9 * t_max:
        raise InvalidArgument("t_max must be a whole number of steps")
    boundary = float(boundary)
    kill = np.full(n_paths, -1, dtype=np.int64)
    for block, start in enumerate(range(0, n_paths, BLOCK_PATHS)):
        nb = min(BLOCK_PATHS, n_paths - start)
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), block])))
        x = np.ascontiguousarray(sampler(rng, nb), dtype=np.float64)
        kb = np.where(x >= boundary, 0, -1).astype(np.int64)
        for s0 in range(0, n_steps, STEP_CHUNK):
            m = min(STEP_CHUNK, n_steps - s0)
            z = rng.standard_normal((nb, m))
            u = rng.random((nb, m)) if bridge else np.ones((nb, m))
            kernels.euler_maruyama_absorb(
                x, kb, model.drift_coeffs, model.sigma_const, dt_step, z, u, boundary, s0, bridge
            )
        kill[start : start + nb] = kb
    dead = np.bincount(kill[kill >= 0], minlength=n_steps + 1)
    survival = 1.0 - np.cumsum(dead) / n_paths
    steps = np.arange(0, n_steps + 1, record_every)
    if steps[-1] != n_steps:
        steps = np.append(steps, n_steps)
    t = steps * dt_step
    s = survival[steps]
    err = np.sqrt(np.clip(s * (1 - s), 0, None) / n_paths)
    flux = -np.gradient(s, t) if t.size > 1 else np.zeros(1)
    return SurvivalCurve(t, s, err, n_paths, flux)


def brownian_survival(t, x0=-1.0, sigma=math.sqrt(2.0), boundary=0.0):
    """Exact survival of driftless Brownian motion started at ``x0`` left of the boundary."""
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore"):
        return special.erf((boundary - x0) / (sigma * np.sqrt(2 * t)))
