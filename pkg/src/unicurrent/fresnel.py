"""Oscillatory Fresnel-type integrals ``int z^j exp(i z^2/2) dz``.

Three independent routes are available and are cross-checked in the tests:

* closed form: ``G_0`` from the complex error function plus the
  integration-by-parts recurrence ``G_j = -i u^{j-1} e^{iu^2/2} + i(j-1) G_{j-2}``
  (power series near the origin, where the recurrence cancels badly);
* adaptive Gauss-Legendre panels no wider than an eighth of a local
  oscillation;
* for an infinite lower limit, the damped integrand ``exp((i - eps) z^2/2)``
  evaluated in closed form for each ``eps`` and extrapolated to ``eps -> 0``.

Phase convention: ``(2 pi i)^{-1/2} = exp(-i pi/4) / sqrt(2 pi)``.
"""

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np
from scipy import special

from . import kernels
from .errors import ConvergenceFailure, InvalidArgument
from .wavefunction import BoxEigenstate, PiecewiseWavefunction

INV_SQRT_2PI_I = np.exp(-0.25j * np.pi) / math.sqrt(2.0 * math.pi)
_ROT = np.exp(-0.25j * np.pi) / math.sqrt(2.0)
_G0_SCALE = math.sqrt(math.pi / 2.0) * np.exp(0.25j * np.pi)
GL_ORDER = 10


@dataclass(frozen=True)
class RegularizationPolicy:
    epsilon_sequence: tuple = (1e-2, 1e-3, 1e-4)
    richardson_extrapolate: bool = True

    def __post_init__(self):
        eps = tuple(float(e) for e in self.epsilon_sequence)
        if not eps or any(e <= 0 for e in eps):
            raise InvalidArgument("epsilon_sequence must be non-empty and positive")
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise InvalidArgument("epsilon_sequence must be strictly decreasing")
        object.__setattr__(self, "epsilon_sequence", eps)


class TailWeight(Enum):
    ETA_OVER_ZETA_SQ = "eta/zeta^2"
    ONE = "1"
    ETA_SQ_OVER_ZETA_SQ = "eta^2/zeta^2"


@lru_cache(maxsize=8)
def _gauss_legendre(order):
    return np.polynomial.legendre.leggauss(order)


def fresnel_base(u):
    """``G_0(u) = int_{-inf}^u exp(i z^2/2) dz`` (converges without damping)."""
    u = np.asarray(u, dtype=np.float64)
    return _G0_SCALE * special.erfc(-u * _ROT)


def regularized_moments(u, kmax):
    """Table ``G_k(u)``, ``k = 0..kmax``, of the eps -> 0 limits over ``(-inf, u]``."""
    u = np.atleast_1d(np.asarray(u, dtype=np.float64))
    g0 = np.where(np.abs(u) > kernels.SERIES_RADIUS, fresnel_base(u), 0.0)
    return kernels.regularized_moments(u, g0, kmax)


def moment_table(lower, upper, kmax):
    """``M_k = int_lower^upper z^k e^{i z^2/2} dz`` for arrays of limits.

    ``lower`` may contain ``-inf`` (regularised limit). Intervals lying on the
    positive axis are mirrored onto the negative one, where ``G_k`` is small
    and the subtraction loses nothing.
    """
    lower = np.atleast_1d(np.asarray(lower, dtype=np.float64))
    upper = np.atleast_1d(np.asarray(upper, dtype=np.float64))
    lower, upper = np.broadcast_arrays(lower, upper)
    out = np.empty(lower.shape + (kmax + 1,), dtype=np.complex128)
    mirror = np.isfinite(lower) & (lower > 0)
    semi = ~np.isfinite(lower)
    plain = ~mirror & ~semi
    if semi.any():
        out[semi] = regularized_moments(upper[semi], kmax)
    if plain.any():
        out[plain] = regularized_moments(upper[plain], kmax) - regularized_moments(lower[plain], kmax)
    if mirror.any():
        sign = (-1.0) ** np.arange(kmax + 1)
        out[mirror] = sign * (
            regularized_moments(-lower[mirror], kmax) - regularized_moments(-upper[mirror], kmax)
        )
    return out


def _panel_edges(lo, hi, density):
    # panel count per unit length ~ 4 max(|z|, 1) / pi, i.e. <= pi/4 of phase per panel
    def cum(z):
        s = abs(z)
        g = s if s <= 1.0 else 0.5 * (1.0 + s * s)
        return math.copysign(g, z)

    def inv(v):
        s = abs(v)
        z = s if s <= 1.0 else math.sqrt(2.0 * s - 1.0)
        return math.copysign(z, v)

    scale = 4.0 * density / math.pi
    a, b = cum(lo) * scale, cum(hi) * scale
    n = max(1, int(math.ceil(b - a)))
    t = np.linspace(a, b, n + 1) / scale
    edges = np.fromiter((inv(v) for v in t), dtype=np.float64, count=n + 1)
    edges[0], edges[-1] = lo, hi
    return edges


def panel_moment(j, lower, upper, eps=0.0, tol=1e-12, max_refine=6):
    """Adaptive panel quadrature of ``z^j exp((i - eps) z^2/2)`` on a finite interval.

    Panel density doubles until two successive estimates agree to
    ``tol * max(1, |value|)``, relaxed by a rounding floor when odd moments
    cancel over a near-symmetric interval.
    """
    nodes, weights = _gauss_legendre(GL_ORDER)
    # rounding floor: cancellation cannot beat eps * (size of the integrand's mass)
    span = max(abs(lower), abs(upper))
    floor = 1e3 * np.finfo(float).eps * span ** (j + 1)
    prev = None
    for level in range(max_refine + 1):
        edges = _panel_edges(lower, upper, 2.0 ** level)
        val = kernels.panel_quadrature(edges, nodes, weights, j, eps)
        if prev is not None and abs(val - prev) <= tol * max(1.0, abs(val)) + floor:
            return val
        prev = val
    raise ConvergenceFailure(f"panel quadrature of z^{j} on [{lower}, {upper}] did not settle", (prev, val))


def damped_moment(j, upper, eps):
    """``int_{-inf}^upper z^j exp(-(eps - i) z^2/2) dz`` in closed form (eps > 0)."""
    beta = complex(eps, -1.0)
    root = np.sqrt(beta)
    e = np.exp(-0.5 * beta * upper * upper)
    r = [math.sqrt(math.pi / 2.0) / root * special.erfc(-upper * root / math.sqrt(2.0))]
    if j >= 1:
        r.append(-e / beta)
    for k in range(2, j + 1):
        r.append(-(upper ** (k - 1)) * e / beta + (k - 1) / beta * r[k - 2])
    return complex(r[j])


def _neville_at_zero(xs, ys):
    p = list(ys)
    n = len(xs)
    for m in range(1, n):
        for i in range(n - m):
            p[i] = (xs[i + m] * p[i] - xs[i] * p[i + 1]) / (xs[i + m] - xs[i])
    return p[0]


def eps_limit(values, eps, extrapolate=True):
    """Limit ``eps -> 0`` of a sequence and an error estimate (difference of last two estimates)."""
    if not extrapolate or len(values) == 1:
        est = values[-1]
        prev = values[-2] if len(values) > 1 else est
        return est, abs(est - prev), (prev, est)
    est = _neville_at_zero(eps, values)
    prev = _neville_at_zero(eps[1:], values[1:]) if len(values) > 2 else values[-1]
    return est, abs(est - prev), (prev, est)


def fresnel_moment(j, lower, upper, policy=RegularizationPolicy(), tol=1e-5, method="quadrature"):
    """``int_lower^upper z^j exp(i z^2/2) dz``.

    Finite limits use adaptive panel quadrature (``method="quadrature"``) or the
    closed form (``method="closed"``). ``lower = -inf`` is the eps -> 0 limit of
    the damped integral along ``policy.epsilon_sequence``; the change between the
    last two extrapolants must stay below ``tol * max(1, |value|)``. With
    ``method="closed"`` the limit is taken analytically instead.
    """
    if j < 0 or int(j) != j:
        raise InvalidArgument(f"power must be a non-negative integer, got {j}")
    j = int(j)
    if not math.isfinite(upper):
        raise InvalidArgument("upper limit must be finite")
    if lower == upper:
        return 0j
    if lower > upper:
        raise InvalidArgument(f"need lower < upper, got [{lower}, {upper}]")
    if math.isfinite(lower):
        if method == "closed":
            return complex(moment_table(lower, upper, j)[0, j])
        if method != "quadrature":
            raise InvalidArgument(f"unknown method {method!r}")
        return panel_moment(j, float(lower), float(upper), tol=min(tol, 1e-10))
    if lower != -math.inf:
        raise InvalidArgument("lower limit must be finite or -inf")
    if method == "closed":
        return complex(regularized_moments(upper, j)[0, j])
    eps = policy.epsilon_sequence
    vals = [damped_moment(j, float(upper), e) for e in eps]
    est, err, last = eps_limit(vals, eps, policy.richardson_extrapolate)
    if err > tol * max(1.0, abs(est)):
        raise ConvergenceFailure(f"eps-limit of z^{j} moment changed by {err:.2e} > tol", last)
    return complex(est)


def eps_quadrature(j, upper, eps, tol=1e-12):
    """Brute-force damped integral over ``[-Lambda, upper]``, Lambda cut where the tail < tol/10."""
    lam = max(abs(upper) + 1.0, math.sqrt(2.0 * max(j, 1) / eps))
    while True:
        bound = lam ** max(j - 1, 0) * math.exp(-0.5 * eps * lam * lam) / eps
        if bound < tol / 10:
            break
        lam *= 1.1
    return panel_moment(j, -lam, float(upper), eps=eps, tol=tol)


def tail_weighted_integral(weight, eta, lower=-math.inf, tol=1e-6, policy=RegularizationPolicy()):
    """Weighted tail integrals over ``[lower, -eta]``.

    ``ETA_OVER_ZETA_SQ`` is ``eta * int e^{iz^2/2}/z^2 dz``, the j = 1 building
    block of the propagated amplitude; its modulus is at most one and decays
    like ``eta^-2``.
    """
    weight = TailWeight(weight)
    if not eta > 0:
        raise InvalidArgument(f"eta must be positive, got {eta}")
    eta = float(eta)
    if math.isfinite(lower) and lower >= -eta:
        return 0j
    method = "closed"
    m0 = fresnel_moment(0, lower, -eta, policy, tol, method=method)
    if weight is TailWeight.ONE:
        return m0
    # int e^{iz^2/2}/z^2 = [-e^{iz^2/2}/z] + i int e^{iz^2/2}
    k = np.exp(0.5j * eta * eta) / eta + 1j * m0
    if math.isfinite(lower):
        k += np.exp(0.5j * lower * lower) / lower
    if weight is TailWeight.ETA_OVER_ZETA_SQ:
        return complex(eta * k)
    return complex(eta * eta * k)


def propagator_kernel_integral(wf, y, alpha, tol=1e-10):
    """Free evolution ``psi(y, dt) = (2 pi i alpha)^{-1/2} int Q(x) e^{i(x-y)^2/2alpha} dx``.

    With ``x = y + sqrt(alpha) z`` the integral reduces to Fresnel moments over
    ``[(-a-y)/sqrt(alpha), -y/sqrt(alpha)]`` combined through the Taylor
    coefficients of ``Q`` about ``y``. Box eigenstates are handled exactly as
    two truncated plane waves.
    """
    if not alpha > 0:
        raise InvalidArgument(f"alpha must be positive, got {alpha}")
    y_arr = np.atleast_1d(np.asarray(y, dtype=np.float64))
    sa = math.sqrt(alpha)
    if isinstance(wf, BoxEigenstate):
        out = _box_kernel(wf, y_arr, alpha)
    elif isinstance(wf, PiecewiseWavefunction):
        if wf.is_zero():
            out = np.zeros(y_arr.shape, dtype=np.complex128)
        else:
            upper = -y_arr / sa
            lower = (-wf.support_left - y_arr) / sa if wf.finite else np.full_like(y_arr, -np.inf)
            M = moment_table(lower, upper, wf.degree)
            out = kernels.assemble_psi(y_arr, wf.q, sa, M, INV_SQRT_2PI_I)
    else:
        raise InvalidArgument(f"cannot propagate {type(wf).__name__}")
    return out[0] if np.ndim(y) == 0 else out


def _box_kernel(state, y, alpha):
    sa = math.sqrt(alpha)
    a, k = state.a, state.wavenumber
    out = np.zeros(y.shape, dtype=np.complex128)
    for sign in (1.0, -1.0):
        kappa = sign * k
        shift = alpha * kappa
        M = moment_table((-a - y + shift) / sa, (-y + shift) / sa, 0)[:, 0]
        phase = np.exp(1j * (kappa * y - 0.5 * alpha * kappa * kappa + kappa * a))
        out += sign * phase * M
    return state.amplitude / 2j * INV_SQRT_2PI_I * out
