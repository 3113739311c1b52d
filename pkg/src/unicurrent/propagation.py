"""Short-time free propagation out of a compact support, and the currents built on it.

Sign convention: every current here is positive for probability moving to the
right (towards ``+x``), so the uni-directional current out of ``[-a, 0]`` is
non-negative and a plane wave ``e^{ikx}`` carries ``hbar k / m``.
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import fft as sfft

from .errors import ConvergenceFailure, InvalidArgument
from .fresnel import _neville_at_zero, propagator_kernel_integral
from .wavefunction import BoxEigenstate, GridWavefunction, NaturalUnits, PiecewiseWavefunction

POINTS_PER_SQRT_ALPHA = 20
CROSS_TERM_POINTS = 16
VALIDITY_FACTOR = 100.0
_CHUNK = 1 << 16


class CurrentKind(Enum):
    SCHRODINGER_NET = "schrodinger-net"
    UNIDIRECTIONAL_LR = "unidirectional-lr"


@dataclass(frozen=True)
class CurrentEstimate:
    value: float
    delta_t: float
    kind: CurrentKind
    error: float = 0.0


@dataclass(frozen=True)
class GridSpec:
    x_min: float
    x_max: float
    n: int

    @property
    def h(self):
        return (self.x_max - self.x_min) / (self.n - 1)

    @classmethod
    def auto(cls, wf, alpha, c_max=None):
        """Uniform grid with 0 as a node, ``h = sqrt(alpha)/20``, covering ``[-2a, c_max]``."""
        h = math.sqrt(alpha) / POINTS_PER_SQRT_ALPHA
        left = 2.0 * wf.support_left if math.isfinite(wf.support_left) else max(1.0, 40.0 * math.sqrt(alpha))
        right = default_extent(alpha) if c_max is None else float(c_max)
        n_left = int(math.ceil(left / h))
        n_right = max(1, int(math.ceil(right / h)))
        return cls(-n_left * h, n_right * h, n_left + n_right + 1)


@dataclass(frozen=True)
class PropagationResult:
    grid: GridWavefunction
    p_out: float
    alpha: float
    validity_ok: bool
    p_out_error: float = 0.0
    tail: float = 0.0


def default_extent(alpha, c=0.0):
    return max(10.0 * c, c + 200.0 * math.sqrt(alpha))


def _psi(wf, y, alpha):
    out = np.empty(y.shape, dtype=np.complex128)
    for start in range(0, y.size, _CHUNK):
        out[start : start + _CHUNK] = propagator_kernel_integral(wf, y[start : start + _CHUNK], alpha)
    return out


def _leading_edge(jet):
    scale = np.max(np.abs(jet)) if jet.size else 0.0
    for r, v in enumerate(jet):
        if abs(v) > 1e-13 * scale:
            return r, abs(v)
    return None, 0.0


def edge_tail(wf, alpha, extent, order=6):
    """Mass beyond ``y = extent`` from the far-field form of the propagated amplitude.

    Each wall contributes ``|psi|^2 ~ alpha^{2r+1} |f^(r)|^2 / (2 pi d^{2r+2})`` where
    ``r`` is the first non-vanishing derivative at the wall and ``d`` the distance to
    it. Returns ``(value, error)``; the error bounds the oscillating cross term
    between the walls plus the next order in ``alpha / d^2``.
    """
    parts = []
    edges = [("right", 0.0)]
    if math.isfinite(wf.support_left):
        edges.append(("left", -wf.support_left))
    for name, pos in edges:
        r, amp = _leading_edge(wf.edge_jet(name, order))
        if r is None:
            continue
        d = extent - pos
        parts.append((alpha ** (2 * r + 1) * amp**2 / (2 * math.pi * (2 * r + 1) * d ** (2 * r + 1)), r, d))
    if not parts:
        return 0.0, 0.0
    value = sum(p[0] for p in parts)
    err = sum(p[0] * min(1.0, 4.0 * alpha * (p[1] + 2) ** 2 / p[2] ** 2) for p in parts)
    if len(parts) == 2:
        err += 2.0 * math.sqrt(parts[0][0] * parts[1][0])
    return value, err


def polynomial_validity_alpha(wf):
    """Largest admissible alpha from ``alpha << |q_{2j+1} / q_{2j+3}|`` (inf if unconstrained)."""
    q = wf.coefficients
    bound = math.inf
    for j in range(0, (len(q) - 2) // 2 + 1):
        lo, hi = 2 * j + 1, 2 * j + 3
        if hi < len(q) and q[hi] != 0 and q[lo] != 0:
            bound = min(bound, abs(q[lo] / q[hi]))
    return bound


def validity_bound(state, units=NaturalUnits()):
    """``hbar / E_n``; the short-time expansion needs ``dt`` well below it."""
    return units.hbar / state.energy(units)


def admissible_dt(wf, units=NaturalUnits()):
    """Largest ``dt`` treated as "much less than" the validity scale (factor 100)."""
    if isinstance(wf, BoxEigenstate):
        return validity_bound(wf, units) / VALIDITY_FACTOR
    return units.delta_t(polynomial_validity_alpha(wf)) / VALIDITY_FACTOR


def _check_wf(wf):
    if not isinstance(wf, (PiecewiseWavefunction, BoxEigenstate)):
        raise InvalidArgument(f"cannot propagate {type(wf).__name__}")


def propagate(wf, delta_t, units=NaturalUnits(), grid=None, tol=1e-8):
    """Evolve freely for ``delta_t`` after the wall at 0 is removed.

    ``p_out`` is the trapezoid integral of ``|psi|^2`` over the grid's ``y >= 0``
    part plus the far-field tail beyond ``x_max``.
    """
    _check_wf(wf)
    if not delta_t > 0:
        raise InvalidArgument(f"delta_t must be positive, got {delta_t}")
    alpha = units.alpha(delta_t)
    grid = GridSpec.auto(wf, alpha) if grid is None else grid
    if grid.n < 3 or grid.x_max <= 0 or grid.x_min > 0:
        raise InvalidArgument("grid must straddle the wall at y = 0")
    if grid.h > math.sqrt(alpha) / POINTS_PER_SQRT_ALPHA * (1 + 1e-9):
        raise InvalidArgument(
            f"grid spacing {grid.h:.3e} is coarser than sqrt(alpha)/{POINTS_PER_SQRT_ALPHA} = "
            f"{math.sqrt(alpha) / POINTS_PER_SQRT_ALPHA:.3e}"
        )
    y = np.linspace(grid.x_min, grid.x_max, grid.n)
    psi = _psi(wf, y, alpha)
    result = GridWavefunction(grid.x_min, grid.x_max, psi)

    right = y > 0
    y_pos = np.concatenate(([0.0], y[right]))
    rho0 = abs(propagator_kernel_integral(wf, 0.0, alpha)) ** 2
    rho = np.concatenate(([rho0], np.abs(psi[right]) ** 2))
    inside = float(np.trapezoid(rho, y_pos))
    tail, tail_err = edge_tail(wf, alpha, grid.x_max)
    ok = delta_t <= admissible_dt(wf, units)
    return PropagationResult(result, inside + tail, alpha, ok, tail_err, tail)


def _mass_interval(wf, alpha, lo, hi, h):
    n = max(2, int(math.ceil((hi - lo) / h)) + 1)
    step = (hi - lo) / (n - 1)
    total = 0.0
    for start in range(0, n, _CHUNK):
        idx = np.arange(start, min(n, start + _CHUNK + 1))
        y = lo + idx * step
        rho = np.abs(_psi(wf, y, alpha)) ** 2
        total += float(np.trapezoid(rho, dx=step))
        if idx[-1] == n - 1:
            break
    return total


def mass_beyond_estimate(wf, c, delta_t, units=NaturalUnits(), tol=1e-8):
    """``(P_c, error)`` for ``P_c = int_c^inf |psi(y, dt)|^2 dy``.

    The grid resolves both the ``sqrt(alpha)`` layer and the ``2 pi alpha / a``
    beat between the two walls, which matters once ``c`` is comparable to ``a``.
    """
    _check_wf(wf)
    if not c > 0:
        raise InvalidArgument(f"c must be positive, got {c}")
    if not delta_t > 0:
        raise InvalidArgument(f"delta_t must be positive, got {delta_t}")
    alpha = units.alpha(delta_t)
    h = math.sqrt(alpha) / POINTS_PER_SQRT_ALPHA
    if math.isfinite(wf.support_left):
        h = min(h, 2 * math.pi * alpha / (CROSS_TERM_POINTS * wf.support_left))
    extent = default_extent(alpha, c)
    inside = _mass_interval(wf, alpha, c, extent, h)
    tail, tail_err = edge_tail(wf, alpha, extent)
    return inside + tail, tail_err


def mass_beyond(wf, c, delta_t, units=NaturalUnits(), tol=1e-8):
    return mass_beyond_estimate(wf, c, delta_t, units, tol)[0]


def unidirectional_current_lr(wf, delta_t, units=NaturalUnits(), tol=1e-8):
    """Finite-``dt`` uni-directional current ``P_out / dt`` across the right wall."""
    res = propagate(wf, delta_t, units, tol=tol)
    return CurrentEstimate(res.p_out / delta_t, delta_t, CurrentKind.UNIDIRECTIONAL_LR, res.p_out_error / delta_t)


def _derivative(psi, i):
    s, h = psi.samples, psi.h
    if i < 2 or i > s.size - 3:
        raise InvalidArgument("point too close to the grid edge for a 5-point stencil")
    return (-s[i + 2] + 8 * s[i + 1] - 8 * s[i - 1] + s[i - 2]) / (12 * h)


def schrodinger_current(psi, x, units=NaturalUnits()):
    """``(hbar/m) Im(conj(psi) dpsi/dx)`` with a 4th-order central difference."""
    i = psi.index_of(x)
    d = _derivative(psi, i)
    value = units.hbar / units.mass * float(np.imag(np.conj(psi.samples[i]) * d))
    return CurrentEstimate(value, 0.0, CurrentKind.SCHRODINGER_NET)


def free_evolve(psi, delta_t, units=NaturalUnits(), boundary="periodic"):
    """Exact free evolution of grid samples.

    ``"periodic"`` uses the FFT on the full grid; ``"box"`` treats the grid ends
    as hard walls and evolves in the sine basis.
    """
    s = psi.samples
    omega = units.hbar * delta_t / (2.0 * units.mass)
    if boundary == "periodic":
        k = 2 * np.pi * np.fft.fftfreq(s.size, psi.h)
        out = np.fft.ifft(np.fft.fft(s) * np.exp(-1j * omega * k * k))
    elif boundary == "box":
        length = psi.x_max - psi.x_min
        inner = s[1:-1]
        k = np.pi * np.arange(1, inner.size + 1) / length
        coef = sfft.dst(inner.real, type=1) + 1j * sfft.dst(inner.imag, type=1)
        coef = coef * np.exp(-1j * omega * k * k)
        inner = sfft.idst(coef.real, type=1) + 1j * sfft.idst(coef.imag, type=1)
        out = np.concatenate(([0.0], inner, [0.0]))
    else:
        raise InvalidArgument(f"unknown boundary {boundary!r}")
    return GridWavefunction(psi.x_min, psi.x_max, out)


def _mass_right_of(rho, i, h):
    seg = rho[i:]
    return float(h * (seg.sum() - 0.5 * seg[0] - 0.5 * seg[-1]))


def feynman_limit_current(psi, x, delta_t_sequence, units=NaturalUnits(), boundary="periodic", rtol=1e-3):
    """Net current at ``x`` as the ``dt -> 0`` limit of the population change on the right.

    ``(1/dt) int_x^inf (|psi(t+dt)|^2 - |psi(t)|^2)`` is evaluated for each ``dt``
    and extrapolated to zero by polynomial (Neville) extrapolation.
    """
    dts = [float(d) for d in delta_t_sequence]
    if len(dts) < 2 or any(d <= 0 for d in dts) or any(b >= a for a, b in zip(dts, dts[1:])):
        raise InvalidArgument("delta_t_sequence must be positive, decreasing, with >= 2 entries")
    i = psi.index_of(x)
    rho = psi.density
    base = _mass_right_of(rho, i, psi.h)
    quotients = []
    for dt in dts:
        later = free_evolve(psi, dt, units, boundary)
        quotients.append((_mass_right_of(later.density, i, psi.h) - base) / dt)
    est = _neville_at_zero(dts, quotients)
    prev = _neville_at_zero(dts[1:], quotients[1:])
    err = abs(est - prev)
    dpsi = np.gradient(psi.samples, psi.h)
    scale = units.hbar / units.mass * float(np.max(np.abs(psi.samples) * np.abs(dpsi)))
    if err > rtol * max(abs(est), scale):
        raise ConvergenceFailure(f"dt-extrapolation unstable (change {err:.3e})", (prev, est))
    return CurrentEstimate(float(est), dts[-1], CurrentKind.SCHRODINGER_NET, err)
