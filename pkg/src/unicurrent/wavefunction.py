"""Initial data: compactly supported polynomial wave functions and box eigenstates.

Everything lives on the support ``[-a, 0]`` with the right edge at the origin,
which is the point across which probability leaks once the wall is removed.
"""

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import InvalidArgument

MAX_DEGREE = 16
BOUNDARY_RTOL = 1e-12


@dataclass(frozen=True)
class NaturalUnits:
    hbar: float = 1.0
    mass: float = 1.0

    def __post_init__(self):
        if not (self.hbar > 0 and self.mass > 0):
            raise InvalidArgument(f"hbar and mass must be positive, got {self.hbar}, {self.mass}")

    def alpha(self, delta_t):
        """Short-time scale hbar*dt/m; the transition layer has width sqrt(alpha)."""
        return self.hbar * delta_t / self.mass

    def delta_t(self, alpha):
        return alpha * self.mass / self.hbar


class SupportKind(Enum):
    FINITE_REFLECTING = "finite"
    SEMI_INFINITE = "semi-infinite"


class BoundaryClass(Enum):
    CONTINUOUS_DERIVATIVE_JUMP = "continuous-derivative-jump"
    DISCONTINUOUS = "discontinuous"
    SMOOTH_ZERO = "smooth-zero"


def _as_complex_tuple(coefficients):
    out = []
    for c in coefficients:
        if isinstance(c, (list, tuple)):
            if len(c) != 2:
                raise InvalidArgument(f"coefficient pair must be [re, im], got {c!r}")
            c = complex(float(c[0]), float(c[1]))
        out.append(complex(c))
    return tuple(out)


@dataclass(frozen=True)
class PiecewiseWavefunction:
    """Polynomial ``Q(x) = sum_j q_j x^j`` on ``[-a, 0]``, identically zero elsewhere.

    For ``SEMI_INFINITE`` support ``a`` is ``inf`` and the left wall is absent.
    A finite support must satisfy ``Q(-a) = 0`` (checked to a relative 1e-12).
    """

    coefficients: tuple
    support_left: float = 1.0
    support_kind: SupportKind = SupportKind.FINITE_REFLECTING

    def __post_init__(self):
        coeffs = _as_complex_tuple(self.coefficients)
        object.__setattr__(self, "coefficients", coeffs)
        if not coeffs:
            raise InvalidArgument("wave function needs at least one coefficient")
        if len(coeffs) - 1 > MAX_DEGREE:
            raise InvalidArgument(f"degree {len(coeffs) - 1} exceeds cap {MAX_DEGREE}")
        if not all(math.isfinite(c.real) and math.isfinite(c.imag) for c in coeffs):
            raise InvalidArgument("coefficients must be finite")
        kind = SupportKind(self.support_kind)
        object.__setattr__(self, "support_kind", kind)
        if kind is SupportKind.SEMI_INFINITE:
            object.__setattr__(self, "support_left", math.inf)
            return
        a = float(self.support_left)
        if not (a > 0 and math.isfinite(a)):
            raise InvalidArgument(f"finite support needs 0 < a < inf, got {a}")
        object.__setattr__(self, "support_left", a)
        at_wall = sum(q * (-a) ** j for j, q in enumerate(coeffs))
        scale = sum(abs(q) * a ** j for j, q in enumerate(coeffs))
        if abs(at_wall) > BOUNDARY_RTOL * max(scale, 1e-300):
            raise InvalidArgument(f"Q(-a) = {at_wall:.3e} violates the reflecting-wall condition")

    @classmethod
    def semi_infinite(cls, coefficients):
        return cls(coefficients, math.inf, SupportKind.SEMI_INFINITE)

    @property
    def q(self):
        return np.array(self.coefficients, dtype=np.complex128)

    @property
    def degree(self):
        return len(self.coefficients) - 1

    @property
    def finite(self):
        return self.support_kind is SupportKind.FINITE_REFLECTING

    def evaluate(self, x):
        return evaluate(self, x)

    def scaled(self, c):
        c = complex(c)
        return PiecewiseWavefunction(tuple(c * q for q in self.coefficients), self.support_left, self.support_kind)

    def is_zero(self):
        return all(q == 0 for q in self.coefficients)

    def edge_jet(self, edge, order=4):
        """Derivatives ``[Q(e), Q'(e), ..., Q^(order)(e)]`` at ``e = 0`` or ``e = -a``."""
        e = 0.0 if edge == "right" else -self.support_left
        if not math.isfinite(e):
            return np.zeros(order + 1, dtype=np.complex128)
        q = self.q
        out = np.zeros(order + 1, dtype=np.complex128)
        for r in range(order + 1):
            if r > self.degree:
                break
            out[r] = np.polynomial.polynomial.polyval(e, q)
            q = np.polynomial.polynomial.polyder(q)
        return out


def evaluate(wf, x):
    """Amplitude at ``x``: ``Q(x)`` on the support, exactly ``0`` outside."""
    x = np.asarray(x, dtype=np.float64)
    vals = np.polynomial.polynomial.polyval(x, wf.q)
    inside = (x <= 0.0) & (x >= -wf.support_left)
    out = np.where(inside, vals, 0.0 + 0.0j)
    return out[()] if out.ndim == 0 else out


def classify_boundary(wf):
    q = wf.coefficients
    if q[0] != 0:
        return BoundaryClass.DISCONTINUOUS
    if len(q) > 1 and q[1] != 0:
        return BoundaryClass.CONTINUOUS_DERIVATIVE_JUMP
    return BoundaryClass.SMOOTH_ZERO


@dataclass(frozen=True)
class BoxEigenstate:
    """``psi_n(x) = sqrt(2/a) sin(n pi (x + a)/a)`` between hard walls at ``-a`` and ``0``."""

    n: int
    a: float = 1.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise InvalidArgument(f"quantum number must be a positive integer, got {self.n}")
        if not (self.a > 0 and math.isfinite(self.a)):
            raise InvalidArgument(f"box width must be positive, got {self.a}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "a", float(self.a))

    @property
    def wavenumber(self):
        return self.n * math.pi / self.a

    @property
    def amplitude(self):
        return math.sqrt(2.0 / self.a)

    @property
    def support_left(self):
        return self.a

    @property
    def finite(self):
        return True

    def energy(self, units=NaturalUnits()):
        return (self.n * math.pi * units.hbar / self.a) ** 2 / (2.0 * units.mass)

    def evaluate(self, x):
        x = np.asarray(x, dtype=np.float64)
        vals = self.amplitude * np.sin(self.wavenumber * (x + self.a))
        out = np.where((x <= 0.0) & (x >= -self.a), vals, 0.0)
        return out[()] if out.ndim == 0 else out

    def edge_jet(self, edge, order=4):
        # d^r/dx^r sin(k(x+a)) = k^r sin(k(x+a) + r pi/2); at the walls k(x+a) is 0 or n pi
        phase = 0.0 if edge == "left" else self.n * math.pi
        k = self.wavenumber
        r = np.arange(order + 1)
        vals = self.amplitude * k ** r * np.sin(phase + r * math.pi / 2)
        vals[np.abs(vals) < 1e-14 * self.amplitude * k ** r] = 0.0
        return vals.astype(np.complex128)


def eigenstate_coefficients(state, order):
    """Taylor polynomial of a box eigenstate about the right wall ``x = 0``.

    Even coefficients vanish because the state vanishes at the wall. The
    result is local boundary data, so it carries semi-infinite support (a
    truncated Taylor series does not vanish at ``-a``).
    """
    if order < 1:
        raise InvalidArgument(f"order must be >= 1, got {order}")
    if order > MAX_DEGREE:
        raise InvalidArgument(f"order {order} exceeds degree cap {MAX_DEGREE}")
    k = state.wavenumber
    sign = -1.0 if state.n % 2 else 1.0
    coeffs = [0.0j] * (order + 1)
    # psi_n(x) = (-1)^n sqrt(2/a) sin(k x)
    for m in range(1, order + 1, 2):
        coeffs[m] = complex(sign * state.amplitude * (-1) ** ((m - 1) // 2) * k ** m / math.factorial(m))
    return PiecewiseWavefunction.semi_infinite(coeffs)


@dataclass(frozen=True)
class GridWavefunction:
    """Complex samples on a uniform grid spanning ``[x_min, x_max]`` inclusive."""

    x_min: float
    x_max: float
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        s = np.array(self.samples, dtype=np.complex128)
        if s.ndim != 1 or s.size < 2:
            raise InvalidArgument("grid needs at least two samples")
        if not self.x_max > self.x_min:
            raise InvalidArgument("x_max must exceed x_min")
        s.flags.writeable = False
        object.__setattr__(self, "samples", s)

    @classmethod
    def from_function(cls, f, x_min, x_max, n):
        x = np.linspace(x_min, x_max, n)
        return cls(x_min, x_max, f(x))

    @property
    def x(self):
        return np.linspace(self.x_min, self.x_max, self.samples.size)

    @property
    def h(self):
        return (self.x_max - self.x_min) / (self.samples.size - 1)

    @property
    def density(self):
        return np.abs(self.samples) ** 2

    def probability(self):
        return float(np.trapezoid(self.density, dx=self.h))

    def index_of(self, x, rtol=1e-8):
        """Grid index of ``x``; raises if ``x`` is not (within rtol*h) a node."""
        pos = (x - self.x_min) / self.h
        i = int(round(pos))
        if abs(pos - i) > rtol or not 0 <= i < self.samples.size:
            raise InvalidArgument(f"x = {x} is not a grid node")
        return i
