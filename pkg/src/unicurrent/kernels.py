"""Hot numeric kernels, each with a numba loop and a numpy twin.

The public wrappers at the bottom dispatch on :func:`unicurrent._accel.use_numba`.
Both twins take identical inputs (random numbers included) so their outputs
agree to rounding, which the test-suite checks.
"""

import math

import numpy as np

from ._accel import njit, use_numba

SERIES_RADIUS = 3.0
_HALF_I = 0.5j
_G0_ORIGIN = math.sqrt(math.pi / 2) * complex(math.cos(math.pi / 4), math.sin(math.pi / 4))


def origin_moments(kmax):
    """``G_k(0)``: regularised moments over ``(-inf, 0]``."""
    c = np.zeros(kmax + 1, dtype=np.complex128)
    c[0] = _G0_ORIGIN
    if kmax >= 1:
        c[1] = -1j
    for k in range(2, kmax + 1):
        c[k] = 1j * (k - 1) * c[k - 2]
    return c


# ---------------------------------------------------------------------------
# regularised Fresnel moments G_k(u) = lim_eps int_{-inf}^u z^k e^{(i-eps) z^2/2} dz


@njit
def _moments_numba(u, g0, kmax, origin):
    n = u.shape[0]
    out = np.empty((n, kmax + 1), dtype=np.complex128)
    for p in range(n):
        x = u[p]
        if abs(x) <= 3.0:
            # power series of int_0^x z^k e^{i z^2/2} dz, then shift by G_k(0)
            x2 = x * x
            for k in range(kmax + 1):
                term = x ** (k + 1) + 0j
                acc = term / (k + 1)
                m = 0
                while m < 200:
                    m += 1
                    term = term * (0.5j * x2) / m
                    inc = term / (k + 2 * m + 1)
                    acc += inc
                    if abs(inc) <= 1e-17 * abs(acc):
                        break
                out[p, k] = origin[k] + acc
        else:
            e = complex(math.cos(0.5 * x * x), math.sin(0.5 * x * x))
            out[p, 0] = g0[p]
            if kmax >= 1:
                out[p, 1] = -1j * e
            xp = 1.0
            for k in range(2, kmax + 1):
                xp *= x
                out[p, k] = -1j * xp * e + 1j * (k - 1) * out[p, k - 2]
    return out


def _moments_numpy(u, g0, kmax, origin):
    n = u.shape[0]
    out = np.empty((n, kmax + 1), dtype=np.complex128)
    small = np.abs(u) <= SERIES_RADIUS
    if small.any():
        x = u[small]
        x2 = x * x
        for k in range(kmax + 1):
            term = (x ** (k + 1)).astype(np.complex128)
            acc = term / (k + 1)
            for m in range(1, 200):
                term = term * (_HALF_I * x2) / m
                inc = term / (k + 2 * m + 1)
                acc = acc + inc
                if np.all(np.abs(inc) <= 1e-17 * np.abs(acc)):
                    break
            out[small, k] = origin[k] + acc
    big = ~small
    if big.any():
        x = u[big]
        e = np.exp(0.5j * x * x)
        blk = np.empty((x.size, kmax + 1), dtype=np.complex128)
        blk[:, 0] = g0[big]
        if kmax >= 1:
            blk[:, 1] = -1j * e
        xp = np.ones_like(x)
        for k in range(2, kmax + 1):
            xp = xp * x
            blk[:, k] = -1j * xp * e + 1j * (k - 1) * blk[:, k - 2]
        out[big] = blk
    return out


# ---------------------------------------------------------------------------
# psi(y) = (2 pi i)^{-1/2} sum_k Q^{(k)}(y)/k! alpha^{k/2} M_k(y)


@njit
def _assemble_numba(y, q, sqrt_alpha, M, prefactor):
    n = y.shape[0]
    deg = q.shape[0] - 1
    out = np.empty(n, dtype=np.complex128)
    shifted = np.empty(deg + 1, dtype=np.complex128)
    for p in range(n):
        # Taylor coefficients of Q about y by repeated synthetic division
        for j in range(deg + 1):
            shifted[j] = q[j]
        for k in range(deg + 1):
            for j in range(deg - 1, k - 1, -1):
                shifted[j] += y[p] * shifted[j + 1]
        acc = 0j
        s = 1.0
        for k in range(deg + 1):
            acc += shifted[k] * s * M[p, k]
            s *= sqrt_alpha
        out[p] = prefactor * acc
    return out


def _assemble_numpy(y, q, sqrt_alpha, M, prefactor):
    deg = q.shape[0] - 1
    shifted = np.tile(q.astype(np.complex128), (y.shape[0], 1))
    for k in range(deg + 1):
        for j in range(deg - 1, k - 1, -1):
            shifted[:, j] += y * shifted[:, j + 1]
    scale = sqrt_alpha ** np.arange(deg + 1)
    return prefactor * np.sum(shifted * scale * M[:, : deg + 1], axis=1)


# ---------------------------------------------------------------------------
# panel Gauss-Legendre quadrature of z^j exp((i - eps) z^2 / 2)


@njit
def _panel_numba(edges, nodes, weights, j, eps):
    acc = 0j
    c = complex(-eps, 1.0) * 0.5
    for p in range(edges.shape[0] - 1):
        lo = edges[p]
        hi = edges[p + 1]
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        part = 0j
        for m in range(nodes.shape[0]):
            z = mid + half * nodes[m]
            part += weights[m] * z ** j * np.exp(c * z * z)
        acc += half * part
    return acc


def _panel_numpy(edges, nodes, weights, j, eps, chunk=65536):
    acc = 0j
    c = complex(-eps, 1.0) * 0.5
    for start in range(0, edges.size - 1, chunk):
        e = edges[start : start + chunk + 1]
        half = 0.5 * np.diff(e)
        mid = 0.5 * (e[1:] + e[:-1])
        z = mid[:, None] + half[:, None] * nodes[None, :]
        part = (weights * z ** j * np.exp(c * z * z)).sum(axis=1)
        acc += np.sum(half * part)
    return acc


# ---------------------------------------------------------------------------
# brute-force propagator: (2 pi i alpha)^{-1/2} int_{-a}^0 Q(x) e^{i (x-y)^2 / 2 alpha} dx


@njit
def _direct_numba(y, q, a, alpha, n_panels, nodes, weights):
    n = y.shape[0]
    out = np.empty(n, dtype=np.complex128)
    deg = q.shape[0] - 1
    h = a / n_panels
    pref = complex(math.cos(-math.pi / 4), math.sin(-math.pi / 4)) / math.sqrt(2 * math.pi * alpha)
    for p in range(n):
        acc = 0j
        for i in range(n_panels):
            mid = -a + (i + 0.5) * h
            for m in range(nodes.shape[0]):
                x = mid + 0.5 * h * nodes[m]
                qx = q[deg] + 0j
                for j in range(deg - 1, -1, -1):
                    qx = qx * x + q[j]
                d = x - y[p]
                ph = d * d / (2 * alpha)
                acc += weights[m] * qx * complex(math.cos(ph), math.sin(ph))
        out[p] = pref * 0.5 * h * acc
    return out


def _direct_numpy(y, q, a, alpha, n_panels, nodes, weights):
    h = a / n_panels
    mid = -a + (np.arange(n_panels) + 0.5) * h
    x = (mid[:, None] + 0.5 * h * nodes[None, :]).ravel()
    w = np.tile(weights, n_panels) * 0.5 * h
    qx = np.polynomial.polynomial.polyval(x, q) * w
    pref = np.exp(-0.25j * np.pi) / math.sqrt(2 * math.pi * alpha)
    out = np.empty(y.shape[0], dtype=np.complex128)
    for p in range(y.shape[0]):
        d = x - y[p]
        out[p] = pref * np.sum(qx * np.exp(1j * d * d / (2 * alpha)))
    return out


# ---------------------------------------------------------------------------
# Euler-Maruyama with killing on first crossing of x >= boundary


@njit
def _em_numba(x, kill, drift, sigma, dt, z, u, boundary, step0, bridge):
    n_paths, n_steps = z.shape
    sq = math.sqrt(dt)
    var = sigma * sigma * dt
    for p in range(n_paths):
        if kill[p] >= 0:
            continue
        xp = x[p]
        for s in range(n_steps):
            b = drift[drift.shape[0] - 1]
            for c in range(drift.shape[0] - 2, -1, -1):
                b = b * xp + drift[c]
            xn = xp + b * dt + sigma * sq * z[p, s]
            if xn >= boundary:
                kill[p] = step0 + s + 1
                break
            if bridge and u[p, s] < math.exp(-2.0 * (boundary - xp) * (boundary - xn) / var):
                kill[p] = step0 + s + 1
                break
            xp = xn
        x[p] = xp


def _em_numpy(x, kill, drift, sigma, dt, z, u, boundary, step0, bridge):
    n_steps = z.shape[1]
    sq = math.sqrt(dt)
    var = sigma * sigma * dt
    alive = np.flatnonzero(kill < 0)
    xp = x[alive]
    for s in range(n_steps):
        if alive.size == 0:
            break
        b = np.polynomial.polynomial.polyval(xp, drift)
        xn = xp + b * dt + sigma * sq * z[alive, s]
        hit = xn >= boundary
        if bridge:
            with np.errstate(over="ignore"):
                cross = u[alive, s] < np.exp(-2.0 * (boundary - xp) * (boundary - xn) / var)
            hit |= cross
        if hit.any():
            kill[alive[hit]] = step0 + s + 1
            x[alive[hit]] = xp[hit]
            keep = ~hit
            alive = alive[keep]
            xn = xn[keep]
        xp = xn
    x[alive] = xp


# ---------------------------------------------------------------------------
# dispatch


def regularized_moments(u, g0, kmax):
    u = np.ascontiguousarray(u, dtype=np.float64)
    g0 = np.ascontiguousarray(g0, dtype=np.complex128)
    origin = origin_moments(kmax)
    if use_numba():
        return _moments_numba(u, g0, kmax, origin)
    return _moments_numpy(u, g0, kmax, origin)


def assemble_psi(y, q, sqrt_alpha, M, prefactor):
    y = np.ascontiguousarray(y, dtype=np.float64)
    q = np.ascontiguousarray(q, dtype=np.complex128)
    M = np.ascontiguousarray(M, dtype=np.complex128)
    if use_numba():
        return _assemble_numba(y, q, float(sqrt_alpha), M, complex(prefactor))
    return _assemble_numpy(y, q, float(sqrt_alpha), M, complex(prefactor))


def panel_quadrature(edges, nodes, weights, j, eps):
    edges = np.ascontiguousarray(edges, dtype=np.float64)
    if use_numba():
        return complex(_panel_numba(edges, nodes, weights, int(j), float(eps)))
    return complex(_panel_numpy(edges, nodes, weights, int(j), float(eps)))


def direct_propagator(y, q, a, alpha, n_panels, order=4):
    y = np.ascontiguousarray(np.atleast_1d(y), dtype=np.float64)
    q = np.ascontiguousarray(q, dtype=np.complex128)
    nodes, weights = np.polynomial.legendre.leggauss(order)
    if use_numba():
        return _direct_numba(y, q, float(a), float(alpha), int(n_panels), nodes, weights)
    return _direct_numpy(y, q, float(a), float(alpha), int(n_panels), nodes, weights)


def euler_maruyama_absorb(x, kill, drift, sigma, dt, z, u, boundary, step0, bridge):
    """Advance live paths (``kill < 0``) through ``z.shape[1]`` steps in place.

    ``kill[p]`` receives the 1-based global step index at which path ``p`` was
    absorbed.
    """
    drift = np.ascontiguousarray(drift, dtype=np.float64)
    if use_numba():
        _em_numba(x, kill, drift, float(sigma), float(dt), z, u, float(boundary), int(step0), bool(bridge))
    else:
        _em_numpy(x, kill, drift, float(sigma), float(dt), z, u, float(boundary), int(step0), bool(bridge))
