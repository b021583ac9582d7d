"""Quadrature engines shared across modules.

Three families:

* trapezoid sums on circles with node doubling (spectrally accurate for
  integrands holomorphic in an annulus around the circle),
* Gauss-Legendre rules on the standard simplex through the map
  ``t_j = u_1 * ... * u_j`` from the unit cube (smooth integrands only),
* globally adaptive 15-point Gauss-Kronrod panels, plus the substitution
  ``u = t / (1 - t)`` for integrals over [0, inf).

All reductions run in a fixed order so repeated runs are bit-identical.
"""

from __future__ import annotations

import heapq
from functools import lru_cache

import numpy as np

from .errors import QuadratureNoConvergence

__all__ = [
    "circle_points",
    "contour_sum",
    "contour_quadrature",
    "simplex_rule",
    "iter_simplex_rule",
    "simplex_integrate",
    "adaptive_gauss_kronrod",
    "halfline_integrate",
    "gauss_legendre_01",
]

_TINY = 1e-300


def _norm(x) -> float:
    x = np.asarray(x)
    if x.ndim == 0:
        return float(abs(x))
    return float(np.linalg.norm(x.ravel()))


# ---------------------------------------------------------------------------
# circle trapezoid


def circle_points(center: complex, radius: float, m: int):
    """m equispaced points on the circle and weights for (2 pi i)^-1 * closed integral."""
    theta = 2.0 * np.pi * np.arange(m) / m
    offset = radius * np.exp(1j * theta)
    return center + offset, offset / m


def contour_sum(batch_fn, center: complex, radius: float, m: int):
    """One-shot trapezoid value of (2 pi i)^-1 * closed integral of batch_fn."""
    zeta, w = circle_points(center, radius, m)
    vals = np.asarray(batch_fn(zeta))
    return np.tensordot(w, vals, axes=(0, 0))


def contour_quadrature(
    batch_fn,
    center: complex,
    radius: float,
    *,
    start: int = 16,
    rtol: float = 1e-12,
    cap: int = 8192,
    chunk: int | None = None,
    stats: dict | None = None,
):
    """Node-doubling trapezoid for (2 pi i)^-1 * closed circle integral.

    ``batch_fn(zeta)`` maps an array of m contour points to the m integrand
    values (any trailing shape).  Doubling stops when two consecutive levels
    agree to ``rtol`` relative to the current value, with an absolute floor of
    a few ulps of the total integrand mass (so exact zeros converge).  With
    ``chunk`` set, at most that many integrand values are materialized at a
    time (for bulky tensor-valued integrands).
    """
    m = max(16, int(start))

    def level(mm):
        zeta, w = circle_points(center, radius, mm)
        step = mm if chunk is None else max(1, int(chunk))
        value = None
        mass = 0.0
        for lo in range(0, mm, step):
            vals = np.asarray(batch_fn(zeta[lo : lo + step]))
            part = np.tensordot(w[lo : lo + step], vals, axes=(0, 0))
            value = part if value is None else value + part
            mass += float(
                np.sum(np.abs(w[lo : lo + step]) * np.abs(vals).reshape(len(vals), -1).sum(axis=1))
            )
        return value, mass

    prev, prev_mass = level(m)
    while m < cap:
        m *= 2
        cur, mass = level(m)
        err = _norm(cur - prev)
        floor = max(rtol * _norm(cur), 2e-15 * max(mass, prev_mass), _TINY)
        prev, prev_mass = cur, mass
        if err <= floor:
            if stats is not None:
                stats["contour_nodes"] = m
            return cur
    raise QuadratureNoConvergence(
        f"circle trapezoid did not stabilize within {cap} nodes"
    )


# ---------------------------------------------------------------------------
# simplex rules (ordered-coordinates simplex, s-coordinate output)


@lru_cache(maxsize=None)
def gauss_legendre_01(q: int):
    """Gauss-Legendre nodes and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(q)
    return 0.5 * (x + 1.0), 0.5 * w


def _digits(flat: np.ndarray, q: int, n: int) -> np.ndarray:
    # mixed-radix decode of flat indices into n base-q digits (axis 0 slowest)
    out = np.empty((flat.size, n), dtype=np.int64)
    rem = flat.copy()
    for j in range(n - 1, -1, -1):
        out[:, j] = rem % q
        rem //= q
    return out


def iter_simplex_rule(n: int, q: int, chunk: int = 1 << 18):
    """Yield (S, w) chunks of the Duffy-mapped Gauss-Legendre rule on the simplex.

    S has shape (p, n+1) holding the barycentric coordinates s_0..s_n
    (nonnegative, summing to 1); w are the corresponding weights for the
    measure ds_1...ds_n, which integrate to 1/n! over the whole simplex.
    """
    if n == 0:
        yield np.ones((1, 1)), np.ones(1)
        return
    x, w1 = gauss_legendre_01(q)
    total = q**n
    for lo in range(0, total, chunk):
        hi = min(lo + chunk, total)
        idx = _digits(np.arange(lo, hi, dtype=np.int64), q, n)
        u = x[idx]  # (p, n)
        t = np.cumprod(u, axis=1)  # t_j = u_1 ... u_j, decreasing in j
        s = np.empty((hi - lo, n + 1))
        s[:, 0] = 1.0 - t[:, 0]
        s[:, 1:n] = t[:, : n - 1] - t[:, 1:]
        s[:, n] = t[:, n - 1]
        jac = np.ones(hi - lo)
        for j in range(n - 1):  # jacobian of the cube-to-simplex map
            jac *= u[:, j] ** (n - 1 - j)
        wt = w1[idx].prod(axis=1) * jac
        yield s, wt


@lru_cache(maxsize=64)
def simplex_rule(n: int, q: int):
    """Materialized simplex rule (small n*q only); see :func:`iter_simplex_rule`."""
    ss, ws = zip(*iter_simplex_rule(n, q))
    return np.concatenate(ss), np.concatenate(ws)


def _order_schedule(n: int, start: int, cap: int, point_budget: int):
    budget_q = max(3, int(point_budget ** (1.0 / max(n, 1))))
    q = min(start, budget_q)
    schedule = [q]
    while True:
        nxt = min(2 * q, cap, budget_q)
        if nxt <= q:
            break
        schedule.append(nxt)
        q = nxt
    return schedule


def simplex_integrate(
    fn,
    n: int,
    *,
    rtol: float = 1e-10,
    start: int = 8,
    cap: int = 128,
    point_budget: int = 4_000_000,
    chunk: int = 1 << 18,
    stats: dict | None = None,
):
    """Integrate ``fn`` over the standard n-simplex with degree doubling.

    ``fn(S)`` maps a (p, n+1) block of barycentric points to p values (any
    trailing shape).  The per-axis Gauss-Legendre order starts at ``start``
    and doubles up to ``cap``, additionally capped so a level never exceeds
    ``point_budget`` points.
    """
    if n == 0:
        return np.asarray(fn(np.ones((1, 1))))[0]

    def level(q):
        value = None
        mass = 0.0
        for s, w in iter_simplex_rule(n, q, chunk):
            vals = np.asarray(fn(s))
            part = np.tensordot(w, vals, axes=(0, 0))
            value = part if value is None else value + part
            mass += float(np.sum(w * np.abs(vals).reshape(len(w), -1).sum(axis=1)))
        return value, mass

    schedule = _order_schedule(n, start, cap, point_budget)
    prev, prev_mass = level(schedule[0])
    for q in schedule[1:]:
        cur, mass = level(q)
        err = _norm(cur - prev)
        floor = max(rtol * _norm(cur), 2e-15 * max(mass, prev_mass), _TINY)
        prev, prev_mass = cur, mass
        if err <= floor:
            if stats is not None:
                stats["simplex_order"] = q
            return cur
    if len(schedule) == 1:
        return prev
    raise QuadratureNoConvergence(
        f"simplex rule did not stabilize within orders {schedule}"
    )


# ---------------------------------------------------------------------------
# adaptive Gauss-Kronrod

_XGK = np.array([
    -0.9914553711208126, -0.9491079123427585, -0.8648644233597691,
    -0.7415311855993944, -0.5860872354676911, -0.4058451513773972,
    -0.2077849550078985, 0.0,
    0.2077849550078985, 0.4058451513773972, 0.5860872354676911,
    0.7415311855993944, 0.8648644233597691, 0.9491079123427585,
    0.9914553711208126,
])
_WGK = np.array([
    0.0229353220105292, 0.0630920926299786, 0.1047900103222502,
    0.1406532597155259, 0.1690047266392679, 0.1903505780647854,
    0.2044329400752989, 0.2094821410847278,
    0.2044329400752989, 0.1903505780647854, 0.1690047266392679,
    0.1406532597155259, 0.1047900103222502, 0.0630920926299786,
    0.0229353220105292,
])
# 7-point Gauss weights sit on Kronrod nodes 1, 3, 5, 7, 9, 11, 13
_WG = np.array([
    0.1294849661688697, 0.2797053914892767, 0.3818300505051189,
    0.4179591836734694,
    0.3818300505051189, 0.2797053914892767, 0.1294849661688697,
])
_GAUSS_IDX = np.arange(1, 14, 2)


def _gk15(fn, a: float, b: float):
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    x = mid + half * _XGK
    vals = np.asarray(fn(x))
    k15 = half * np.tensordot(_WGK, vals, axes=(0, 0))
    g7 = half * np.tensordot(_WG, vals[_GAUSS_IDX], axes=(0, 0))
    return k15, _norm(k15 - g7)


def adaptive_gauss_kronrod(
    fn,
    a: float,
    b: float,
    *,
    rtol: float = 1e-10,
    depth_cap: int = 30,
    max_panels: int = 20000,
    stats: dict | None = None,
):
    """Globally adaptive Gauss-Kronrod on [a, b], worst panel split first.

    ``fn(x)`` maps a node array to integrand values (any trailing shape);
    errors are measured in the flat 2-norm of the Kronrod-Gauss difference.
    """
    value, err = _gk15(fn, a, b)
    heap = [(-err, 0, a, b, 0, value)]
    counter = 1
    total_err = err
    while total_err > rtol * max(_norm(value), _TINY) and heap:
        if len(heap) >= max_panels:
            raise QuadratureNoConvergence("panel limit reached")
        neg_err, _, pa, pb, depth, pval = heapq.heappop(heap)
        if depth >= depth_cap:
            raise QuadratureNoConvergence(
                f"panel depth cap {depth_cap} reached on [{pa:.3g}, {pb:.3g}]"
            )
        pm = 0.5 * (pa + pb)
        lv, le = _gk15(fn, pa, pm)
        rv, re_ = _gk15(fn, pm, pb)
        value = value - pval + lv + rv
        total_err = total_err + neg_err + le + re_
        heapq.heappush(heap, (-le, counter, pa, pm, depth + 1, lv))
        heapq.heappush(heap, (-re_, counter + 1, pm, pb, depth + 1, rv))
        counter += 2
    if stats is not None:
        stats["gk_panels"] = len(heap)
    return value


def halfline_integrate(fn, *, rtol: float = 1e-10, depth_cap: int = 30,
                       stats: dict | None = None):
    """Integral of ``fn`` over [0, inf) via u = t / (1 - t) and adaptive GK."""

    def g(t):
        t = np.asarray(t)
        u = t / (1.0 - t)
        vals = np.asarray(fn(u))
        scale = (1.0 - t) ** -2
        return vals * scale.reshape(scale.shape + (1,) * (vals.ndim - 1))

    return adaptive_gauss_kronrod(g, 0.0, 1.0, rtol=rtol, depth_cap=depth_cap,
                                  stats=stats)
