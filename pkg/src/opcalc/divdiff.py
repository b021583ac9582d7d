"""Scalar divided differences by four independent algorithms, plus the
closed forms and multi-index combinatorics they are checked against.

The four routes:

* :func:`dd_recursive`  -- difference-quotient recursion (distinct nodes),
* :func:`dd_explicit`   -- the symmetric sum over nodes (distinct nodes),
* :func:`dd_contour`    -- circle quadrature of f(z) / prod (z - x_j)
  (coincident nodes welcome),
* :func:`dd_hermite`    -- simplex integral of f^(n) at convex combinations
  (coincident nodes welcome, needs derivatives).

Closed forms: powers of the identity (:func:`dd_power`), resolvents
(:func:`dd_resolvent`), simplex power moments, and the partial-sum factorial
products ``alpha!?`` / ``alpha?!`` that show up as series denominators.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterator

import numpy as np
from scipy.special import gammaln

from .errors import (
    CoincidentNodes,
    ContourTooTight,
    ContourViolation,
    DomainViolation,
    OpcalcError,
    PoleAtNode,
    SeriesDiverging,
    ZeroNodeNegativePower,
)
from .functions import HoloFunction
from .quadrature import circle_points, contour_quadrature, simplex_integrate

__all__ = [
    "dd_recursive",
    "dd_explicit",
    "dd_contour",
    "dd_hermite",
    "dd_power",
    "dd_resolvent",
    "simplex_moment_s",
    "simplex_moment_t",
    "bang_shriek",
    "dd_series_eval",
    "multinomial_identity",
    "compositions",
    "circle_around",
]

COMPOSITION_CAP = 10**6


def _nodes(xs) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(xs, dtype=complex))
    if arr.size == 0:
        raise OpcalcError("node set must be non-empty")
    return arr


def _require_distinct(xs: np.ndarray, tol: float) -> None:
    scale = max(1.0, float(np.max(np.abs(xs))))
    n = xs.size
    for i in range(n):
        for j in range(i + 1, n):
            if abs(xs[i] - xs[j]) <= tol * scale:
                raise CoincidentNodes(
                    f"nodes {i} and {j} closer than {tol:g} * {scale:g}; "
                    "use the contour or simplex form"
                )


def dd_recursive(f, xs, coincidence_tol: float = 1e-8) -> complex:
    """Divided difference by the difference-quotient recursion."""
    x = _nodes(xs)
    _require_distinct(x, coincidence_tol)
    coef = np.asarray(f(x), dtype=complex).copy()
    n = x.size - 1
    for level in range(1, n + 1):
        coef[: n + 1 - level] = (coef[: n + 1 - level] - coef[1 : n + 2 - level]) / (
            x[: n + 1 - level] - x[level:]
        )
    return complex(coef[0])


def dd_explicit(f, xs, coincidence_tol: float = 1e-8) -> complex:
    """Divided difference by the permutation-symmetric sum over nodes."""
    x = _nodes(xs)
    _require_distinct(x, coincidence_tol)
    fx = np.asarray(f(x), dtype=complex)
    total = 0.0 + 0.0j
    for k in range(x.size):
        diff = x[k] - np.delete(x, k)
        total += fx[k] / np.prod(diff)
    return complex(total)


def circle_around(points, margin: float = 0.1) -> tuple[complex, float]:
    """Center and radius of a circle strictly enclosing the given points."""
    pts = _nodes(points)
    center = complex(pts.mean())
    spread = float(np.max(np.abs(pts - center))) if pts.size else 0.0
    radius = (1.0 + margin) * spread + margin * (1.0 + spread)
    return center, radius


def dd_contour(
    f,
    xs,
    contour=None,
    *,
    rtol: float = 1e-12,
    refine: bool = True,
    min_distance: float = 1e-6,
    stats: dict | None = None,
) -> complex:
    """Divided difference as a circle integral of f(z) * prod (z - x_j)^-1.

    Works for coincident nodes.  ``contour`` is any object with ``center``,
    ``radius`` and ``nodes`` attributes (see :class:`opcalc.funcalc.Contour`);
    by default a circle with 10% margin around the nodes is used.  With
    ``refine=False`` a single trapezoid pass at ``contour.nodes`` is taken,
    which is useful for convergence studies.
    """
    x = _nodes(xs)
    if contour is None:
        center, radius = circle_around(x)
        start = 16
    else:
        center, radius, start = contour.center, contour.radius, contour.nodes
        if np.any(np.abs(x - center) >= radius):
            raise ContourViolation("contour does not enclose all nodes")

    if isinstance(f, HoloFunction):
        zeta_probe, _ = circle_points(center, radius, 64)
        if not np.all(f.domain.contains(zeta_probe)):
            raise ContourViolation("contour exits the declared function domain")

    def batch(zeta):
        gap = np.min(np.abs(zeta[:, None] - x[None, :]))
        if gap < min_distance * radius:
            raise ContourTooTight(
                f"quadrature node within {min_distance:g} * radius of a node"
            )
        vals = np.asarray(f(zeta), dtype=complex)
        for xj in x:
            vals = vals / (zeta - xj)
        return vals

    if not refine:
        zeta, w = circle_points(center, radius, start)
        return complex(np.sum(w * batch(zeta)))
    return complex(
        contour_quadrature(batch, center, radius, start=start, rtol=rtol, stats=stats)
    )


def dd_hermite(
    f: HoloFunction,
    xs,
    *,
    rtol: float = 1e-10,
    start: int = 8,
    cap: int = 128,
    stats: dict | None = None,
) -> complex:
    """Divided difference as the simplex integral of f^(n) over convex combinations.

    Needs ``n`` derivatives of ``f``; when the handle has none they are
    synthesized by Cauchy circles, so the convex hull of the nodes must sit
    strictly inside the declared domain (checked at every quadrature point).
    """
    x = _nodes(xs)
    n = x.size - 1
    if not np.all(f.domain.contains(x)):
        raise DomainViolation("node outside the declared function domain")
    if n == 0:
        return complex(f(x[0]))

    def integrand(s):
        z = s @ x
        if not np.all(f.domain.contains(z)):
            raise DomainViolation("convex hull of nodes leaves the function domain")
        return np.asarray(f.derivative(n, z), dtype=complex)

    value = simplex_integrate(integrand, n, rtol=rtol, start=start, cap=cap,
                              stats=stats)
    return complex(value)


def compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """All multi-indices in N^parts with given sum, in colex order."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    count = math.comb(total + parts - 1, parts - 1)
    if count > COMPOSITION_CAP:
        raise OpcalcError(f"composition enumeration of {count} terms exceeds cap")
    if parts == 1:
        yield (total,)
        return
    for last in range(total + 1):
        for head in compositions(total - last, parts - 1):
            yield head + (last,)


def dd_power(xs, N: int) -> complex:
    """Closed-form divided difference of z -> z**N.

    Sum of node monomials of total degree N - n when N >= n, zero in the
    polynomial-degree gap 0 <= N < n, and the mirrored monomial sum divided
    by the node product for N < 0 (all nodes nonzero).
    """
    x = _nodes(xs)
    n = x.size - 1
    if N < 0:
        if np.any(x == 0):
            raise ZeroNodeNegativePower("negative power needs nonzero nodes")
        total = 0.0 + 0.0j
        for alpha in compositions(abs(N) - 1, n + 1):
            total += np.prod(x ** (-np.asarray(alpha)))
        return complex((-1.0) ** n / np.prod(x) * total)
    if N < n:
        return 0.0 + 0.0j
    total = 0.0 + 0.0j
    for alpha in compositions(N - n, n + 1):
        total += np.prod(x ** np.asarray(alpha))
    return complex(total)


def dd_resolvent(xs, lam: complex) -> complex:
    """Divided difference of z -> (lam - z)^-1: the product of resolvent values."""
    x = _nodes(xs)
    if np.any(x == lam):
        raise PoleAtNode(f"parameter {lam} coincides with a node")
    return complex(np.prod(1.0 / (lam - x)))


def _check_multiindex(alpha) -> tuple[int, ...]:
    t = tuple(int(a) for a in alpha)
    if any(a < 0 for a in t):
        raise OpcalcError("multi-index parts must be nonnegative")
    return t


def simplex_moment_s(alpha, exact: bool = False):
    """Moment of the barycentric monomial s^alpha over the n-simplex: a! / (|a|+n)!.

    ``alpha`` has n+1 parts.  The float path goes through log-Gamma; with
    ``exact=True`` the value is returned as a :class:`fractions.Fraction`.
    """
    a = _check_multiindex(alpha)
    n = len(a) - 1
    if exact:
        num = 1
        for part in a:
            num *= math.factorial(part)
        return Fraction(num, math.factorial(sum(a) + n))
    log = sum(gammaln(part + 1) for part in a) - gammaln(sum(a) + n + 1)
    return float(np.exp(log))


def simplex_moment_t(alpha, exact: bool = False):
    """Moment of the ordered-coordinate monomial t^alpha over the n-simplex.

    ``alpha`` has n parts; the value is the reciprocal of the product of
    shifted tail partial sums (a_n + 1)(a_n + a_{n-1} + 2) ... (|a| + n).
    """
    a = _check_multiindex(alpha)
    n = len(a)
    denom = 1
    tail = 0
    for j in range(1, n + 1):
        tail += a[n - j]
        denom *= tail + j
    return Fraction(1, denom) if exact else 1.0 / denom


def bang_shriek(alpha) -> tuple[float, float]:
    """The two partial-sum factorial products of a multi-index.

    Returns ``(a!?, a?!)``: the factorial of the parts times the product of
    shifted partial sums taken front-to-back resp. back-to-front.
    """
    a = _check_multiindex(alpha)
    n = len(a)
    fact = 1
    for part in a:
        fact *= math.factorial(part)
    fwd = bwd = fact
    head = tail = 0
    for j in range(1, n + 1):
        head += a[j - 1]
        tail += a[n - j]
        fwd *= head + j
        bwd *= tail + j
    return float(fwd), float(bwd)


def dd_series_eval(
    f: HoloFunction,
    variant: str,
    a: complex,
    x,
    order_cap: int = 30,
    *,
    full_output: bool = False,
):
    """Power-series evaluation of a divided difference, summed by total degree.

    Variants (``x`` are the free offsets, ``a`` the expansion point):

    * ``origin``     -- nodes are the entries of ``x`` themselves (close to 0);
      coefficients f^(n+|alpha|)(0) / (|alpha|+n)! with n = len(x) - 1.
    * ``offset``     -- nodes (a, a+x_1, ..., a+x_n);
      coefficients f^(n+|alpha|)(a) / (|alpha|+n)!.
    * ``cumulative`` -- nodes (a, a+x_1, a+x_1+x_2, ...);
      coefficients f^(n+|alpha|)(a) / alpha?!.

    Stops after ``order_cap`` shells or once a shell drops below round-off;
    raises :class:`SeriesDiverging` when shell magnitudes grow three times in
    a row.  With ``full_output`` returns ``(value, last_shell_magnitude)``.
    """
    offs = np.atleast_1d(np.asarray(x, dtype=complex))
    if variant == "origin":
        n = offs.size - 1
        center = 0.0 + 0.0j
        parts = n + 1
    elif variant in ("offset", "cumulative"):
        n = offs.size
        center = complex(a)
        parts = n
    else:
        raise OpcalcError(f"unknown series variant {variant!r}")

    total = 0.0 + 0.0j
    shell_mag = 0.0
    grows = 0
    prev_mag = None
    for s in range(order_cap + 1):
        dval = complex(f.derivative(n + s, center))
        shell = 0.0 + 0.0j
        shell_mag = 0.0
        for alpha in compositions(s, parts):
            mono = complex(np.prod(offs ** np.asarray(alpha)))
            if variant == "cumulative":
                denom = bang_shriek(alpha)[1]
            else:
                denom = math.factorial(s + n)
            term = dval * mono / denom
            shell += term
            shell_mag += abs(term)
        total += shell
        if prev_mag is not None and shell_mag > prev_mag > 0:
            grows += 1
            if grows >= 3:
                raise SeriesDiverging(
                    f"shell magnitudes grew for {grows} consecutive orders"
                )
        else:
            grows = 0
        prev_mag = shell_mag
        if shell_mag <= 1e-16 * max(abs(total), 1e-30):
            break
    if full_output:
        return total, shell_mag
    return total


def multinomial_identity(beta, m: int, mode: str = "<=") -> tuple[int, int]:
    """Brute-force and closed-form values of the binomial-sum identities.

    Sums ``prod_j C(alpha_j, beta_j)`` over all multi-indices ``alpha >= beta``
    with ``|alpha| <= m`` (``mode="<="``) or ``|alpha| = m`` (``mode="="``),
    and pairs the result with the closed forms ``C(m+n, |beta|+n)`` resp.
    ``C(m+n-1, |beta|+n-1)``.  Exact integer arithmetic throughout.
    """
    b = _check_multiindex(beta)
    n = len(b)
    if m < sum(b):
        raise OpcalcError("m must be at least |beta|")

    def shell(total: int) -> int:
        acc = 0
        for alpha in compositions(total, n):
            if all(aj >= bj for aj, bj in zip(alpha, b)):
                term = 1
                for aj, bj in zip(alpha, b):
                    term *= math.comb(aj, bj)
                acc += term
        return acc

    if mode == "=":
        brute = shell(m)
        closed = math.comb(m + n - 1, sum(b) + n - 1)
    elif mode == "<=":
        brute = sum(shell(t) for t in range(sum(b), m + 1))
        closed = math.comb(m + n, sum(b) + n)
    else:
        raise OpcalcError(f"unknown mode {mode!r}")
    return brute, closed
