"""Noncommutative Newton and Taylor expansions, commutator-series rewrites,
and the simplex-integral (time-ordered) expansion of the matrix exponential.

Confluent divided differences (all nodes equal) are evaluated by the shared
contour of :func:`opcalc.funcalc.dd_apply`; no limits are taken.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .core import as_matrix, eigen_decompose, matrix_exp, opnorm
from .divdiff import bang_shriek, compositions
from .errors import (
    ConvergenceThresholdExceeded,
    NonDiagonalizable,
    SeriesDiverging,
)
from .funcalc import (
    Contour,
    apply_function,
    contour_for_union,
    dd_apply,
)
from .functions import HoloFunction
from .quadrature import simplex_integrate
from .tolerances import DEFAULTS

__all__ = [
    "ExpansionReport",
    "newton_interpolate",
    "newton_recursion_check",
    "taylor_expand",
    "nth_derivative",
    "nth_derivative_fd",
    "taylor_series_ad",
    "dyson_exp",
]


@dataclass
class ExpansionReport:
    """Partial sums of an expansion next to an independently computed target."""

    partial_sums: list
    remainder_norms: list
    target: np.ndarray
    converged: bool
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.partial_sums) != len(self.remainder_norms):
            raise ValueError("one remainder norm per partial sum")

    @property
    def final_residual(self) -> float:
        return self.remainder_norms[-1]

    def to_dict(self) -> dict:
        return {
            "orders": list(range(len(self.partial_sums))),
            "remainder_norms": [float(r) for r in self.remainder_norms],
            "target_norm": opnorm(self.target),
            "converged": bool(self.converged),
            "meta": {
                k: (v if isinstance(v, (int, float, bool, str, list)) else str(v))
                for k, v in self.meta.items()
            },
        }


def newton_interpolate(
    f: HoloFunction,
    mats,
    *,
    contour: Contour | None = None,
    rtol: float = DEFAULTS.funcalc_rtol,
    residual_tol: float = DEFAULTS.newton_residual,
) -> ExpansionReport:
    """Interpolation expansion of f(a_n) through the nodes a_0, ..., a_n.

    Builds f(a_0) plus the divided-difference corrections paired with the
    increment products (a_n - a_0)...(a_n - a_{j-1}); the matrices need not
    commute, so the factor order matters and is preserved.  The target f(a_n)
    comes from the single-variable calculus.
    """
    ms = [as_matrix(m) for m in mats]
    n = len(ms) - 1
    c = contour or contour_for_union(ms)
    target = apply_function(f, ms[n], c, rtol=rtol)
    running = apply_function(f, ms[0], c, rtol=rtol)
    partials = [running.copy()]
    norms = [opnorm(running - target)]
    for j in range(1, n + 1):
        increments = [ms[n] - ms[i] for i in range(j)]
        running = running + dd_apply(f, ms[: j + 1], increments, c, rtol=rtol)
        partials.append(running.copy())
        norms.append(opnorm(running - target))
    converged = norms[-1] <= residual_tol * max(opnorm(target), 1e-300)
    return ExpansionReport(partials, norms, target, converged)


def newton_recursion_check(
    f: HoloFunction,
    mats,
    bs,
    *,
    contour: Contour | None = None,
    rtol: float = DEFAULTS.funcalc_rtol,
) -> float:
    """Residual of the divided-difference recursion under node exchange.

    ``mats`` supplies a_0, ..., a_{n+1} (so n + 2 matrices) and ``bs`` the n
    interleaving factors.  Returns the norm of

        ([a_0..a_{n-1}, a_{n+1}] - [a_0..a_n]) f (b_1...b_n)
        - [a_0..a_{n+1}] f (b_1...b_n (a_{n+1} - a_n)).
    """
    ms = [as_matrix(m) for m in mats]
    n = len(ms) - 2
    if n < 0 or len(bs) != n:
        raise ValueError("need n+2 nodes and n factors")
    c = contour or contour_for_union(ms)
    swapped = ms[:n] + [ms[n + 1]]
    lhs = dd_apply(f, swapped, bs, c, rtol=rtol) - dd_apply(f, ms[: n + 1], bs, c, rtol=rtol)
    rhs = dd_apply(f, ms, list(bs) + [ms[n + 1] - ms[n]], c, rtol=rtol)
    return opnorm(lhs - rhs)


def _resolvent_sup(c: Contour, a: np.ndarray, samples: int = 128) -> float:
    zeta, _ = c.points(samples)
    eye = np.eye(a.shape[0], dtype=complex)
    res = np.linalg.inv(zeta[:, None, None] * eye - a)
    return float(np.max(np.linalg.norm(res, ord=2, axis=(1, 2))))


def taylor_expand(
    f: HoloFunction,
    a,
    b,
    N: int,
    *,
    contour: Contour | None = None,
    rtol: float = DEFAULTS.funcalc_rtol,
) -> ExpansionReport:
    """Expansion of f(a + b) in confluent divided-difference terms.

    Partial sums accumulate the terms [a, ..., a] f (b ... b) for orders
    0..N.  The remainder after each order is recorded two ways: as the
    explicit mixed-node term with a + b in the last slot, and as the distance
    to the target f(a + b).  ``meta['c2']`` holds the resolvent sup on the
    contour; a perturbation with c2 * |b| >= 1 is outside the guaranteed
    convergence region and triggers a warning (the sums are still computed).
    """
    am = as_matrix(a)
    bm = as_matrix(b, dim=am.shape[0])
    c = contour or contour_for_union([am, am + bm])
    c2 = _resolvent_sup(c, am)
    if c2 * opnorm(bm) >= 1.0:
        warnings.warn(
            f"c2*|b| = {c2 * opnorm(bm):.3g} >= 1; remainder may not shrink",
            ConvergenceThresholdExceeded,
        )
    target = apply_function(f, am + bm, c, rtol=rtol)
    partials = []
    norms = []
    explicit = []
    defects = []
    running = np.zeros_like(am)
    for j in range(N + 1):
        running = running + dd_apply(f, [am] * (j + 1), [bm] * j, c, rtol=rtol)
        partials.append(running.copy())
        norms.append(opnorm(target - running))
        rem = dd_apply(f, [am] * (j + 1) + [am + bm], [bm] * (j + 1), c, rtol=rtol)
        explicit.append(opnorm(rem))
        defects.append(opnorm(running + rem - target))
    converged = norms[-1] <= 1e-8 * max(opnorm(target), 1e-300)
    return ExpansionReport(
        partials,
        norms,
        target,
        converged,
        meta={
            "c2": c2,
            "explicit_remainder_norms": explicit,
            "identity_defects": defects,
        },
    )


def nth_derivative(
    f: HoloFunction,
    a,
    bs,
    *,
    contour: Contour | None = None,
    rtol: float = DEFAULTS.funcalc_rtol,
) -> np.ndarray:
    """n-th derivative of the matrix map induced by f, in directions bs.

    Sum over all orderings of the directions of the confluent
    divided-difference pairing; symmetric in ``bs`` by construction.
    """
    am = as_matrix(a)
    bs = [as_matrix(b, dim=am.shape[0]) for b in bs]
    n = len(bs)
    c = contour or contour_for_union([am])
    total = np.zeros_like(am)
    for perm in itertools.permutations(range(n)):
        total = total + dd_apply(f, [am] * (n + 1), [bs[k] for k in perm], c, rtol=rtol)
    return total


def nth_derivative_fd(f: HoloFunction, a, bs, step: float = 1e-4) -> np.ndarray:
    """Finite-difference oracle for :func:`nth_derivative`.

    Central mixed differences of s -> f(a + sum_i s_i b_i) with the given step;
    2**n evaluations through the single-variable calculus.
    """
    am = as_matrix(a)
    bs = [as_matrix(b, dim=am.shape[0]) for b in bs]
    n = len(bs)
    total = np.zeros_like(am)
    for signs in itertools.product((-1.0, 1.0), repeat=n):
        m = am + sum(s * step * b for s, b in zip(signs, bs))
        total = total + np.prod(signs) * apply_function(f, m)
    return total / (2.0 * step) ** n


def taylor_series_ad(
    f: HoloFunction,
    a,
    bs,
    order_cap: int = 30,
    side: str = "left-f",
    *,
    rtol: float = DEFAULTS.funcalc_rtol,
    shell_stop: float = 1e-14,
) -> np.ndarray:
    """Divided-difference pairing rewritten as a nested-commutator series.

    ``side="left-f"`` sums (-1)^|alpha| f^(n+|alpha|)(a) ad^alpha(b) / alpha?!
    (derivative factor on the left, back-to-front denominators);
    ``side="right-f"`` sums ad^alpha(b) f^(n+|alpha|)(a) / alpha!? with the
    derivative factor on the right.  ``ad^alpha(b)`` is the product of
    iterated commutators ad_a^{alpha_j}(b_j).  Matrix-argument derivatives go
    through the single-variable calculus.  Shells are total-degree layers;
    the sum stops early once a shell drops below ``shell_stop`` of the running
    sum and raises :class:`SeriesDiverging` after three growing shells.
    """
    if side not in ("left-f", "right-f"):
        raise ValueError(f"side must be 'left-f' or 'right-f', got {side!r}")
    am = as_matrix(a)
    bs = [as_matrix(b, dim=am.shape[0]) for b in bs]
    n = len(bs)
    c = contour_for_union([am])

    # iterated commutator tables ad_a^k(b_j), k = 0..order_cap
    ad: list[list[np.ndarray]] = []
    for b in bs:
        row = [b]
        for _ in range(order_cap):
            x = row[-1]
            row.append(am @ x - x @ am)
        ad.append(row)

    total = np.zeros_like(am)
    prev_mag = None
    grows = 0
    for s in range(order_cap + 1):
        deriv_mat = apply_function(f.deriv_function(n + s), am, c, rtol=rtol)
        shell = np.zeros_like(am)
        for alpha in compositions(s, n):
            prod = np.eye(am.shape[0], dtype=complex)
            for j, k in enumerate(alpha):
                prod = prod @ ad[j][k]
            fwd, bwd = bang_shriek(alpha)
            if side == "left-f":
                shell = shell + (-1.0) ** s * (deriv_mat @ prod) / bwd
            else:
                shell = shell + (prod @ deriv_mat) / fwd
        total = total + shell
        mag = opnorm(shell)
        if prev_mag is not None and mag > prev_mag > 0:
            grows += 1
            if grows >= 3:
                raise SeriesDiverging(
                    f"shell norms grew for {grows} consecutive orders"
                )
        else:
            grows = 0
        prev_mag = mag
        if mag <= shell_stop * max(opnorm(total), 1e-300):
            break
    return total


def _batch_exp(a: np.ndarray):
    """s-array -> stack of exp(s_k a); eigendecomposition fast path."""
    try:
        spec, v, vinv = eigen_decompose(a)
        w = spec.eigenvalues

        def via_eig(s):
            ews = np.exp(np.multiply.outer(np.asarray(s), w))  # (P, d)
            return np.einsum("ij,kj,jl->kil", v, ews, vinv)

        return via_eig
    except NonDiagonalizable:
        def via_expm(s):
            return scipy.linalg.expm(np.asarray(s)[:, None, None] * a)

        return via_expm


def _dyson_term_factory(am: np.ndarray, bm: np.ndarray):
    """Simplex integrand builder for exp(s_0 a) b ... b exp(s_n x) products.

    In the eigenbasis of ``a`` the a-exponential factors are diagonal, so the
    product chain needs only elementwise scalings plus multiplications by one
    constant matrix; this is what keeps high simplex dimensions affordable.
    Falls back to stacked Pade exponentials when eigenbases are unusable.
    """
    try:
        spec, v, vinv = eigen_decompose(am)
        specc, w, winv = eigen_decompose(am + bm)
        lam, mu = spec.eigenvalues, specc.eigenvalues
        bprime = vinv @ bm @ v
        mix, mixinv = vinv @ w, winv @ v

        def term(order: int, closing: bool, rtol: float) -> np.ndarray:
            if order == 0:
                return matrix_exp(am)

            def integrand(s):
                e = np.exp(s[:, :order, None] * lam[None, None, :])  # (P, order, d)
                x = e[:, 0, :, None] * bprime[None]
                for j in range(1, order):
                    x = x * e[:, j, None, :]
                    x = x @ bprime
                if closing:
                    x = x @ mix
                    x = x * np.exp(s[:, order, None] * mu[None, :])[:, None, :]
                    x = x @ mixinv
                else:
                    x = x * np.exp(s[:, order, None] * lam[None, :])[:, None, :]
                return x

            value = simplex_integrate(integrand, order, rtol=rtol,
                                      point_budget=1_500_000)
            return v @ value @ vinv

        return term
    except NonDiagonalizable:
        exp_a = _batch_exp(am)
        exp_ab = _batch_exp(am + bm)

        def term(order: int, closing: bool, rtol: float) -> np.ndarray:
            if order == 0:
                return matrix_exp(am)

            def integrand(s):
                x = exp_a(s[:, 0])
                for j in range(1, order + 1):
                    x = x @ bm
                    last = closing and j == order
                    x = x @ (exp_ab(s[:, j]) if last else exp_a(s[:, j]))
                return x

            return simplex_integrate(integrand, order, rtol=rtol)

        return term


def dyson_exp(
    a,
    b,
    N: int,
    *,
    rtol: float = 1e-9,
    identity_tol: float = DEFAULTS.dyson_identity,
) -> ExpansionReport:
    """Simplex-integral expansion of exp(a + b) in powers of the perturbation.

    Order-n term: the integral over the standard n-simplex of
    exp(s_0 a) b exp(s_1 a) ... b exp(s_n a).  The report records, per order,
    the distance of the partial sum to exp(a + b); ``meta`` holds the exact
    closing remainder (the order-(N+1) simplex integral whose last factor is
    exp(s_{N+1} (a + b))) and the defect of partial + remainder = target,
    which is an identity up to quadrature error.
    """
    am = as_matrix(a)
    bm = as_matrix(b, dim=am.shape[0])
    target = matrix_exp(am + bm)
    term = _dyson_term_factory(am, bm)

    partials = []
    norms = []
    running = matrix_exp(am)
    partials.append(running.copy())
    norms.append(opnorm(target - running))
    for order in range(1, N + 1):
        running = running + term(order, False, rtol)
        partials.append(running.copy())
        norms.append(opnorm(target - running))
    remainder = term(N + 1, True, rtol)
    defect = opnorm(running + remainder - target)
    converged = defect <= identity_tol * max(opnorm(target), 1e-300)
    return ExpansionReport(
        partials,
        norms,
        target,
        converged,
        meta={
            "exact_remainder_norm": opnorm(remainder),
            "identity_defect": defect,
        },
    )
