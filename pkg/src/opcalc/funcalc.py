"""Contour-integral functional calculus on dense complex matrices.

Single matrices, commuting tuples (tensor-grid circle quadrature), tensor
divided differences of arbitrary (non-commuting) tuples, and their pairing
with interleaved matrix factors.  All contours are circles: matrix spectra
are finite point sets, so a circle with margin always encloses them and keeps
the trapezoid rule spectrally accurate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (
    TensorOperator,
    as_matrix,
    commutator,
    eigen_decompose,
    opnorm,
    rel_err,
)
from .errors import (
    ArityCap,
    ContourViolation,
    DomainViolation,
    NonCommutingTuple,
    QuadratureNoConvergence,
    TensorRuleViolation,
)
from .functions import HoloFunction, MultivariateFunction
from .quadrature import circle_points, contour_quadrature, simplex_integrate
from .tolerances import DEFAULTS

__all__ = [
    "Contour",
    "CommutingTuple",
    "contour_for",
    "contour_for_union",
    "apply_via_eig",
    "apply_function",
    "funcalc_n",
    "funcalc_elementary",
    "dd_tensor",
    "dd_apply",
    "dd_commuting",
    "genocchi_hermite_matrix",
]

MAX_ARITY = 4
MAX_AXIS_NODES = 256


@dataclass(frozen=True)
class Contour:
    """Circular integration cycle: center, radius, starting trapezoid count."""

    center: complex
    radius: float
    nodes: int = 16

    def __post_init__(self):
        if self.radius <= 0:
            raise ContourViolation("contour radius must be positive")
        if self.nodes < 16 or self.nodes & (self.nodes - 1):
            raise ContourViolation("node count must be a power of two >= 16")

    def points(self, m: int | None = None):
        return circle_points(self.center, self.radius, m or self.nodes)


class CommutingTuple:
    """Tuple of same-size matrices validated to commute pairwise.

    The commutator of every pair must have operator norm at most
    ``comm_tol * |a_i| * |a_j|``.
    """

    def __init__(self, mats: Sequence, comm_tol: float = DEFAULTS.comm_tol):
        self.mats = tuple(as_matrix(m) for m in mats)
        if not self.mats:
            raise NonCommutingTuple("empty tuple")
        d = self.mats[0].shape[0]
        self.mats = tuple(as_matrix(m, dim=d) for m in self.mats)
        self.comm_tol = comm_tol
        norms = [max(opnorm(m), 1e-300) for m in self.mats]
        for i in range(len(self.mats)):
            for j in range(i + 1, len(self.mats)):
                defect = opnorm(commutator(self.mats[i], self.mats[j]))
                if defect > comm_tol * norms[i] * norms[j]:
                    raise NonCommutingTuple(
                        f"matrices {i} and {j}: commutator norm {defect:.3e} "
                        f"exceeds {comm_tol:g} * |a_i| * |a_j|"
                    )

    @property
    def dim(self) -> int:
        return self.mats[0].shape[0]

    def __len__(self):
        return len(self.mats)

    def __iter__(self):
        return iter(self.mats)

    def __getitem__(self, k):
        return self.mats[k]


def _as_tuple(a, comm_tol: float = DEFAULTS.comm_tol) -> CommutingTuple:
    if isinstance(a, CommutingTuple):
        return a
    if isinstance(a, np.ndarray) and a.ndim == 2:
        a = (a,)
    return CommutingTuple(a, comm_tol)


def contour_for(m, margin: float = 0.1, nodes: int = 16) -> Contour:
    """Circle centered at the eigenvalue centroid, enclosing the spectrum with margin."""
    lam = np.linalg.eigvals(as_matrix(m))
    return _contour_around(lam, margin, nodes)


def contour_for_union(mats: Sequence, margin: float = 0.1, nodes: int = 16) -> Contour:
    """Circle enclosing the union of the spectra of several matrices."""
    lam = np.concatenate([np.linalg.eigvals(as_matrix(m)) for m in mats])
    return _contour_around(lam, margin, nodes)


def _contour_around(points: np.ndarray, margin: float, nodes: int) -> Contour:
    center = complex(points.mean())
    spread = float(np.max(np.abs(points - center)))
    radius = (1.0 + margin) * spread + margin * (1.0 + spread)
    return Contour(center, radius, nodes)


def _check_encloses(c: Contour, mats: Sequence[np.ndarray]) -> None:
    for m in mats:
        lam = np.linalg.eigvals(m)
        if np.max(np.abs(lam - c.center)) >= c.radius:
            raise ContourViolation("contour does not enclose the spectrum")


def _check_domain(c: Contour, domain) -> None:
    if domain is None:
        return
    zeta, _ = c.points(64)
    if not np.all(domain.contains(zeta)):
        raise ContourViolation("contour exits the declared function domain")


def _resolvents(zeta: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Stack of (zeta_k - a)^-1 over the contour nodes."""
    d = a.shape[0]
    eye = np.eye(d, dtype=complex)
    return np.linalg.inv(zeta[:, None, None] * eye - a)


def apply_via_eig(f, m) -> np.ndarray:
    """Eigendecomposition route: V diag(f(w)) V^-1.

    Serves as the independent oracle for the contour route; raises
    :class:`opcalc.errors.NonDiagonalizable` for defective input.
    """
    spec, v, vinv = eigen_decompose(m)
    fw = np.asarray(f(spec.eigenvalues), dtype=complex)
    return (v * fw) @ vinv


def apply_function(
    f: HoloFunction,
    m,
    contour: Contour | None = None,
    *,
    rtol: float = DEFAULTS.funcalc_rtol,
    stats: dict | None = None,
) -> np.ndarray:
    """f(m) by circle quadrature of f(z) (z - m)^-1."""
    a = as_matrix(m)
    c = contour or contour_for(a)
    _check_encloses(c, [a])
    _check_domain(c, getattr(f, "domain", None))

    def batch(zeta):
        vals = np.asarray(f(zeta), dtype=complex)
        return vals[:, None, None] * _resolvents(zeta, a)

    return contour_quadrature(batch, c.center, c.radius, start=c.nodes, rtol=rtol,
                              cap=8192, stats=stats)


def funcalc_n(
    f,
    a,
    cs: Sequence[Contour] | None = None,
    *,
    rtol: float = DEFAULTS.funcalc_rtol,
    comm_tol: float = DEFAULTS.comm_tol,
    cap: int = MAX_AXIS_NODES,
    block_budget: int = 1 << 22,
    stats: dict | None = None,
) -> np.ndarray:
    """f(a_1, ..., a_n) for a commuting tuple by tensor-grid circle quadrature.

    One circle per variable; all axes double their trapezoid counts together
    until two levels agree to ``rtol`` in operator norm (per-axis count capped
    at ``cap``, arity capped at 4).  Grid blocks larger than ``block_budget``
    entries are never materialized: leading axes fall back to a loop, so the
    three- and four-variable cases cost time rather than memory.  Wide spectra
    need many nodes per axis; passing contours with a larger margin makes the
    trapezoid converge geometrically faster.
    """
    tup = _as_tuple(a, comm_tol)
    n = len(tup)
    if n > MAX_ARITY:
        raise ArityCap(f"tensor-grid quadrature supports up to {MAX_ARITY} variables")
    domains: tuple = ()
    if isinstance(f, MultivariateFunction):
        domains = f.domains
    elif isinstance(f, HoloFunction):
        if n != 1:
            raise ContourViolation("a univariate handle only evaluates a 1-tuple")
        domains = (f.domain,)

    if cs is None:
        cs = [contour_for(m) for m in tup]
    if len(cs) != n:
        raise ContourViolation(f"need {n} contours, got {len(cs)}")
    for j, c in enumerate(cs):
        _check_encloses(c, [tup[j]])
        _check_domain(c, domains[j] if j < len(domains) else None)

    d = tup.dim
    start = max(16, max(c.nodes for c in cs))

    def level(m_nodes: int):
        zetas, ws, res, res_norms = [], [], [], []
        for j, c in enumerate(cs):
            zeta, w = c.points(m_nodes)
            zetas.append(zeta)
            ws.append(w)
            r = _resolvents(zeta, tup[j])
            res.append(r)
            res_norms.append(np.linalg.norm(r, axis=(1, 2)))
        # trailing axes are contracted as one dense block; leading axes are
        # looped so memory stays bounded for three and four variables
        tail = n
        while tail > 1 and m_nodes**tail > block_budget:
            tail -= 1
        lead = n - tail
        tail_grids = np.meshgrid(*zetas[lead:], indexing="ij")
        tail_coef = np.ones((1,) * tail, dtype=complex)
        tail_nu = np.ones((1,) * tail)
        for axis in range(tail):
            shape = [1] * tail
            shape[axis] = m_nodes
            tail_coef = tail_coef * ws[lead + axis].reshape(shape)
            tail_nu = tail_nu * (
                np.abs(ws[lead + axis]) * res_norms[lead + axis]
            ).reshape(shape)

        def tail_value(lead_zetas):
            fv = np.asarray(f(*lead_zetas, *tail_grids), dtype=complex)
            coef = np.broadcast_to(fv, (m_nodes,) * tail) * tail_coef
            x = np.tensordot(coef, res[lead], axes=(0, 0))
            for r in res[lead + 1:]:
                x = np.einsum("a...ij,ajk->...ik", x, r)
            mass = float(np.sum(np.abs(fv) * tail_nu))
            return x, mass

        if lead == 0:
            return tail_value(())

        total = np.zeros((d, d), dtype=complex)
        mass_total = 0.0
        for flat in range(m_nodes**lead):
            idx = []
            remainder = flat
            for _ in range(lead):
                idx.append(remainder % m_nodes)
                remainder //= m_nodes
            idx.reverse()
            x, mass = tail_value(tuple(zetas[j][idx[j]] for j in range(lead)))
            weight = np.eye(d, dtype=complex)
            scale = 1.0
            for j in range(lead):
                weight = weight @ (ws[j][idx[j]] * res[j][idx[j]])
                scale *= abs(ws[j][idx[j]]) * res_norms[j][idx[j]]
            total = total + weight @ x
            mass_total += scale * mass
        return total, mass_total

    m_nodes = start
    prev, prev_mass = level(m_nodes)
    while m_nodes < cap:
        m_nodes *= 2
        cur, mass = level(m_nodes)
        err = opnorm(cur - prev)
        floor = max(rtol * opnorm(cur), 2e-15 * max(mass, prev_mass), 1e-300)
        prev, prev_mass = cur, mass
        if err <= floor:
            if stats is not None:
                stats["axis_nodes"] = m_nodes
            return cur
    raise QuadratureNoConvergence(
        f"tensor-grid quadrature did not stabilize within {cap} nodes per axis"
    )


def funcalc_elementary(
    fs: Sequence[HoloFunction],
    a,
    cs: Sequence[Contour] | None = None,
    *,
    check_tol: float = DEFAULTS.tensor_rule,
    rtol: float = DEFAULTS.funcalc_rtol,
    stats: dict | None = None,
) -> np.ndarray:
    """(f_1 x ... x f_n)(a) with the product-rule cross-check.

    Evaluates the joint tensor-grid integral of the product function and the
    product of single-variable values, verifies they agree to ``check_tol``,
    and returns the product of single-variable values.
    """
    tup = _as_tuple(a)
    n = len(tup)
    if len(fs) != n:
        raise ContourViolation(f"need {n} functions, got {len(fs)}")
    product = MultivariateFunction(
        fn=lambda *zs: np.prod([fj(z) for fj, z in zip(fs, zs)], axis=0),
        domains=tuple(fj.domain for fj in fs),
        name="*".join(fj.name for fj in fs),
    )
    joint = funcalc_n(product, tup, cs, rtol=rtol)
    singles = np.eye(tup.dim, dtype=complex)
    for j, fj in enumerate(fs):
        singles = singles @ apply_function(fj, tup[j], cs[j] if cs else None, rtol=rtol)
    defect = rel_err(joint, singles)
    if stats is not None:
        stats["tensor_rule_defect"] = defect
    if defect > check_tol:
        raise TensorRuleViolation(
            f"joint and factored evaluations differ by {defect:.3e} "
            f"(tensor-product-rule, tol {check_tol:g})"
        )
    return singles


def dd_tensor(
    f: HoloFunction,
    mats: Sequence,
    contour: Contour | None = None,
    *,
    rtol: float = DEFAULTS.funcalc_rtol,
    stats: dict | None = None,
) -> TensorOperator:
    """Tensor divided difference of a (not necessarily commuting) tuple.

    A single circle around the union of the spectra integrates
    f(z) * (z - a_0)^-1 (x) ... (x) (z - a_n)^-1 into an (n+1)-slot operator.
    """
    ms = [as_matrix(m) for m in mats]
    d = ms[0].shape[0]
    c = contour or contour_for_union(ms)
    _check_encloses(c, ms)
    _check_domain(c, f.domain)

    def batch(zeta):
        out = _resolvents(zeta, ms[0])
        for m in ms[1:]:
            r = _resolvents(zeta, m)
            p, q = out.shape[1], r.shape[1]
            out = np.einsum("kab,kcd->kacbd", out, r).reshape(len(zeta), p * q, p * q)
        return np.asarray(f(zeta), dtype=complex)[:, None, None] * out

    big = d ** len(ms)
    value = contour_quadrature(batch, c.center, c.radius, start=c.nodes,
                               rtol=rtol, chunk=max(1, (1 << 23) // big**2),
                               stats=stats)
    return TensorOperator(value, d, len(ms))


def dd_apply(
    f: HoloFunction,
    mats: Sequence,
    bs: Sequence,
    contour: Contour | None = None,
    *,
    rtol: float = DEFAULTS.funcalc_rtol,
    stats: dict | None = None,
) -> np.ndarray:
    """Divided difference of a tuple paired with interleaved matrix factors.

    Integrates f(z) (z-a_0)^-1 b_1 (z-a_1)^-1 ... b_n (z-a_n)^-1 directly in
    d x d arithmetic (the big tensor operator is never materialized); equals
    ``pair(dd_tensor(f, mats), bs)``.
    """
    ms = [as_matrix(m) for m in mats]
    d = ms[0].shape[0]
    if len(bs) != len(ms) - 1:
        raise ContourViolation(f"{len(ms)} nodes pair with {len(ms) - 1} factors")
    bmats = [as_matrix(b, dim=d) for b in bs]
    c = contour or contour_for_union(ms)
    _check_encloses(c, ms)
    _check_domain(c, f.domain)

    def batch(zeta):
        x = _resolvents(zeta, ms[0])
        for b, m in zip(bmats, ms[1:]):
            x = x @ b
            x = x @ _resolvents(zeta, m)
        return np.asarray(f(zeta), dtype=complex)[:, None, None] * x

    return contour_quadrature(batch, c.center, c.radius, start=c.nodes,
                              rtol=rtol, stats=stats)


def dd_commuting(
    f: HoloFunction,
    a,
    contour: Contour | None = None,
    *,
    rtol: float = DEFAULTS.funcalc_rtol,
    comm_tol: float = DEFAULTS.comm_tol,
) -> np.ndarray:
    """Matrix-valued divided difference of a commuting tuple (shared contour)."""
    tup = _as_tuple(a, comm_tol)
    c = contour or contour_for_union(tup.mats)
    _check_encloses(c, tup.mats)
    _check_domain(c, f.domain)

    def batch(zeta):
        x = _resolvents(zeta, tup[0])
        for m in tup.mats[1:]:
            x = x @ _resolvents(zeta, m)
        return np.asarray(f(zeta), dtype=complex)[:, None, None] * x

    return contour_quadrature(batch, c.center, c.radius, start=c.nodes, rtol=rtol)


def genocchi_hermite_matrix(
    f: HoloFunction,
    a,
    *,
    rtol: float = 1e-9,
    grid: int = 10,
    comm_tol: float = DEFAULTS.comm_tol,
) -> np.ndarray:
    """Divided difference of a commuting tuple as a simplex integral of f^(n).

    The n-th derivative is applied to the convex combination matrix through the
    single-variable contour calculus at every quadrature node.  Holomorphy on
    the union of combination spectra is checked on a simplex lattice with
    ``grid`` points per axis before integrating.
    """
    tup = _as_tuple(a, comm_tol)
    n = len(tup) - 1
    if n == 0:
        return apply_function(f, tup[0])

    from .divdiff import compositions

    lattice = grid - 1
    for alpha in compositions(lattice, n + 1):
        comb = sum(w / lattice * m for w, m in zip(alpha, tup.mats))
        lam = np.linalg.eigvals(comb)
        if not np.all(f.domain.contains(lam)):
            raise DomainViolation(
                "combination spectrum leaves the declared domain at a lattice point"
            )

    fn_deriv = f.deriv_function(n)

    def integrand(s):
        out = np.empty((len(s), tup.dim, tup.dim), dtype=complex)
        for k, weights in enumerate(s):
            comb = sum(w * m for w, m in zip(weights, tup.mats))
            out[k] = apply_function(fn_deriv, comb)
        return out

    return simplex_integrate(integrand, n, rtol=rtol, start=8, cap=32)
