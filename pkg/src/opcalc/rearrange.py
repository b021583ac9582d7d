"""Half-line operator integrals and their rearrangement into modular form.

For functions f_0..f_p with power decay on a sector, the integral

    int_0^inf f_0(u A) b_1 f_1(u A) ... b_p f_p(u A) du

is evaluated three independent ways: directly (adaptive quadrature of the
matrix integrand), as the kernel F applied to the commuting slot lifts
A^(0)..A^(p) and paired with the b factors, and as A^-1 times the kernel G
applied to cumulative products of the modular operators exp(-nabla_a).
All three must agree; that agreement is the content of the identity this
module verifies.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .core import (
    TensorOperator,
    as_matrix,
    eigen_decompose,
    embed_slot,
    matrix_exp,
    multikron,
    nabla,
    pair,
    rel_err,
)
from .errors import DecayViolation, NonDiagonalizable, SectorViolation
from .functions import HoloFunction, Sector
from .funcalc import apply_function
from .quadrature import halfline_integrate
from .tolerances import DEFAULTS

__all__ = [
    "SectorFunction",
    "SectorConfig",
    "ModularFamily",
    "power_rational",
    "family_from_exponents",
    "validate_decay",
    "sector_check",
    "modular_family",
    "kernel_F",
    "kernel_G",
    "rearrange_lhs",
    "rearrange_rhs_F",
    "rearrange_rhs_G",
]


@dataclass(frozen=True)
class SectorFunction:
    """Holomorphic function on a sector with tagged power decay.

    ``decay_far`` is the exponent alpha in |f(s)| <= C |s|^-alpha for large
    |s|; ``decay_near`` the exponent beta for small |s|.
    """

    holo: HoloFunction
    decay_far: float
    decay_near: float
    family: str = "custom"

    def __call__(self, s):
        return self.holo(s)


@dataclass(frozen=True)
class SectorConfig:
    """Opening angle delta with the associated strip and sector descriptors."""

    delta: float

    def __post_init__(self):
        if not 0.0 < self.delta < np.pi / 2:
            raise SectorViolation("opening angle must lie in (0, pi/2)")

    @property
    def sector(self) -> Sector:
        return Sector(self.delta)

    @property
    def double_sector(self) -> Sector:
        return Sector(2.0 * self.delta)


def power_rational(q: int, p: int = 0) -> SectorFunction:
    """The builtin family s -> s**p * (1+s)**-q (far decay q - p, near decay -p)."""

    def fn(s):
        return s**p * (1.0 + s) ** (-q)

    holo = HoloFunction(fn, Sector(np.pi * (1 - 1e-12)), name=f"s^{p}(1+s)^-{q}")
    return SectorFunction(holo, decay_far=float(q - p), decay_near=float(-p),
                          family=f"s^{p}(1+s)^-{q}")


def family_from_exponents(qs) -> list[SectorFunction]:
    """[(1+s)^-q for q in qs] -- the CLI's --family parser target."""
    return [power_rational(int(q)) for q in qs]


def validate_decay(
    f: SectorFunction,
    delta: float,
    *,
    rays: int = 5,
    slack: float = 100.0,
) -> bool:
    """Sample rays in the double sector and check the tagged decay exponents.

    |f| * |s|^alpha must stay bounded (within ``slack`` of its value at
    |s| = 10) as |s| grows, and |f| * |s|^beta as |s| shrinks.
    """
    angles = np.linspace(-1.8 * delta, 1.8 * delta, rays)
    ok = True
    for theta in angles:
        ray = np.exp(1j * theta)
        far_ref = abs(f(10.0 * ray)) * 10.0**f.decay_far
        for r in (1e2, 1e4, 1e6):
            ok &= abs(f(r * ray)) * r**f.decay_far <= slack * max(far_ref, 1e-300)
        near_ref = abs(f(0.1 * ray)) * 0.1**f.decay_near
        for r in (1e-2, 1e-4, 1e-6):
            ok &= abs(f(r * ray)) * r**f.decay_near <= slack * max(near_ref, 1e-300)
    return bool(ok)


def _check_decay(fs) -> None:
    far = sum(f.decay_far for f in fs)
    near = sum(f.decay_near for f in fs)
    if far <= 1.0 or near >= 1.0:
        raise DecayViolation(
            f"sum of far exponents {far:g} must exceed 1 and sum of near "
            f"exponents {near:g} must stay below 1"
        )


def sector_check(a, delta: float) -> tuple[bool, dict]:
    """Is spec(a) inside the strip |Im z| < delta?  Returns (flag, report)."""
    lam = np.linalg.eigvals(as_matrix(a))
    bad = [complex(z) for z in lam if abs(z.imag) >= delta]
    report = {
        "delta": float(delta),
        "eigenvalues": [complex(z) for z in lam],
        "violations": bad,
    }
    return (not bad), report


@dataclass
class ModularFamily:
    """exp(a) together with cumulative products of the slot-difference exponentials."""

    A: np.ndarray
    delta_products: list  # TensorOperator, j = 1..p: exp(-nabla^(1)) ... exp(-nabla^(j))
    delta: float
    eqtrear5_residual: float


def modular_family(
    a,
    p: int,
    delta: float,
    *,
    tol: float = 1e-10,
) -> ModularFamily:
    """Build exp(-nabla_a^(j)) products on p+1 slots and verify their algebra.

    Requires spec(a) inside the strip of half-width ``delta``.  Validates that
    the slot lift of exp(a) into slot j equals the slot-0 lift times the
    cumulative product (residual <= tol), and that every product spectrum
    stays inside the double sector.
    """
    am = as_matrix(a)
    ok, report = sector_check(am, delta)
    if not ok:
        raise SectorViolation(f"eigenvalues outside strip: {report['violations']}")
    A = matrix_exp(am)
    d = am.shape[0]
    products = []
    cum = None
    worst = 0.0
    a0 = embed_slot(A, p, 0)
    for j in range(1, p + 1):
        dj = TensorOperator(matrix_exp(-nabla(am, p, j).matrix), d, p + 1)
        cum = dj if cum is None else cum @ dj
        products.append(cum)
        worst = max(worst, rel_err((a0 @ cum).matrix, embed_slot(A, p, j).matrix))
        mu = np.linalg.eigvals(cum.matrix)
        if not np.all(Sector(2 * delta).contains(mu)):
            raise SectorViolation(
                f"modular product {j} has spectrum outside the double sector"
            )
    if worst > tol:
        raise SectorViolation(
            f"slot-lift factorization residual {worst:.3e} exceeds {tol:g}"
        )
    return ModularFamily(A, products, delta, worst)


def kernel_F(fs, s, *, rtol: float = DEFAULTS.halfline_rtol, depth_cap: int = 30) -> complex:
    """F(s_0..s_p) = int_0^inf f_0(u s_0) ... f_p(u s_p) du."""
    _check_decay(fs)
    pts = np.asarray(s, dtype=complex)
    if pts.size != len(fs):
        raise DecayViolation(f"{len(fs)} functions need {len(fs)} arguments")

    def integrand(u):
        vals = fs[0](u * pts[0])
        for f, sj in zip(fs[1:], pts[1:]):
            vals = vals * f(u * sj)
        return vals

    return complex(halfline_integrate(integrand, rtol=rtol, depth_cap=depth_cap))


def kernel_G(fs, lam, *, rtol: float = DEFAULTS.halfline_rtol, depth_cap: int = 30) -> complex:
    """G(l_1..l_p) = int_0^inf f_0(u) f_1(u l_1) ... f_p(u l_p) du."""
    _check_decay(fs)
    pts = np.asarray(lam, dtype=complex)
    if pts.size != len(fs) - 1:
        raise DecayViolation(f"{len(fs)} functions need {len(fs) - 1} arguments")

    def integrand(u):
        vals = np.asarray(fs[0](np.asarray(u, dtype=complex)), dtype=complex)
        for f, lj in zip(fs[1:], pts):
            vals = vals * f(u * lj)
        return vals

    return complex(halfline_integrate(integrand, rtol=rtol, depth_cap=depth_cap))


def _sector_eigs(A, delta: float | None) -> np.ndarray:
    lam = np.linalg.eigvals(as_matrix(A))
    cap = delta if delta is not None else np.pi / 2
    if np.any(lam == 0) or np.any(np.abs(np.angle(lam)) >= cap):
        raise SectorViolation(
            "matrix spectrum must lie in the open sector |arg z| < "
            f"{cap:g} (eigenvalues {lam})"
        )
    return lam


def rearrange_lhs(
    fs,
    A,
    bs,
    *,
    delta: float | None = None,
    rtol: float = DEFAULTS.halfline_rtol,
    depth_cap: int = 30,
    stats: dict | None = None,
) -> np.ndarray:
    """Direct adaptive quadrature of int f_0(uA) b_1 f_1(uA) ... b_p f_p(uA) du.

    Matrix arguments go through the eigendecomposition of A; if A is too far
    from diagonalizable, each factor falls back to the single-variable contour
    calculus (slower, works for any spectrum inside the sector).
    """
    _check_decay(fs)
    Am = as_matrix(A)
    _sector_eigs(Am, delta)
    bmats = [as_matrix(b, dim=Am.shape[0]) for b in bs]
    if len(bmats) != len(fs) - 1:
        raise SectorViolation(f"{len(fs)} functions need {len(fs) - 1} factors")

    try:
        spec, v, vinv = eigen_decompose(Am)
        lam = spec.eigenvalues

        def factor(f, u):
            vals = np.asarray(f(np.multiply.outer(u, lam)), dtype=complex)
            return np.einsum("ij,kj,jl->kil", v, vals, vinv)

    except NonDiagonalizable:
        def factor(f, u):
            out = np.empty((len(u), Am.shape[0], Am.shape[0]), dtype=complex)
            for k, uk in enumerate(u):
                out[k] = apply_function(f.holo, uk * Am)
            return out

    def integrand(u):
        u = np.atleast_1d(np.asarray(u, dtype=float))
        x = factor(fs[0], u)
        for f, b in zip(fs[1:], bmats):
            x = x @ b
            x = x @ factor(f, u)
        return x

    return halfline_integrate(integrand, rtol=rtol, depth_cap=depth_cap, stats=stats)


def _joint_diagonal(fs, A, bs, delta, values_for):
    """Shared scaffolding: kernel values on joint eigenvalue tuples, paired with bs."""
    _check_decay(fs)
    Am = as_matrix(A)
    _sector_eigs(Am, delta)
    p = len(fs) - 1
    if len(bs) != p:
        raise SectorViolation(f"{len(fs)} functions need {p} factors")
    spec, v, vinv = eigen_decompose(Am)
    lam = spec.eigenvalues
    d = Am.shape[0]
    w = multikron([v] * (p + 1))
    winv = multikron([vinv] * (p + 1))
    vals = np.empty(d ** (p + 1), dtype=complex)
    for flat, idx in enumerate(itertools.product(range(d), repeat=p + 1)):
        vals[flat] = values_for(lam[list(idx)])
    t = TensorOperator((w * vals) @ winv, d, p + 1)
    return pair(t, [as_matrix(b, dim=d) for b in bs])


def rearrange_rhs_F(
    fs,
    A,
    bs,
    *,
    delta: float | None = None,
    rtol: float = DEFAULTS.halfline_rtol,
    depth_cap: int = 30,
) -> np.ndarray:
    """Kernel F on the commuting slot lifts of A, paired with the b factors.

    The lifts A^(0)..A^(p) are jointly diagonalized by the tensor power of
    A's eigenbasis, so F acts entrywise on tuples of eigenvalues.
    """
    return _joint_diagonal(
        fs, A, bs, delta,
        values_for=lambda s: kernel_F(fs, s, rtol=rtol, depth_cap=depth_cap),
    )


def rearrange_rhs_G(
    fs,
    A,
    bs,
    *,
    delta: float | None = None,
    rtol: float = DEFAULTS.halfline_rtol,
    depth_cap: int = 30,
) -> np.ndarray:
    """A^-1 times kernel G on the cumulative modular products, paired with bs.

    The products exp(-nabla^(1))...exp(-nabla^(j)) of the log of A share the
    joint eigenbasis of the slot lifts; their eigenvalues on the tuple
    (i_0..i_p) are the ratios lam_{i_j} / lam_{i_0}, so G also acts entrywise.
    """
    Am = as_matrix(A)
    value = _joint_diagonal(
        fs, Am, bs, delta,
        values_for=lambda s: kernel_G(fs, s[1:] / s[0], rtol=rtol, depth_cap=depth_cap),
    )
    return np.linalg.inv(Am) @ value
