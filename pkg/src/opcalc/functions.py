"""Holomorphic function handles, domain descriptors, and the named builtins.

A :class:`HoloFunction` bundles a vectorized evaluation handle with a domain
descriptor and (optionally) a derivative handle ``deriv(k, z)``.  When no
derivative handle is present, derivatives are synthesized by a Cauchy-integral
circle quadrature whose radius is half the distance to the declared domain
boundary, so everything stays inside the holomorphic toolkit.

Named builtins accepted everywhere a function name is allowed (CLI included):

* ``exp``, ``log``, ``id``
* ``pow:N``          -- z**N, N any integer (negative N excludes 0)
* ``resolvent:RE,IM``-- z -> 1 / (lambda - z) with lambda = RE + i IM
* ``rational:K``     -- s -> (1 + s)**-K (also accepted: ``rational:(1+s)^-K``)
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainViolation

__all__ = [
    "Domain",
    "Disc",
    "Strip",
    "Sector",
    "HalfPlane",
    "Entire",
    "HoloFunction",
    "MultivariateFunction",
    "exp_function",
    "log_function",
    "power_function",
    "resolvent_function",
    "rational_function",
    "named_function",
    "cauchy_derivative",
]


class Domain:
    """Base descriptor for an open set on which a function is holomorphic."""

    def contains(self, z) -> np.ndarray:
        raise NotImplementedError

    def boundary_distance(self, z) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class Disc(Domain):
    center: complex = 0.0
    radius: float = 1.0

    def contains(self, z):
        return np.abs(np.asarray(z) - self.center) < self.radius

    def boundary_distance(self, z):
        return self.radius - np.abs(np.asarray(z) - self.center)


@dataclass(frozen=True)
class Strip(Domain):
    """|Im z| < delta."""

    delta: float

    def contains(self, z):
        return np.abs(np.imag(np.asarray(z))) < self.delta

    def boundary_distance(self, z):
        return self.delta - np.abs(np.imag(np.asarray(z)))


@dataclass(frozen=True)
class Sector(Domain):
    """|arg z| < delta, z != 0."""

    delta: float

    def contains(self, z):
        z = np.asarray(z)
        return (np.abs(np.angle(z)) < self.delta) & (z != 0)

    def boundary_distance(self, z):
        z = np.asarray(z)
        gap = self.delta - np.abs(np.angle(z))
        # distance to the bounding rays, capped by the distance to the tip
        return np.where(gap > 0, np.abs(z) * np.sin(np.minimum(gap, np.pi / 2)), 0.0)


@dataclass(frozen=True)
class HalfPlane(Domain):
    """Re z > 0."""

    def contains(self, z):
        return np.real(np.asarray(z)) > 0

    def boundary_distance(self, z):
        return np.real(np.asarray(z))


@dataclass(frozen=True)
class Entire(Domain):
    def contains(self, z):
        return np.full(np.shape(z), True)

    def boundary_distance(self, z):
        # unbounded; grows with |z| so synthesized-derivative circles stay well scaled
        return 2.0 * (1.0 + np.abs(np.asarray(z)))


ENTIRE = Entire()


def cauchy_derivative(f: "HoloFunction", k: int, z, nodes: int = 32, rtol: float = 1e-11):
    """k-th derivative via the Cauchy integral on a circle inside the domain.

    The circle around each point has radius half the distance to the domain
    boundary; the trapezoid count doubles until two passes agree to ``rtol``.
    """
    z = np.asarray(z, dtype=complex)
    dist = np.asarray(f.domain.boundary_distance(z), dtype=float)
    if np.any(dist <= 0):
        raise DomainViolation("derivative synthesis point outside the declared domain")
    rho = 0.5 * dist
    kfac = math.factorial(k)

    def estimate(m):
        theta = 2.0 * np.pi * np.arange(m) / m
        ring = np.exp(1j * theta)  # shape (m,)
        zeta = z[..., None] + rho[..., None] * ring
        vals = f(zeta) * ring ** (-k)
        return kfac * np.mean(vals, axis=-1) / rho**k

    prev = estimate(nodes)
    m = nodes
    while m < 8192:
        m *= 2
        cur = estimate(m)
        scale = np.maximum(np.abs(cur), 1e-300)
        if np.all(np.abs(cur - prev) <= rtol * scale):
            return cur if cur.shape else complex(cur)
        prev = cur
    return prev if prev.shape else complex(prev)


@dataclass(frozen=True)
class HoloFunction:
    """Holomorphic function handle: evaluation, domain, optional derivatives."""

    fn: Callable
    domain: Domain = ENTIRE
    deriv: Callable | None = None  # deriv(k, z), vectorized in z
    name: str = "custom"

    def __call__(self, z):
        return self.fn(np.asarray(z, dtype=complex))

    def derivative(self, k: int, z):
        """f^(k)(z); uses the supplied handle or Cauchy-integral synthesis."""
        if k == 0:
            return self(z)
        if self.deriv is not None:
            return self.deriv(k, np.asarray(z, dtype=complex))
        return cauchy_derivative(self, k, z)

    def deriv_function(self, k: int) -> "HoloFunction":
        """The k-th derivative as a new handle on the same domain."""
        if k == 0:
            return self
        return HoloFunction(
            fn=lambda z, _k=k: self.derivative(_k, z),
            domain=self.domain,
            deriv=(None if self.deriv is None
                   else (lambda j, z, _k=k: self.deriv(_k + j, z))),
            name=f"{self.name}^({k})",
        )


@dataclass(frozen=True)
class MultivariateFunction:
    """Function of several complex variables with per-variable domains."""

    fn: Callable  # fn(z1, ..., zn) on broadcastable arrays
    domains: tuple = field(default_factory=tuple)
    name: str = "custom"

    @property
    def arity(self) -> int:
        return len(self.domains)

    def __call__(self, *zs):
        return self.fn(*[np.asarray(z, dtype=complex) for z in zs])


# ---------------------------------------------------------------------------
# builtins


def exp_function() -> HoloFunction:
    return HoloFunction(np.exp, ENTIRE, deriv=lambda k, z: np.exp(z), name="exp")


def log_function() -> HoloFunction:
    # principal branch, holomorphic off the slit (-inf, 0]
    def dlog(k, z):
        return (-1.0) ** (k - 1) * math.factorial(k - 1) * z ** (-k)

    return HoloFunction(np.log, Sector(np.pi * (1 - 1e-12)), deriv=dlog, name="log")


def power_function(n: int) -> HoloFunction:
    """z**n; negative n lives on the slit plane (0 excluded)."""

    def dpow(k, z):
        coeff = 1.0
        for i in range(k):
            coeff *= n - i
        if coeff == 0:
            return np.zeros_like(np.asarray(z, dtype=complex))
        return coeff * z ** (n - k)

    domain = ENTIRE if n >= 0 else Sector(np.pi * (1 - 1e-12))
    return HoloFunction(lambda z: z ** n, domain, deriv=dpow, name=f"pow:{n}")


def resolvent_function(lam: complex, domain: Domain | None = None) -> HoloFunction:
    """z -> (lam - z)^-1 on a disc staying clear of the pole."""
    if domain is None:
        domain = Disc(0.0, 0.95 * abs(lam)) if lam != 0 else Sector(np.pi * (1 - 1e-12))

    def dres(k, z):
        return math.factorial(k) * (lam - z) ** (-(k + 1))

    return HoloFunction(
        lambda z: 1.0 / (lam - z), domain, deriv=dres,
        name=f"resolvent:{lam.real:g},{lam.imag:g}",
    )


def rational_function(k: int) -> HoloFunction:
    """s -> (1 + s)**-k, holomorphic off the slit through -1."""

    def drat(j, z):
        coeff = 1.0
        for i in range(j):
            coeff *= -(k + i)
        return coeff * (1.0 + z) ** (-(k + j))

    return HoloFunction(
        lambda s: (1.0 + s) ** (-k),
        Sector(np.pi * (1 - 1e-12)),
        deriv=drat,
        name=f"rational:{k}",
    )


_RATIONAL_RE = re.compile(r"rational:(?:\(1\+s\)\^-)?(\d+)\)?$")


def named_function(name: str) -> HoloFunction:
    """Resolve a CLI-style function name to a handle."""
    name = name.strip()
    if name == "exp":
        return exp_function()
    if name == "log":
        return log_function()
    if name == "id":
        return power_function(1)
    if name.startswith("pow:"):
        return power_function(int(name.split(":", 1)[1]))
    if name.startswith("resolvent:"):
        parts = name.split(":", 1)[1].split(",")
        lam = complex(float(parts[0]), float(parts[1]) if len(parts) > 1 else 0.0)
        return resolvent_function(lam)
    m = _RATIONAL_RE.match(name)
    if m:
        return rational_function(int(m.group(1)))
    raise ValueError(f"unknown function name: {name!r}")
