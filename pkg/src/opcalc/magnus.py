"""Integrator for Y'(t) = A(t) Y(t) through the nonlinear ODE for log Y.

The logarithm Omega(t) = log Y(t) satisfies

    Omega' = sum_n (B_n / n!) ad_Omega^n (A(t)),   Omega(0) = 0,

with Bernoulli numbers B_n in the B_1 = -1/2 convention.  The right-hand side
is summed as written (nested commutators, truncated at a configurable order)
and stepped with the classical 4th-order Runge-Kutta scheme; a plain
Runge-Kutta solver for Y itself with Richardson step-halving serves as the
independent oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import as_matrix, commutator, matrix_exp, opnorm
from .errors import BranchRadiusExceeded, QuadratureNoConvergence, StepRejected

__all__ = [
    "BernoulliTable",
    "bernoulli",
    "magnus_rhs",
    "magnus_solve",
    "rk_reference",
    "triangular_field",
    "perturbed_triangular_field",
    "field_from_samples",
    "builtin_field",
]

BERNOULLI_CAP = 30
BRANCH_RADIUS = np.pi


def _field_value(A, t: float, dim: int) -> np.ndarray:
    value = np.asarray(A(t), dtype=complex)
    if value.shape != (dim, dim):
        raise StepRejected(f"field returned shape {value.shape} at t = {t:g}")
    if not np.all(np.isfinite(value.view(float))):
        raise StepRejected(f"field is not finite at t = {t:g}")
    return value


@dataclass(frozen=True)
class BernoulliTable:
    """B_0..B_K as exact rationals rendered to floats (B_1 = -1/2 convention)."""

    values: tuple[float, ...]
    fractions: tuple[Fraction, ...]
    convention: str = "B1=-1/2"

    def __len__(self):
        return len(self.values)


def bernoulli(K: int) -> BernoulliTable:
    """Bernoulli numbers through the binomial recurrence, exactly."""
    if K > BERNOULLI_CAP:
        raise ValueError(f"table capped at K = {BERNOULLI_CAP}")
    fracs = [Fraction(1)]
    for n in range(1, K + 1):
        acc = Fraction(0)
        for k in range(n):
            acc += math.comb(n + 1, k) * fracs[k]
        fracs.append(-acc / (n + 1))
    return BernoulliTable(tuple(float(f) for f in fracs), tuple(fracs))


def magnus_rhs(omega, a_t, order: int, table: BernoulliTable | None = None) -> np.ndarray:
    """Truncated commutator series sum_{n<=order} (B_n/n!) ad_omega^n(a_t)."""
    if table is None:
        table = bernoulli(order)
    if order >= len(table):
        raise ValueError("order exceeds the Bernoulli table length")
    om = as_matrix(omega)
    x = as_matrix(a_t, dim=om.shape[0])
    total = table.values[0] * x
    for n in range(1, order + 1):
        x = commutator(om, x)
        coeff = table.values[n] / math.factorial(n)
        if coeff != 0.0:
            total = total + coeff * x
    return total


def _rk4(rhs, y0: np.ndarray, t_end: float, h: float, monitor=None) -> np.ndarray:
    y = y0.copy()
    t = 0.0
    while t < t_end - 1e-14 * max(1.0, t_end):
        step = min(h, t_end - t)
        k1 = rhs(t, y)
        k2 = rhs(t + 0.5 * step, y + 0.5 * step * k1)
        k3 = rhs(t + 0.5 * step, y + 0.5 * step * k2)
        k4 = rhs(t + step, y + step * k3)
        y = y + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t += step
        if not np.all(np.isfinite(y.view(float))):
            raise StepRejected(f"non-finite state at t = {t:g}")
        if monitor is not None:
            monitor(t, y)
    return y


def magnus_solve(
    A,
    t_end: float,
    h: float,
    order: int = 8,
    *,
    table: BernoulliTable | None = None,
    branch_radius: float = BRANCH_RADIUS,
    trace: list | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Integrate the log of the propagator and return (Omega(t_end), exp(Omega)).

    ``A`` is a callable t -> matrix.  The commutator series is truncated at
    ``order``; stepping is classical RK4 with fixed step ``h``.  The solve
    aborts with :class:`BranchRadiusExceeded` once |Omega| reaches
    ``branch_radius`` (default pi), where the principal logarithm could no
    longer be trusted.  ``trace``, when given, collects (t, |Omega(t)|) rows.
    """
    if h <= 0:
        raise ValueError("step must be positive")
    tab = table or bernoulli(order)
    a0 = as_matrix(A(0.0))
    omega0 = np.zeros_like(a0)

    def rhs(t, om):
        return magnus_rhs(om, _field_value(A, t, a0.shape[0]), order, tab)

    def monitor(t, om):
        nrm = opnorm(om)
        if nrm >= branch_radius:
            raise BranchRadiusExceeded(
                f"|Omega| = {nrm:.4f} >= {branch_radius:.4f} at t = {t:g}"
            )
        if trace is not None:
            trace.append((t, nrm))

    omega = _rk4(rhs, omega0, t_end, h, monitor)
    return omega, matrix_exp(omega)


def rk_reference(
    A,
    t_end: float,
    h: float | None = None,
    *,
    rtol: float = 1e-10,
    max_halvings: int = 20,
) -> np.ndarray:
    """Propagator of Y' = A(t) Y, Y(0) = 1, by RK4 with Richardson step-halving.

    The step is halved until two consecutive answers agree to ``rtol`` in
    operator norm (relative to the finer answer).
    """
    a0 = as_matrix(A(0.0))
    eye = np.eye(a0.shape[0], dtype=complex)

    def rhs(t, y):
        return _field_value(A, t, a0.shape[0]) @ y

    step = h if h is not None else t_end / 64.0
    prev = _rk4(rhs, eye, t_end, step)
    for _ in range(max_halvings):
        step *= 0.5
        cur = _rk4(rhs, eye, t_end, step)
        if opnorm(cur - prev) <= rtol * max(opnorm(cur), 1e-300):
            return cur
        prev = cur
    raise QuadratureNoConvergence("step halving did not stabilize the propagator")


# ---------------------------------------------------------------------------
# test fields


def triangular_field():
    """The 2x2 upper-triangular field [[2, t], [0, -1]]."""

    def A(t):
        return np.array([[2.0, t], [0.0, -1.0]], dtype=complex)

    return A


def perturbed_triangular_field(seed: int, scale: float = 0.1):
    """Triangular field plus a seeded Hermitian perturbation H0 + t H1."""
    rng = np.random.default_rng(seed)

    def hermitian():
        m = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        m = 0.5 * (m + m.conj().T)
        return m / max(opnorm(m), 1e-300)

    h0, h1 = hermitian(), hermitian()
    base = triangular_field()

    def A(t):
        return base(t) + scale * (h0 + t * h1)

    return A


def field_from_samples(times, mats):
    """Piecewise-linear field through the given (time, matrix) samples."""
    ts = np.asarray(times, dtype=float)
    ms = [as_matrix(m) for m in mats]
    if ts.size != len(ms) or ts.size < 2:
        raise ValueError("need matching times and matrices, at least two samples")
    order = np.argsort(ts)
    ts = ts[order]
    ms = [ms[k] for k in order]

    def A(t):
        if t <= ts[0]:
            return ms[0]
        if t >= ts[-1]:
            return ms[-1]
        k = int(np.searchsorted(ts, t) - 1)
        w = (t - ts[k]) / (ts[k + 1] - ts[k])
        return (1.0 - w) * ms[k] + w * ms[k + 1]

    return A


def builtin_field(name: str):
    """Resolve a CLI field name: 'triangular' or 'perturbed:SEED'."""
    if name == "triangular":
        return triangular_field()
    if name.startswith("perturbed:"):
        return perturbed_triangular_field(int(name.split(":", 1)[1]))
    raise ValueError(f"unknown builtin field {name!r}")
