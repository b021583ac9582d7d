"""Dense complex matrix kernel: eigendecomposition, Kronecker slot lifts, pairing.

Matrices are plain ``numpy.ndarray`` of shape ``(d, d)`` and dtype complex128.
Elements of the (n+1)-fold tensor algebra are realized as Kronecker-product
matrices of dimension ``d**(n+1)`` and carried in :class:`TensorOperator`
so slot bookkeeping survives arithmetic.  Slot 0 is the leftmost Kronecker
factor, so pairing an elementary tensor ``a0 (x) ... (x) an`` with matrices
``b1, ..., bn`` interleaves left to right: ``a0 b1 a1 b2 ... bn an``.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, NonDiagonalizable, SlotOutOfRange
from .tolerances import DEFAULTS

__all__ = [
    "Spectrum",
    "TensorOperator",
    "opnorm",
    "rel_err",
    "as_matrix",
    "eigen_decompose",
    "kron",
    "multikron",
    "embed_slot",
    "nabla",
    "pair",
    "matrix_exp",
    "commutator",
    "matrix_to_json",
    "matrix_from_json",
]


def opnorm(m: np.ndarray) -> float:
    """Operator 2-norm (largest singular value); scalars pass through as |.|."""
    m = np.asarray(m)
    if m.ndim == 0:
        return float(abs(m))
    return float(np.linalg.norm(m, 2))


def rel_err(value: np.ndarray, reference: np.ndarray) -> float:
    """Operator-norm difference relative to the reference (floor 1 on tiny refs)."""
    scale = max(opnorm(reference), 1e-300)
    return opnorm(np.asarray(value) - np.asarray(reference)) / scale


def as_matrix(m, dim: int | None = None) -> np.ndarray:
    """Validate and convert to a square complex matrix with finite entries."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    if dim is not None and a.shape[0] != dim:
        raise DimensionMismatch(f"expected dimension {dim}, got {a.shape[0]}")
    if not np.all(np.isfinite(a.view(float))):
        raise DimensionMismatch("matrix entries must be finite")
    return a


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues of a matrix plus the condition number of its eigenvector basis."""

    eigenvalues: np.ndarray
    conditioning: float


def eigen_decompose(
    m, cond_cap: float = DEFAULTS.eig_cond_cap
) -> tuple[Spectrum, np.ndarray, np.ndarray]:
    """Diagonalize ``m = V diag(w) V^-1``.

    Returns ``(Spectrum, V, V^-1)``.  Raises :class:`NonDiagonalizable` when the
    eigenvector condition number exceeds ``cond_cap`` or the reconstruction
    residual is too large; callers holding such a matrix must fall back to a
    contour method, which never needs this factorization.
    """
    a = as_matrix(m)
    w, v = np.linalg.eig(a)
    cond = float(np.linalg.cond(v))
    if not np.isfinite(cond) or cond > cond_cap:
        raise NonDiagonalizable(
            f"eigenvector condition {cond:.3e} exceeds cap {cond_cap:.1e}"
        )
    vinv = np.linalg.inv(v)
    residual = rel_err((v * w) @ vinv, a) if opnorm(a) > 0 else 0.0
    if residual > DEFAULTS.eig_residual:
        raise NonDiagonalizable(f"reconstruction residual {residual:.3e}")
    return Spectrum(w, cond), v, vinv


def kron(x, y) -> np.ndarray:
    """Kronecker product of two square matrices."""
    return np.kron(as_matrix(x), as_matrix(y))


def multikron(mats: Sequence[np.ndarray]) -> np.ndarray:
    """Kronecker product of a sequence of matrices, left to right."""
    out = np.asarray(mats[0], dtype=complex)
    for m in mats[1:]:
        out = np.kron(out, np.asarray(m, dtype=complex))
    return out


@dataclass(frozen=True)
class TensorOperator:
    """Element of the (n+1)-fold matrix tensor algebra as a d**(n+1) dense matrix."""

    matrix: np.ndarray
    base_dim: int
    slots: int

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (self.base_dim**self.slots,) * 2:
            raise DimensionMismatch(
                f"matrix shape {m.shape} does not match "
                f"base_dim {self.base_dim} ** slots {self.slots}"
            )
        object.__setattr__(self, "matrix", m)

    def _check_compatible(self, other: "TensorOperator") -> None:
        if (self.base_dim, self.slots) != (other.base_dim, other.slots):
            raise DimensionMismatch("tensor operators live in different algebras")

    def __add__(self, other: "TensorOperator") -> "TensorOperator":
        self._check_compatible(other)
        return TensorOperator(self.matrix + other.matrix, self.base_dim, self.slots)

    def __sub__(self, other: "TensorOperator") -> "TensorOperator":
        self._check_compatible(other)
        return TensorOperator(self.matrix - other.matrix, self.base_dim, self.slots)

    def __neg__(self) -> "TensorOperator":
        return TensorOperator(-self.matrix, self.base_dim, self.slots)

    def __mul__(self, scalar: complex) -> "TensorOperator":
        return TensorOperator(self.matrix * scalar, self.base_dim, self.slots)

    __rmul__ = __mul__

    def __matmul__(self, other: "TensorOperator") -> "TensorOperator":
        self._check_compatible(other)
        return TensorOperator(self.matrix @ other.matrix, self.base_dim, self.slots)

    def power(self, k: int) -> "TensorOperator":
        return TensorOperator(
            np.linalg.matrix_power(self.matrix, k), self.base_dim, self.slots
        )

    def norm(self) -> float:
        return opnorm(self.matrix)


def embed_slot(a, n: int, j: int) -> TensorOperator:
    """Lift ``a`` into slot ``j`` of the (n+1)-fold tensor algebra: 1 (x) .. a .. (x) 1."""
    a = as_matrix(a)
    if not 0 <= j <= n:
        raise SlotOutOfRange(f"slot {j} outside 0..{n}")
    d = a.shape[0]
    eye = np.eye(d, dtype=complex)
    return TensorOperator(
        multikron([a if k == j else eye for k in range(n + 1)]), d, n + 1
    )


def nabla(a, n: int, j: int) -> TensorOperator:
    """Difference of adjacent slot lifts, ``a`` in slot j-1 minus ``a`` in slot j.

    Pairing a power of this operator with a matrix implements the iterated
    commutator action of ``a`` (see :func:`pair`).
    """
    if not 1 <= j <= n:
        raise SlotOutOfRange(f"slot {j} outside 1..{n}")
    return embed_slot(a, n, j - 1) - embed_slot(a, n, j)


def _mu_contract(big: np.ndarray, d: int, slots: int) -> np.ndarray:
    # multiplication map on the Kronecker realization: contract row index of
    # slot k+1 against column index of slot k, leaving slot-0 row / slot-n column
    t = big.reshape((d,) * (2 * slots))
    letters = string.ascii_lowercase
    rows = letters[:slots]
    out = letters[slots]
    cols = rows[1:] + out
    return np.einsum(f"{rows}{cols}->{rows[0]}{out}", t)


def pair(t: TensorOperator, bs: Sequence[np.ndarray]) -> np.ndarray:
    """Pair an (n+1)-slot tensor operator with n matrices.

    Multiplies ``t`` by ``b1 (x) ... (x) bn (x) 1`` and applies the slotwise
    multiplication map; on elementary tensors this produces the interleaved
    product ``a0 b1 a1 ... bn an``.  Bilinear in ``t`` and in each ``b``.
    """
    d, slots = t.base_dim, t.slots
    if len(bs) != slots - 1:
        raise DimensionMismatch(f"{slots}-slot operator pairs with {slots - 1} matrices")
    mats = [as_matrix(b, dim=d) for b in bs]
    if not mats:
        return t.matrix.copy()
    big = t.matrix @ multikron(mats + [np.eye(d, dtype=complex)])
    return _mu_contract(big, d, slots)


def matrix_exp(m) -> np.ndarray:
    """Matrix exponential (scaling-and-squaring with a Pade approximant)."""
    return scipy.linalg.expm(as_matrix(m))


def commutator(x, y) -> np.ndarray:
    return x @ y - y @ x


def matrix_to_json(m) -> dict:
    """Encode a matrix as {"dim": d, "re": [...], "im": [...]} (row-major)."""
    a = as_matrix(m)
    return {
        "dim": a.shape[0],
        "re": a.real.ravel().tolist(),
        "im": a.imag.ravel().tolist(),
    }


def matrix_from_json(obj: dict) -> np.ndarray:
    """Decode the row-major {"dim", "re", "im"} matrix format."""
    d = int(obj["dim"])
    re = np.asarray(obj["re"], dtype=float)
    im = np.asarray(obj.get("im", np.zeros(d * d)), dtype=float)
    if re.size != d * d or im.size != d * d:
        raise DimensionMismatch(f"need {d * d} entries for dim {d}")
    return (re + 1j * im).reshape(d, d)
