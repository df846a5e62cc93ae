"""The anticommuting component algebra of the shared vector.

Elements are stored as four complex coefficients over the basis
``{1, l1, l2, l3}`` with ``lk * lk = 1`` and ``li * lj = i * eps_ijk * lk``
for ``i != j`` (right-handed, ``eps_123 = +1``). The coefficient form is the
source of truth; ``to_matrix`` maps onto the 2x2 Pauli representation and is
only used as an independent check.
"""

import math
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from bellsim.geometry import UnitVector3, Vector, cross, cross_rows, dot, dot_rows, relative_angle

MatrixRep = np.ndarray
"""A 2x2 complex matrix."""

BASIS_LABELS: Tuple[str, str, str, str] = ("1", "l1", "l2", "l3")


def _levi_civita(i: int, j: int, k: int) -> int:
    return int((i - j) * (j - k) * (k - i) / 2)


def _structure_constants() -> np.ndarray:
    table = np.zeros((4, 4, 4), dtype=complex)
    table[0, :, :] = np.eye(4)
    table[:, 0, :] = np.eye(4)
    for i in range(1, 4):
        table[i, i, 0] = 1.0
        for j in range(1, 4):
            for k in range(1, 4):
                if i != j:
                    table[i, j, k] = 1j * _levi_civita(i, j, k)
    return table


# STRUCTURE_CONSTANTS[i, j, k] is the coefficient of basis k in e_i * e_j
STRUCTURE_CONSTANTS: np.ndarray = _structure_constants()

_IDENTITY = np.eye(2, dtype=complex)
_SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
_SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI_BASIS: Tuple[np.ndarray, ...] = (_IDENTITY, _SIGMA_X, _SIGMA_Y, _SIGMA_Z)


@dataclass(frozen=True)
class AlgebraElement:
    """Element ``c0 + c1 l1 + c2 l2 + c3 l3`` of the component algebra."""

    c0: complex = 0j
    c1: complex = 0j
    c2: complex = 0j
    c3: complex = 0j

    @classmethod
    def from_coefficients(cls, coefficients: Union[np.ndarray, Tuple[complex, ...]]) -> "AlgebraElement":
        c0, c1, c2, c3 = (complex(c) for c in coefficients)
        return cls(c0, c1, c2, c3)

    @classmethod
    def scalar(cls, value: complex) -> "AlgebraElement":
        return cls(complex(value))

    @classmethod
    def basis(cls, index: int) -> "AlgebraElement":
        """Basis element ``1`` (index 0) or ``l1``, ``l2``, ``l3``."""
        coefficients = [0j, 0j, 0j, 0j]
        coefficients[index] = 1 + 0j
        return cls.from_coefficients(coefficients)

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([self.c0, self.c1, self.c2, self.c3], dtype=complex)

    @property
    def scalar_part(self) -> complex:
        return self.c0

    @property
    def vector_part(self) -> np.ndarray:
        return np.array([self.c1, self.c2, self.c3], dtype=complex)

    def conjugate(self) -> "AlgebraElement":
        """Complex-conjugate every coefficient (the Hermitian adjoint)."""
        return AlgebraElement.from_coefficients(np.conj(self.coefficients))

    def is_close(self, other: "AlgebraElement", tolerance: float = 1e-12) -> bool:
        return bool(np.all(np.abs(self.coefficients - other.coefficients) <= tolerance))

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        return AlgebraElement.from_coefficients(self.coefficients + other.coefficients)

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        return AlgebraElement.from_coefficients(self.coefficients - other.coefficients)

    def __neg__(self) -> "AlgebraElement":
        return AlgebraElement.from_coefficients(-self.coefficients)

    def __mul__(self, other: Union["AlgebraElement", complex, float]) -> "AlgebraElement":
        if isinstance(other, AlgebraElement):
            return algebra_mul(self, other)
        return AlgebraElement.from_coefficients(self.coefficients * complex(other))

    def __rmul__(self, other: Union[complex, float]) -> "AlgebraElement":
        return AlgebraElement.from_coefficients(self.coefficients * complex(other))

    def __repr__(self) -> str:
        terms = ", ".join(f"{label}: {c!r}" for label, c in zip(BASIS_LABELS, self.coefficients))
        return f"AlgebraElement({terms})"


ONE = AlgebraElement.basis(0)
L1 = AlgebraElement.basis(1)
L2 = AlgebraElement.basis(2)
L3 = AlgebraElement.basis(3)


def embed_vector(v: Vector) -> AlgebraElement:
    """The element ``v1 l1 + v2 l2 + v3 l3`` (no scalar part)."""
    x, y, z = (float(c) for c in v)
    return AlgebraElement(0j, complex(x), complex(y), complex(z))


def algebra_mul(x: AlgebraElement, y: AlgebraElement) -> AlgebraElement:
    """Bilinear product through the structure constants."""
    product = np.einsum("i,j,ijk->k", x.coefficients, y.coefficients, STRUCTURE_CONSTANTS)
    return AlgebraElement.from_coefficients(product)


def algebra_mul_rows(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Row-wise product of two ``(m, 4)`` coefficient arrays."""
    return np.einsum("ni,nj,ijk->nk", x, y, STRUCTURE_CONSTANTS)


def product_identity(a: UnitVector3, b: UnitVector3) -> AlgebraElement:
    """``(a . b) + i (a x b) . l``, the product of two embedded unit vectors."""
    c = cross(a, b)
    return AlgebraElement(complex(dot(a, b)), 1j * c[0], 1j * c[1], 1j * c[2])


def vector_product(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Batched ``product_identity`` for rows of ``u`` and ``v``.

    Rows need not be unit vectors for the cross term, but the scalar term is
    the clamped dot product, so inputs are expected to be (signed) unit rows.

    Returns:
        A ``(m, 4)`` complex coefficient array.
    """
    out = np.empty((len(u), 4), dtype=complex)
    out[:, 0] = dot_rows(u, v)
    out[:, 1:] = 1j * cross_rows(u, v)
    return out


def phase_operator(a: UnitVector3, b: UnitVector3) -> AlgebraElement:
    """``exp(i theta n.l) = cos(theta) + i sin(theta) n.l`` with ``n sin(theta) = a x b``.

    For parallel or antiparallel settings ``sin(theta) = 0`` and the axis term
    is dropped.
    """
    theta = relative_angle(a, b)
    c = cross(a, b)
    sin_theta = math.sin(theta)
    norm = float(np.linalg.norm(c))
    if sin_theta == 0.0 or norm == 0.0:
        axis_term = np.zeros(3, dtype=complex)
    else:
        axis_term = 1j * sin_theta * (c / norm)
    return AlgebraElement(complex(math.cos(theta)), axis_term[0], axis_term[1], axis_term[2])


def evaluate_at(x: AlgebraElement, lam: Vector) -> complex:
    """Substitute a real direction for the basis vectors: ``c0 + sum ck lam_k``."""
    components = np.asarray(tuple(float(c) for c in lam), dtype=float)
    return complex(x.c0 + np.dot(x.vector_part, components))


def evaluate_rows(coefficients: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """Row-wise ``evaluate_at`` for a ``(m, 4)`` array and ``(m, 3)`` directions."""
    residual = (
        coefficients[:, 1] * lam[:, 0] + coefficients[:, 2] * lam[:, 1] + coefficients[:, 3] * lam[:, 2]
    )
    return coefficients[:, 0] + residual


def to_matrix(x: AlgebraElement) -> MatrixRep:
    """Map ``1 -> I`` and ``lk -> sigma_k``, linearly in the coefficients."""
    return sum(c * sigma for c, sigma in zip(x.coefficients, PAULI_BASIS))


def from_matrix(m: MatrixRep) -> AlgebraElement:
    """Inverse of ``to_matrix`` through ``ck = tr(sigma_k m) / 2``."""
    m = np.asarray(m, dtype=complex)
    return AlgebraElement.from_coefficients([np.trace(sigma @ m) / 2 for sigma in PAULI_BASIS])
