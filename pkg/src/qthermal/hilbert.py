"""Operator algebra on tensor products of qubits.

Basis convention: ``|0>`` is the sigma_z = +1 (excited, energy +omega/2)
state and ``|1>`` the ground state, so ``sigma_minus`` maps ``|0> -> |1>``.
Qubit 1 is the leftmost (most significant) tensor factor.
"""
from __future__ import annotations

from functools import reduce
from numbers import Number

import numpy as np
import scipy.sparse as sp

# Operators of dimension <= DENSE_LIMIT are stored as ndarrays, larger ones as CSR.
DENSE_LIMIT = 64

_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
    "plus": np.array([[0, 1], [0, 0]], dtype=complex),
    "minus": np.array([[0, 0], [1, 0]], dtype=complex),
    "i": np.eye(2, dtype=complex),
}


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


class Operator:
    """Square complex matrix on a ``2**n`` dimensional space.

    Storage is dense or CSR; arithmetic between the two kinds is allowed and the
    result is stored according to ``DENSE_LIMIT`` unless ``sparse`` is forced.
    """

    __slots__ = ("_m", "dim")
    __array_priority__ = 100

    def __init__(self, matrix, sparse: bool | None = None):
        shape = matrix.shape
        if len(shape) != 2 or shape[0] != shape[1]:
            raise ValueError(f"operator must be square, got shape {shape}")
        if not _is_power_of_two(shape[0]):
            raise ValueError(f"operator dimension {shape[0]} is not a power of two")
        self.dim = int(shape[0])
        if sparse is None:
            sparse = self.dim > DENSE_LIMIT
        if sparse:
            self._m = sp.csr_matrix(matrix, dtype=complex)
        elif sp.issparse(matrix):
            self._m = matrix.toarray().astype(complex)
        else:
            self._m = np.array(matrix, dtype=complex)

    @property
    def matrix(self):
        return self._m

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self._m)

    @property
    def n_qubits(self) -> int:
        return self.dim.bit_length() - 1

    def to_dense(self) -> np.ndarray:
        return self._m.toarray() if self.is_sparse else self._m.copy()

    def to_sparse(self) -> sp.csr_matrix:
        return self._m.copy() if self.is_sparse else sp.csr_matrix(self._m)

    def as_dense(self) -> "Operator":
        return Operator(self._m, sparse=False)

    def as_sparse(self) -> "Operator":
        return Operator(self._m, sparse=True)

    def dag(self) -> "Operator":
        return Operator(self._m.conj().T, sparse=self.is_sparse)

    def trace(self) -> complex:
        return complex(self._m.diagonal().sum())

    def _check(self, other: "Operator"):
        if not isinstance(other, Operator):
            return NotImplemented
        if other.dim != self.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")
        return other

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return Operator(_combine(self._m + other._m))

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return Operator(_combine(self._m - other._m))

    def __neg__(self):
        return Operator(-self._m, sparse=self.is_sparse)

    def __mul__(self, scalar):
        if not isinstance(scalar, Number):
            return NotImplemented
        return Operator(self._m * scalar, sparse=self.is_sparse)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        if not isinstance(scalar, Number):
            return NotImplemented
        return Operator(self._m / scalar, sparse=self.is_sparse)

    def __matmul__(self, other):
        if isinstance(other, Operator):
            self._check(other)
            return Operator(_combine(self._m @ other._m))
        # plain vectors/matrices pass straight through
        out = self._m @ other
        return np.asarray(out)

    def allclose(self, other: "Operator", atol: float = 1e-12) -> bool:
        self._check(other)
        diff = self._m - other._m
        if sp.issparse(diff):
            return diff.count_nonzero() == 0 or abs(diff).max() <= atol
        return bool(np.max(np.abs(diff)) <= atol)

    def __repr__(self):
        kind = "sparse" if self.is_sparse else "dense"
        return f"Operator(dim={self.dim}, {kind})"


def _combine(m):
    # sparse @ dense and dense + sparse come back as np.matrix / ndarray
    if isinstance(m, np.matrix):
        m = np.asarray(m)
    return m


class DensityMatrix(Operator):
    """Hermitian, unit-trace, positive semidefinite operator (stored dense)."""

    HERMITIAN_TOL = 1e-10
    TRACE_TOL = 1e-10
    POSITIVITY_TOL = 1e-9

    __slots__ = ()

    def __init__(self, matrix, check: bool = True):
        if isinstance(matrix, Operator):
            matrix = matrix.matrix
        super().__init__(matrix, sparse=False)
        if check:
            self.validate()

    def validate(self) -> None:
        m = self._m
        herm = np.max(np.abs(m - m.conj().T))
        if herm > self.HERMITIAN_TOL:
            raise ValueError(f"density matrix not Hermitian (max|rho - rho^dag| = {herm:.3e})")
        tr = np.trace(m)
        if abs(tr - 1) > self.TRACE_TOL:
            raise ValueError(f"density matrix trace {tr.real:.15g} != 1")
        lam = self.min_eigenvalue()
        if lam < -self.POSITIVITY_TOL:
            raise ValueError(f"density matrix has negative eigenvalue {lam:.3e}")

    def min_eigenvalue(self) -> float:
        herm = 0.5 * (self._m + self._m.conj().T)
        return float(np.linalg.eigvalsh(herm)[0])

    def populations(self) -> np.ndarray:
        return self._m.diagonal().real.copy()

    def vec(self) -> np.ndarray:
        """Column-stacked vectorization."""
        return self._m.reshape(-1, order="F")

    @classmethod
    def from_vec(cls, v, check: bool = True) -> "DensityMatrix":
        d = int(round(np.sqrt(v.size)))
        return cls(np.asarray(v).reshape(d, d, order="F"), check=check)

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityMatrix":
        return cls(np.eye(dim, dtype=complex) / dim)

    @classmethod
    def pure(cls, ket) -> "DensityMatrix":
        ket = np.asarray(ket, dtype=complex).ravel()
        ket = ket / np.linalg.norm(ket)
        return cls(np.outer(ket, ket.conj()))

    @classmethod
    def basis_state(cls, index: int, dim: int) -> "DensityMatrix":
        m = np.zeros((dim, dim), dtype=complex)
        m[index, index] = 1.0
        return cls(m)

    def __repr__(self):
        return f"DensityMatrix(dim={self.dim})"


def pauli(kind: str) -> Operator:
    """Single-qubit operator: ``x``, ``y``, ``z``, ``plus``, ``minus`` (or ``i``)."""
    try:
        return Operator(_PAULI[kind])
    except KeyError:
        raise ValueError(f"unknown Pauli kind {kind!r}") from None


def embed(op: Operator, site: int, n: int, sparse: bool | None = None) -> Operator:
    """Place a single-qubit operator on ``site`` (1-based) of an ``n``-qubit register."""
    if op.dim != 2:
        raise ValueError("embed expects a single-qubit operator")
    if not (1 <= site <= n):
        raise IndexError(f"site {site} out of range 1..{n}")
    left = sp.identity(2 ** (site - 1), dtype=complex, format="csr")
    right = sp.identity(2 ** (n - site), dtype=complex, format="csr")
    m = sp.kron(sp.kron(left, sp.csr_matrix(op.matrix)), right, format="csr")
    return Operator(m, sparse=sparse)


def tensor(*ops: Operator) -> Operator:
    m = reduce(lambda a, b: sp.kron(a, b, format="csr"), (sp.csr_matrix(o.matrix) for o in ops))
    return Operator(m)


def identity(dim: int, sparse: bool | None = None) -> Operator:
    return Operator(sp.identity(dim, dtype=complex, format="csr"), sparse=sparse)


def commutator(a: Operator, b: Operator) -> Operator:
    return a @ b - b @ a


def expect(op: Operator, rho: Operator) -> complex:
    """``Tr(op rho)`` without forming the product."""
    a = op.matrix
    r = rho.matrix
    if sp.issparse(a):
        return complex(a.multiply(r.T if not sp.issparse(r) else r.T).sum())
    if sp.issparse(r):
        return complex(r.multiply(a.T).sum())
    return complex(np.einsum("ij,ji->", a, r))


def partial_trace(rho: Operator, keep: int) -> DensityMatrix:
    """Reduced state of qubit ``keep`` (1-based)."""
    n = rho.n_qubits
    if not (1 <= keep <= n):
        raise IndexError(f"qubit {keep} out of range 1..{n}")
    m = rho.to_dense().reshape(2 ** (keep - 1), 2, 2 ** (n - keep), 2 ** (keep - 1), 2, 2 ** (n - keep))
    red = np.einsum("aibajb->ij", m)
    return DensityMatrix(red, check=isinstance(rho, DensityMatrix))


def excited_population(rho: Operator, site: int) -> float:
    """Population of ``|0>`` (sigma_z = +1) on ``site``, read off the diagonal."""
    n = rho.n_qubits
    if not (1 <= site <= n):
        raise IndexError(f"qubit {site} out of range 1..{n}")
    diag = rho.matrix.diagonal().real
    bit = n - site
    idx = np.arange(rho.dim)
    return float(diag[((idx >> bit) & 1) == 0].sum())
