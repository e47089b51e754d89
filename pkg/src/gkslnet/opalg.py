"""Finite-dimensional operator algebra for networks of sites.

Sites are either two-level systems or Fock-truncated harmonic oscillators.
Network states use the ``|s0 s1 ...>`` ordering: site 0 is the
slowest-varying tensor index, so for two qubits the basis is
``|00>, |01>, |10>, |11>``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

TWO_LEVEL = 1
OSCILLATOR = -1

HERMITIAN_TOL = 1e-12


class SpaceMismatchError(ValueError):
    """Operands live on different Hilbert spaces."""


@dataclass(frozen=True)
class HilbertSpace:
    site_dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.site_dims)
        if not dims:
            raise ValueError("a Hilbert space needs at least one site")
        if any(d < 2 for d in dims):
            raise ValueError(f"every site dimension must be >= 2, got {dims}")
        object.__setattr__(self, "site_dims", dims)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.site_dims))

    @property
    def n_sites(self) -> int:
        return len(self.site_dims)


class Operator:
    """Dense complex matrix tagged with the space it acts on.

    Instances are immutable: the wrapped array is a read-only copy.
    """

    __slots__ = ("space", "matrix")
    __array_priority__ = 100

    def __init__(self, space: HilbertSpace, matrix):
        m = np.array(matrix, dtype=complex)
        d = space.total_dim
        if m.shape != (d, d):
            raise SpaceMismatchError(
                f"matrix shape {m.shape} does not match space dimension {d}")
        m.setflags(write=False)
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "matrix", m)

    def __setattr__(self, name, value):
        raise AttributeError("Operator is immutable")

    @classmethod
    def hermitian(cls, space: HilbertSpace, matrix, tol: float = HERMITIAN_TOL):
        op = cls(space, matrix)
        dev = op.hermiticity_error()
        if dev > tol:
            raise ValueError(f"matrix is not Hermitian: max|M - M^dag| = {dev:.3e}")
        return op

    @classmethod
    def identity(cls, space: HilbertSpace) -> "Operator":
        return cls(space, np.eye(space.total_dim))

    @classmethod
    def zero(cls, space: HilbertSpace) -> "Operator":
        return cls(space, np.zeros((space.total_dim, space.total_dim)))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def dag(self) -> "Operator":
        return Operator(self.space, self.matrix.conj().T)

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T), initial=0.0))

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        return self.hermiticity_error() <= tol

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def _check(self, other: "Operator"):
        if self.space != other.space:
            raise SpaceMismatchError(f"{self.space} vs {other.space}")

    def __matmul__(self, other):
        if isinstance(other, Operator):
            self._check(other)
            return Operator(self.space, self.matrix @ other.matrix)
        return self.matrix @ other

    def __add__(self, other):
        if not isinstance(other, Operator):
            return NotImplemented
        self._check(other)
        return Operator(self.space, self.matrix + other.matrix)

    def __sub__(self, other):
        if not isinstance(other, Operator):
            return NotImplemented
        self._check(other)
        return Operator(self.space, self.matrix - other.matrix)

    def __neg__(self):
        return Operator(self.space, -self.matrix)

    def __mul__(self, scalar):
        if isinstance(scalar, Operator) or not np.isscalar(scalar):
            return NotImplemented
        return Operator(self.space, self.matrix * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return Operator(self.space, self.matrix / scalar)

    def allclose(self, other: "Operator", atol: float = 1e-12) -> bool:
        return self.space == other.space and np.allclose(
            self.matrix, other.matrix, rtol=0.0, atol=atol)

    def __repr__(self):
        return f"Operator(site_dims={self.space.site_dims})"


@dataclass(frozen=True)
class SitePrimitive:
    """A single site: ``statistics`` is +1 (two-level) or -1 (oscillator).

    Oscillators are truncated to ``dim`` Fock states; the truncated ladder
    violates the canonical commutator in the last diagonal entry.
    """

    statistics: int = TWO_LEVEL
    dim: int = 2

    def __post_init__(self):
        if self.statistics not in (TWO_LEVEL, OSCILLATOR):
            raise ValueError(f"statistics must be +1 or -1, got {self.statistics}")
        if self.statistics == TWO_LEVEL and self.dim != 2:
            raise ValueError("a two-level site must have dim == 2")
        if self.dim < 2:
            raise ValueError("oscillator truncation needs dim >= 2")

    @property
    def space(self) -> HilbertSpace:
        return HilbertSpace((self.dim,))


def ladder(prim: SitePrimitive) -> tuple[Operator, Operator]:
    """Annihilation and creation operators of a single site."""
    n = np.arange(1, prim.dim)
    a = np.diag(np.sqrt(n), k=1)
    ann = Operator(prim.space, a)
    return ann, ann.dag()


def embed(op: Operator, site_index: int, network: HilbertSpace) -> Operator:
    """Lift a single-site operator to the network (identity elsewhere)."""
    if not 0 <= site_index < network.n_sites:
        raise IndexError(f"site {site_index} out of range for {network.n_sites} sites")
    if op.dim != network.site_dims[site_index]:
        raise SpaceMismatchError(
            f"operator dim {op.dim} != site dim {network.site_dims[site_index]}")
    factors = [np.eye(d) for d in network.site_dims]
    factors[site_index] = op.matrix
    return Operator(network, reduce(np.kron, factors))


def tensor(*ops: Operator) -> Operator:
    space = HilbertSpace(tuple(d for op in ops for d in op.space.site_dims))
    return Operator(space, reduce(np.kron, [op.matrix for op in ops]))


def basis_state(network: HilbertSpace, occupations: Sequence[int]) -> np.ndarray:
    """Column vector ``|n0 n1 ...>`` in the network's product basis."""
    if len(occupations) != network.n_sites:
        raise ValueError("one occupation per site required")
    idx = int(np.ravel_multi_index(tuple(occupations), network.site_dims))
    v = np.zeros(network.total_dim, dtype=complex)
    v[idx] = 1.0
    return v


def projector(vec) -> np.ndarray:
    v = np.asarray(vec, dtype=complex)
    return np.outer(v, v.conj())


def dagger(A: Operator) -> Operator:
    return A.dag()


def commutator(A: Operator, B: Operator) -> Operator:
    return A @ B - B @ A


def anticommutator(A: Operator, B: Operator) -> Operator:
    return A @ B + B @ A


def expectation(rho: Operator, T: Operator, trace_tol: float = 1e-10) -> complex:
    """``Tr[rho T]`` for a normalized state ``rho``."""
    if rho.space != T.space:
        raise SpaceMismatchError(f"{rho.space} vs {T.space}")
    tr = rho.trace()
    if abs(tr - 1.0) > trace_tol:
        raise ValueError(f"state is not normalized: Tr(rho) = {tr}")
    # Tr[rho T] = sum_ij rho_ij T_ji
    return complex(np.sum(rho.matrix * T.matrix.T))
