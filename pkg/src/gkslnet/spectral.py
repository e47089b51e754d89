"""Exact diagonalization, Bohr frequencies and Rayleigh-Schroedinger series.

Energies closer than ``cluster_tol`` are merged into one degenerate cluster
(single linkage on the sorted spectrum, cluster energy = member mean).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .opalg import Operator, HilbertSpace, SpaceMismatchError


class DegeneracyError(ValueError):
    """The perturbation couples states inside a degenerate cluster."""


class OrthonormalizationError(ValueError):
    """Approximate eigenvectors are too close to linearly dependent."""


def cluster_values(values, tol: float) -> tuple[list[np.ndarray], np.ndarray]:
    """Group real values by single linkage.

    Returns the member indices of each group (groups in increasing order)
    and the group means.
    """
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return [], np.array([])
    order = np.argsort(values, kind="stable")
    groups = [[order[0]]]
    for prev, cur in zip(order[:-1], order[1:]):
        if values[cur] - values[prev] > tol:
            groups.append([cur])
        else:
            groups[-1].append(cur)
    idx = [np.array(g, dtype=int) for g in groups]
    means = np.array([values[g].mean() for g in idx])
    return idx, means


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Eigenbasis of a Hermitian operator with degenerate clusters.

    ``vectors[:, n]`` is the n-th orthonormal eigenvector with energy
    ``levels[n]``; ``labels[n]`` is the cluster it belongs to.
    """

    space: HilbertSpace
    levels: np.ndarray
    vectors: np.ndarray
    labels: np.ndarray
    energies: np.ndarray
    cluster_tol: float

    @classmethod
    def from_eigensystem(cls, space, levels, vectors, cluster_tol):
        levels = np.asarray(levels, dtype=float)
        vectors = np.asarray(vectors, dtype=complex)
        order = np.argsort(levels, kind="stable")
        levels, vectors = levels[order], vectors[:, order]
        groups, means = cluster_values(levels, cluster_tol)
        labels = np.empty(levels.size, dtype=int)
        for c, g in enumerate(groups):
            labels[g] = c
        for arr in (levels, vectors, labels, means):
            arr.setflags(write=False)
        return cls(space, levels, vectors, labels, means, float(cluster_tol))

    @property
    def n_clusters(self) -> int:
        return len(self.energies)

    @property
    def multiplicities(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_clusters)

    def projector_matrix(self, cluster: int) -> np.ndarray:
        U = self.vectors[:, self.labels == cluster]
        return U @ U.conj().T

    def projector(self, cluster: int) -> Operator:
        return Operator(self.space, self.projector_matrix(cluster))

    @property
    def clusters(self) -> list[tuple[float, int, Operator]]:
        mult = self.multiplicities
        return [(float(E), int(mult[c]), self.projector(c))
                for c, E in enumerate(self.energies)]

    def reconstruct(self) -> Operator:
        """``sum_E E P(E)``."""
        d = self.space.total_dim
        H = np.zeros((d, d), dtype=complex)
        for c, E in enumerate(self.energies):
            H += E * self.projector_matrix(c)
        return Operator(self.space, H)

    @property
    def spectral_range(self) -> float:
        return float(self.energies[-1] - self.energies[0]) if self.n_clusters else 0.0


def _default_tol(scale: float) -> float:
    return 1e-9 * scale if scale > 0 else 1e-12


def diagonalize(H: Operator, cluster_tol: Optional[float] = None) -> SpectralDecomposition:
    """Eigen-decompose a Hermitian operator.

    Already-diagonal input keeps the product basis (stable ordering), so
    free-site Hamiltonians give the labelled states ``|s0 s1 ...>`` exactly.
    """
    M = H.matrix
    dev = H.hermiticity_error()
    if dev > 1e-10:
        raise ValueError(f"diagonalize needs a Hermitian operator (deviation {dev:.2e})")
    offdiag = M - np.diag(np.diag(M))
    if not np.any(offdiag):
        levels = np.diag(M).real.copy()
        vectors = np.eye(M.shape[0], dtype=complex)
    else:
        levels, vectors = np.linalg.eigh(0.5 * (M + M.conj().T))
    if cluster_tol is None:
        cluster_tol = _default_tol(float(np.max(np.abs(levels))))
    return SpectralDecomposition.from_eigensystem(H.space, levels, vectors, cluster_tol)


@dataclass(frozen=True)
class BohrFrequencySet:
    """Merged Bohr frequencies with the cluster pairs carrying each.

    A pair ``(i, j)`` stands for ``P_i T P_j`` and has frequency
    ``E_j - E_i``.
    """

    frequencies: tuple[float, ...]
    pairs: tuple[tuple[tuple[int, int], ...], ...]
    freq_tol: float

    def __iter__(self):
        return iter(zip(self.frequencies, self.pairs))

    def __len__(self):
        return len(self.frequencies)


def bohr_frequencies(dec: SpectralDecomposition, freq_tol: float) -> BohrFrequencySet:
    E = dec.energies
    n = len(E)
    pair_list = [(i, j) for i in range(n) for j in range(n)]
    omegas = np.array([E[j] - E[i] for i, j in pair_list])
    groups, means = cluster_values(omegas, freq_tol)
    pairs = tuple(tuple(pair_list[k] for k in g) for g in groups)
    return BohrFrequencySet(tuple(float(w) for w in means), pairs, float(freq_tol))


@dataclass(frozen=True, eq=False)
class PerturbationSeries:
    """Rayleigh-Schroedinger corrections for ``H0 + nu V``.

    ``energy_terms[k, n]`` and ``vector_terms[k, :, n]`` are the k-th order
    coefficients (multiply by ``nu**k``), in intermediate normalization up
    to the explicit ``-1/2 |e1|^2`` self-component at second order.
    """

    base: SpectralDecomposition
    perturbation: Operator
    nu: float
    order: int
    energy_terms: np.ndarray
    vector_terms: np.ndarray

    @property
    def n_levels(self) -> int:
        return self.energy_terms.shape[1]

    def energies(self, order: Optional[int] = None) -> np.ndarray:
        k = self.order if order is None else self._check_order(order)
        powers = self.nu ** np.arange(k + 1)
        return powers @ self.energy_terms[: k + 1]

    def vectors(self, order: Optional[int] = None) -> np.ndarray:
        k = self.order if order is None else self._check_order(order)
        powers = self.nu ** np.arange(k + 1)
        return np.tensordot(powers, self.vector_terms[: k + 1], axes=1)

    def scaled_vector_terms(self, order: Optional[int] = None) -> np.ndarray:
        """``nu**k * e^(k)`` stacked over k, shape (order+1, d, n_levels)."""
        k = self.order if order is None else self._check_order(order)
        powers = self.nu ** np.arange(k + 1)
        return self.vector_terms[: k + 1] * powers[:, None, None]

    @property
    def expansion_parameter(self) -> float:
        """Largest ``nu |V_mn| / |E_n - E_m|`` over coupled levels of distinct clusters."""
        W = _matrix_in_basis(self.perturbation, self.base)
        E0 = self.base.energies[self.base.labels]
        lab = self.base.labels
        diff = E0[None, :] - E0[:, None]
        mask = lab[None, :] != lab[:, None]
        if not np.any(mask):
            return 0.0
        ratio = np.abs(W[mask]) / np.abs(diff[mask])
        return float(abs(self.nu) * ratio.max())

    def _check_order(self, order: int) -> int:
        if not 0 <= order <= self.order:
            raise ValueError(f"order {order} not available (series has order {self.order})")
        return order


def _matrix_in_basis(V: Operator, dec: SpectralDecomposition) -> np.ndarray:
    U = dec.vectors
    return U.conj().T @ V.matrix @ U


def rs_perturbation(dec0: SpectralDecomposition, V: Operator, order: int = 2,
                    nu: float = 1.0, degeneracy_tol: float = 1e-10) -> PerturbationSeries:
    """Rayleigh-Schroedinger series of ``H0 + nu V`` up to second order.

    Degenerate clusters of ``H0`` are accepted only when ``V`` has no
    matrix elements between distinct states of the same cluster.
    """
    if order not in (0, 1, 2):
        raise ValueError(f"order must be 0, 1 or 2, got {order}")
    if V.space != dec0.space:
        raise SpaceMismatchError(f"{V.space} vs {dec0.space}")
    if V.hermiticity_error() > 1e-10:
        raise ValueError("perturbation must be Hermitian")

    W = _matrix_in_basis(V, dec0)
    lab = dec0.labels
    same = lab[:, None] == lab[None, :]
    inner = np.where(same & ~np.eye(len(lab), dtype=bool), W, 0.0)
    if np.max(np.abs(inner), initial=0.0) > degeneracy_tol:
        m, n = np.unravel_index(np.argmax(np.abs(inner)), inner.shape)
        c = int(lab[m])
        raise DegeneracyError(
            f"perturbation couples degenerate states {m} and {n} in cluster {c} "
            f"(E = {dec0.energies[c]:.12g}, |V_mn| = {abs(inner[m, n]):.3e}); "
            "degenerate perturbation theory is not supported")

    E0 = dec0.energies[lab]
    N = len(E0)
    with np.errstate(divide="ignore"):
        R = np.where(same, 0.0, 1.0 / (E0[None, :] - E0[:, None]))  # R[m, n] = 1/(E_n - E_m)

    e_terms = np.zeros((order + 1, N))
    c_terms = np.zeros((order + 1, N, N), dtype=complex)
    e_terms[0] = E0
    c_terms[0] = np.eye(N)
    if order >= 1:
        e_terms[1] = np.diag(W).real
        c1 = W * R
        c_terms[1] = c1
    if order >= 2:
        e_terms[2] = np.sum(np.abs(W) ** 2 * R, axis=0)
        diagW = np.diag(W)
        c2 = (W @ c1) * R - c1 * R * diagW[None, :]
        c2[np.diag_indices(N)] = -0.5 * np.sum(np.abs(c1) ** 2, axis=0)
        c_terms[2] = c2

    vecs = np.einsum("ij,kjn->kin", dec0.vectors, c_terms)
    e_terms.setflags(write=False)
    vecs.setflags(write=False)
    return PerturbationSeries(dec0, V, float(nu), order, e_terms, vecs)


def default_cluster_tol(series: PerturbationSeries, order: int) -> float:
    """``s**(order+1)`` times the spectral range, ``s`` the expansion parameter."""
    span = series.base.spectral_range or 1.0
    floor = 1e-9 * span
    if order == 0:
        return series.base.cluster_tol
    return max(series.expansion_parameter ** (order + 1) * span, floor)


def approximate_spectrum(series: PerturbationSeries, order: int,
                         cluster_tol: Optional[float] = None) -> SpectralDecomposition:
    """Truncated spectrum with symmetrically re-orthonormalized vectors."""
    series._check_order(order)
    if order == 0:
        return series.base
    if cluster_tol is None:
        cluster_tol = default_cluster_tol(series, order)
    energies = series.energies(order)
    W = series.vectors(order)
    S = W.conj().T @ W
    s, Q = np.linalg.eigh(S)
    if s.min() < 1e-8:
        weak = Q[:, np.argmin(s)]
        culprits = np.nonzero(np.abs(weak) > 1e-3)[0].tolist()
        raise OrthonormalizationError(
            f"approximate eigenvectors nearly dependent (min overlap eigenvalue "
            f"{s.min():.2e}); offending levels {culprits}")
    inv_sqrt = (Q / np.sqrt(s)) @ Q.conj().T
    U = W @ inv_sqrt
    return SpectralDecomposition.from_eigensystem(series.base.space, energies, U, cluster_tol)
