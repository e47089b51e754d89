"""GKSL generators: global, local and perturbed-local.

Superoperators act on column-stacked density matrices,
``vec(X rho Y) = (Y^T kron X) vec(rho)``.

Three approaches share one construction:

* ``global`` -- jump operators from the exact eigenbasis of ``H_S``;
* ``local0`` -- jump operators from the uncoupled Hamiltonian ``H_0``;
* ``perturbedK`` -- jump operators from the Rayleigh-Schroedinger series
  of ``H_0 + nu V`` truncated at ``nu**K``.  The dissipator is expanded in
  powers of ``nu`` and truncated at the same order, so the generator is
  exactly the order-K master equation (rates use the order-K Bohr
  frequencies, unexpanded).

The commutator part always uses the full ``H_S = H_0 + nu V``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .opalg import Operator, HilbertSpace, SpaceMismatchError
from .spectral import (PerturbationSeries, SpectralDecomposition, cluster_values,
                       default_cluster_tol)


class GammaModelError(ValueError):
    """A bath spectral function is undefined or negative where needed."""


class RegimeWarning(RuntimeWarning):
    """Frequency splittings comparable to the merge tolerance."""


# -- bath spectral functions -------------------------------------------------

@dataclass(frozen=True)
class SpectralFunction:
    """Named bath rate function ``gamma(omega)`` for ``omega > 0``."""

    name: str
    params: dict = field(default_factory=dict)
    func: Callable[[float], float] = field(default=None, repr=False, compare=False)

    def __call__(self, omega: float) -> float:
        return float(self.func(omega))


def flat(g: float = 1.0) -> SpectralFunction:
    return SpectralFunction("flat", {"g": g}, lambda w: g)


def ohmic(g: float = 1.0) -> SpectralFunction:
    return SpectralFunction("ohmic", {"g": g}, lambda w: g * w)


def piecewise(breaks: Sequence[float], values: Sequence[float]) -> SpectralFunction:
    """Step function: ``values[i]`` on ``[breaks[i-1], breaks[i])``.

    ``len(values) == len(breaks) + 1``.  Lets a bath have independent rates
    at well separated transition frequencies.
    """
    breaks = [float(b) for b in breaks]
    values = [float(v) for v in values]
    if len(values) != len(breaks) + 1 or sorted(breaks) != breaks:
        raise ValueError("piecewise needs sorted breaks and len(values) == len(breaks) + 1")
    return SpectralFunction("piecewise", {"breaks": breaks, "values": values},
                            lambda w: values[int(np.searchsorted(breaks, w, side="right"))])


GAMMA_MODELS = {"flat": flat, "ohmic": ohmic, "piecewise": piecewise}


def make_gamma(name: str, **params) -> SpectralFunction:
    try:
        factory = GAMMA_MODELS[name]
    except KeyError:
        raise ValueError(f"unknown gamma model {name!r}; known: {sorted(GAMMA_MODELS)}") from None
    return factory(**params)


@dataclass(frozen=True, eq=False)
class BathSpec:
    """A thermal reservoir coupled through one Hermitian system operator.

    Downward rates are ``gamma(omega)``; upward rates are fixed by the KMS
    condition, ``gamma(-omega) = exp(-beta omega) gamma(omega)``.
    ``shift`` (the Lamb-shift function ``S``) is evaluated at all signs.
    """

    label: str
    beta: float
    coupling: Operator
    gamma: Callable[[float], float]
    lam: float = 1.0
    shift: Optional[Callable[[float], float]] = None

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError(f"bath {self.label!r}: beta must be > 0")
        if self.lam < 0:
            raise ValueError(f"bath {self.label!r}: lambda must be >= 0")
        if self.coupling.hermiticity_error() > 1e-10:
            raise ValueError(f"bath {self.label!r}: coupling operator must be Hermitian")

    def rate(self, omega: float) -> float:
        if omega <= 0:
            raise ValueError("rate() takes a positive frequency; use rates()")
        g = self.gamma(omega)
        if not np.isfinite(g) or g < 0:
            raise GammaModelError(
                f"bath {self.label!r}: gamma({omega:.6g}) = {g!r} is not a finite rate >= 0")
        return g

    def rates(self, omega: float) -> tuple[float, float]:
        """(downward, upward) rates at Bohr frequency ``omega > 0``."""
        g = self.rate(omega)
        return g, float(np.exp(-self.beta * omega) * g)


# -- superoperator helpers ---------------------------------------------------

def vec(M) -> np.ndarray:
    return np.asarray(M).reshape(-1, order="F")


def unvec(v, d: int) -> np.ndarray:
    return np.asarray(v).reshape(d, d, order="F")


def _kron(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    # np.kron for square 2-d arrays without its generic-shape overhead
    m, n = A.shape[0], B.shape[0]
    return (A[:, None, :, None] * B[None, :, None, :]).reshape(m * n, m * n)


def commutator_superop(H: np.ndarray) -> np.ndarray:
    """Matrix of ``rho -> -i[H, rho]``."""
    I = np.eye(H.shape[0])
    return -1j * (np.kron(I, H) - np.kron(H.T, I))


def _bilinear(F: np.ndarray, G: np.ndarray) -> np.ndarray:
    """Matrix of ``rho -> F rho G^dag - 1/2 {G^dag F, rho}``."""
    I = np.eye(F.shape[0])
    GF = G.conj().T @ F
    return _kron(G.conj(), F) - 0.5 * _kron(I, GF) - 0.5 * _kron(GF.T, I)


def lindblad_superop(F: np.ndarray) -> np.ndarray:
    return _bilinear(F, F)


def _series_dissipator(terms: np.ndarray) -> np.ndarray:
    """Order-by-order dissipator of a jump operator given as a nu-series."""
    K = terms.shape[0] - 1
    d = terms.shape[1]
    out = np.zeros((K + 1, d * d, d * d), dtype=complex)
    for p in range(K + 1):
        for q in range(K + 1 - p):
            if np.any(terms[p]) and np.any(terms[q]):
                out[p + q] += _bilinear(terms[p], terms[q])
    return out


def _series_product(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    K = P.shape[0] - 1
    out = np.zeros_like(P)
    for p in range(K + 1):
        for q in range(K + 1 - p):
            out[p + q] += P[p] @ Q[q]
    return out


# -- frequency decomposition -------------------------------------------------

@dataclass(frozen=True, eq=False)
class FrequencyComponent:
    """``A(omega) = sum P(E) A P(E')`` over cluster pairs with ``E' - E = omega``.

    ``terms`` holds the nu-series of the component (a single term for exact
    spectra); ``operator`` is their sum.
    """

    omega: float
    terms: np.ndarray
    space: HilbertSpace
    pairs: tuple = ()
    is_zero: bool = False

    @property
    def operator(self) -> Operator:
        return Operator(self.space, self.terms.sum(axis=0))


Spectrum = Union[SpectralDecomposition, PerturbationSeries]


def _series_structure(series: PerturbationSeries, order: int, cluster_tol: Optional[float]):
    """Cluster energies and projector series of the order-K levels."""
    if cluster_tol is None:
        cluster_tol = default_cluster_tol(series, order)
    groups, energies = cluster_values(series.energies(order), cluster_tol)
    e = series.scaled_vector_terms(order)  # (K+1, d, N)
    K, d = order, e.shape[1]
    proj = np.zeros((len(groups), K + 1, d, d), dtype=complex)
    for c, g in enumerate(groups):
        for p in range(K + 1):
            for q in range(K + 1 - p):
                proj[c, p + q] += e[p][:, g] @ e[q][:, g].conj().T
    return energies, proj


def _pair_blocks(A: np.ndarray, spectrum: Spectrum, order: Optional[int],
                 cluster_tol: Optional[float]):
    """Yield (i, j, omega, terms) for every nonzero block ``P_i A P_j``."""
    scale = max(1.0, float(np.max(np.abs(A), initial=0.0)))
    atol = 1e-14 * scale
    if isinstance(spectrum, SpectralDecomposition):
        U = spectrum.vectors
        At = U.conj().T @ A @ U
        lab = spectrum.labels
        E = spectrum.energies
        for i in range(len(E)):
            for j in range(len(E)):
                mask = np.outer(lab == i, lab == j)
                sub = np.where(mask, At, 0.0)
                if np.max(np.abs(sub), initial=0.0) <= atol:
                    continue
                yield i, j, E[j] - E[i], (U @ sub @ U.conj().T)[None]
    else:
        K = spectrum.order if order is None else order
        E, proj = _series_structure(spectrum, K, cluster_tol)
        Aseries = np.zeros((K + 1,) + A.shape, dtype=complex)
        Aseries[0] = A
        left = [_series_product(proj[i], Aseries) for i in range(len(E))]
        for i in range(len(E)):
            for j in range(len(E)):
                terms = _series_product(left[i], proj[j])
                if np.max(np.abs(terms), initial=0.0) <= atol:
                    continue
                yield i, j, E[j] - E[i], terms


def _decompose(A: Operator, spectrum: Spectrum, freq_tol: float,
               order: Optional[int] = None,
               cluster_tol: Optional[float] = None) -> list[FrequencyComponent]:
    space = spectrum.space if isinstance(spectrum, SpectralDecomposition) else spectrum.base.space
    if A.space != space:
        raise SpaceMismatchError(f"{A.space} vs {space}")
    blocks = list(_pair_blocks(A.matrix, spectrum, order, cluster_tol))
    if not blocks:
        return []
    groups, means = cluster_values([b[2] for b in blocks], freq_tol)
    comps = []
    for g, w in zip(groups, means):
        terms = sum(blocks[k][3] for k in g)
        pairs = tuple((blocks[k][0], blocks[k][1]) for k in g)
        is_zero = any(i == j for i, j in pairs)
        comps.append(FrequencyComponent(0.0 if is_zero else float(w), terms, space,
                                        pairs, is_zero))
    _check_regime(groups, [b[2] for b in blocks], means, freq_tol)
    return comps


def _check_regime(groups, omegas, means, freq_tol):
    if freq_tol <= 0:
        return
    omegas = np.asarray(omegas)
    spreads = [np.ptp(omegas[g]) for g in groups]
    gaps = np.diff(means)
    close = [s for s in spreads if s > freq_tol / 10]
    close += [g for g in gaps if g < 10 * freq_tol]
    if close:
        warnings.warn(
            f"Bohr-frequency splittings {min(close):.3g} are within a factor 10 of "
            f"freq_tol={freq_tol:.3g}; the secular treatment is ambiguous here",
            RegimeWarning, stacklevel=3)


def frequency_decompose(A: Operator, dec: Spectrum, freq_tol: float = 1e-9, *,
                        order: Optional[int] = None,
                        cluster_tol: Optional[float] = None) -> list[FrequencyComponent]:
    """Split ``A`` into Bohr-frequency components, sorted by frequency.

    ``dec`` may be an exact decomposition or a perturbation series; in the
    latter case the components are nu-series truncated at ``order``.
    Only pairs with a nonzero block take part in the frequency merge.
    """
    return _decompose(A, dec, freq_tol, order, cluster_tol)


# -- channels, dissipators, Lamb shift -----------------------------------

@dataclass(frozen=True, eq=False)
class Channel:
    """One Lindblad term ``rate * D[jump]`` of a bath at Bohr frequency ``omega``.

    ``omega`` is signed: negative for the KMS-derived upward partner.
    """

    bath: str
    omega: float
    rate: float
    terms: np.ndarray

    @property
    def jump(self) -> np.ndarray:
        return self.terms.sum(axis=0)


def channels(bath: BathSpec, spectrum: Spectrum, freq_tol: float, *,
             order: Optional[int] = None,
             cluster_tol: Optional[float] = None) -> list[Channel]:
    """Downward and upward channels for every positive frequency of the coupling.

    Zero-frequency components carry no rate and are left out.
    """
    out = []
    for comp in _decompose(bath.coupling, spectrum, freq_tol, order, cluster_tol):
        if comp.is_zero or comp.omega <= 0:
            continue
        down, up = bath.rates(comp.omega)
        out.append(Channel(bath.label, comp.omega, down, comp.terms))
        out.append(Channel(bath.label, -comp.omega, up,
                           np.conj(np.swapaxes(comp.terms, 1, 2))))
    return out


def dissipator_terms(bath: BathSpec, spectrum: Spectrum, freq_tol: float, *,
                     order: Optional[int] = None,
                     cluster_tol: Optional[float] = None) -> np.ndarray:
    """Dissipator split by powers of nu, shape (K+1, d^2, d^2), without lambda^2."""
    chans = channels(bath, spectrum, freq_tol, order=order, cluster_tol=cluster_tol)
    K = 0 if isinstance(spectrum, SpectralDecomposition) else (
        spectrum.order if order is None else order)
    return _channel_terms(chans, bath.coupling.dim, K)


def _channel_terms(chans: Sequence[Channel], d: int, K: int) -> np.ndarray:
    out = np.zeros((K + 1, d * d, d * d), dtype=complex)
    for ch in chans:
        if ch.rate:
            out += ch.rate * _series_dissipator(ch.terms)
    return out


def dissipator(bath: BathSpec, dec: Spectrum, freq_tol: float, *,
               order: Optional[int] = None,
               cluster_tol: Optional[float] = None) -> np.ndarray:
    """Full-secular thermal dissipator of one bath (without lambda^2)."""
    return dissipator_terms(bath, dec, freq_tol, order=order, cluster_tol=cluster_tol).sum(axis=0)


def lamb_shift(bath: BathSpec, dec: Spectrum, freq_tol: float, *,
               order: Optional[int] = None,
               cluster_tol: Optional[float] = None) -> Operator:
    """``H_LS = sum_omega S(omega) A(omega)^dag A(omega)`` over all frequencies."""
    space = dec.space if isinstance(dec, SpectralDecomposition) else dec.base.space
    d = space.total_dim
    H = np.zeros((d, d), dtype=complex)
    if bath.shift is None:
        return Operator(space, H)
    for comp in _decompose(bath.coupling, dec, freq_tol, order, cluster_tol):
        s = float(bath.shift(comp.omega))
        if s:
            dag = np.conj(np.swapaxes(comp.terms, 1, 2))
            H += s * _series_product(dag, comp.terms).sum(axis=0)
    return Operator(space, 0.5 * (H + H.conj().T))


# -- generator -----------------------------------------------------------

APPROACHES = ("global", "local0", "perturbed1", "perturbed2")


@dataclass(frozen=True, eq=False)
class Liouvillian:
    """Assembled generator with per-bath dissipators kept apart.

    ``dissipators[label]`` excludes the ``lambda**2`` prefactor.
    ``dissipator_terms`` and ``hamiltonian_terms`` are the nu-power splits
    used for order-consistent flux evaluation (a single term for global
    and local generators).
    """

    space: HilbertSpace
    generator: np.ndarray
    hamiltonian: Operator
    system_hamiltonian: Operator
    hamiltonian_terms: np.ndarray
    dissipators: dict
    dissipator_terms: dict
    baths: tuple
    channels: dict
    approach: str
    order: int
    freq_tol: float

    @property
    def dim(self) -> int:
        return self.space.total_dim

    def bath(self, label: str) -> BathSpec:
        for b in self.baths:
            if b.label == label:
                return b
        raise KeyError(f"unknown bath label {label!r}; known: {[b.label for b in self.baths]}")

    def apply(self, rho) -> np.ndarray:
        m = rho.matrix if isinstance(rho, Operator) else np.asarray(rho)
        return unvec(self.generator @ vec(m), self.dim)

    def apply_dissipator(self, label: str, rho) -> np.ndarray:
        m = rho.matrix if isinstance(rho, Operator) else np.asarray(rho)
        self.bath(label)
        return unvec(self.dissipators[label] @ vec(m), self.dim)


def default_freq_tol(baths: Sequence[BathSpec], spectral_range: float) -> float:
    lam = max((b.lam for b in baths), default=0.0)
    span = spectral_range or 1.0
    return max(lam ** 2 * span, 1e-9 * span)


def build_generator(H_S: Operator, spectrum: Spectrum, baths: Sequence[BathSpec], *,
                    include_lamb: bool = False, approach: Optional[str] = None,
                    freq_tol: Optional[float] = None, order: Optional[int] = None,
                    cluster_tol: Optional[float] = None) -> Liouvillian:
    """Assemble ``-i[H_S + lam^2 H_LS, .] + sum_s lam_s^2 D_s``.

    Pass the exact decomposition of ``H_S`` for the global equation, the
    decomposition of ``H_0`` for the local one, or the perturbation series
    of ``H_0 + nu V`` (with ``order``) for the perturbed-local equation.
    """
    if isinstance(spectrum, PerturbationSeries):
        K = spectrum.order if order is None else spectrum._check_order(order)
        tag = approach or f"perturbed{K}"
        space = spectrum.base.space
        nuV = spectrum.nu * spectrum.perturbation.matrix
        h_terms = np.zeros((K + 1, space.total_dim, space.total_dim), dtype=complex)
        h_terms[0] = H_S.matrix - (nuV if K >= 1 else 0)
        if K >= 1:
            h_terms[1] = nuV
        energies = spectrum.energies(K)
        span = float(energies.max() - energies.min())
    else:
        K = 0
        tag = approach or "global"
        space = spectrum.space
        h_terms = H_S.matrix[None].astype(complex)
        span = spectrum.spectral_range
    if H_S.space != space:
        raise SpaceMismatchError(f"{H_S.space} vs {space}")
    labels = [b.label for b in baths]
    if len(set(labels)) != len(labels):
        raise ValueError(f"bath labels must be unique: {labels}")
    for b in baths:
        if b.coupling.space != space:
            raise SpaceMismatchError(f"bath {b.label!r} lives on {b.coupling.space}")

    if freq_tol is None:
        freq_tol = default_freq_tol(baths, span)
    kw = dict(order=K, cluster_tol=cluster_tol) \
        if isinstance(spectrum, PerturbationSeries) else {}

    H_eff = H_S
    d_terms, d_full, chans = {}, {}, {}
    for b in baths:
        chans[b.label] = channels(b, spectrum, freq_tol, **kw)
        d_terms[b.label] = _channel_terms(chans[b.label], space.total_dim, K)
        d_full[b.label] = d_terms[b.label].sum(axis=0)
        if include_lamb:
            H_eff = H_eff + b.lam ** 2 * lamb_shift(b, spectrum, freq_tol, **kw)

    L = commutator_superop(H_eff.matrix)
    for b in baths:
        L = L + b.lam ** 2 * d_full[b.label]
    L.setflags(write=False)
    return Liouvillian(space, L, H_eff, H_S, h_terms, d_full, d_terms, tuple(baths),
                       chans, tag, K, float(freq_tol))
