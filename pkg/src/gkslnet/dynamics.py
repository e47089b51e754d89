"""Time evolution and steady states of a Liouvillian."""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from .lindblad import Liouvillian, unvec, vec
from .opalg import HilbertSpace, Operator

logger = logging.getLogger(__name__)

PSD_CLIP = 1e-8


class SteadyStateError(RuntimeError):
    pass


class DensityMatrix(Operator):
    """Hermitian, unit-trace, positive semidefinite operator."""

    __slots__ = ()

    def __init__(self, space: HilbertSpace, matrix, tol: float = 1e-10):
        super().__init__(space, matrix)
        herm = self.hermiticity_error()
        if herm > tol:
            raise ValueError(f"density matrix not Hermitian (deviation {herm:.2e})")
        tr = self.trace()
        if abs(tr - 1) > tol:
            raise ValueError(f"density matrix trace {tr} != 1")
        lo = float(np.linalg.eigvalsh(self.matrix).min())
        if lo < -PSD_CLIP:
            raise ValueError(f"density matrix has negative eigenvalue {lo:.3e}")

    @classmethod
    def from_operator(cls, op: Operator) -> "DensityMatrix":
        return cls(op.space, op.matrix)

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def entropy(self) -> float:
        p = np.clip(np.linalg.eigvalsh(self.matrix), 0.0, None)
        p = p[p > 0]
        return float(-np.sum(p * np.log(p)))


def gibbs_state(H: Operator, beta: float) -> DensityMatrix:
    E, U = np.linalg.eigh(H.matrix)
    w = np.exp(-beta * (E - E.min()))
    rho = (U * (w / w.sum())) @ U.conj().T
    return DensityMatrix(H.space, 0.5 * (rho + rho.conj().T))


def trace_distance(rho, sigma) -> float:
    a = rho.matrix if isinstance(rho, Operator) else np.asarray(rho)
    b = sigma.matrix if isinstance(sigma, Operator) else np.asarray(sigma)
    diff = a - b
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (diff + diff.conj().T)))))


def _hermitize(m: np.ndarray, what: str) -> np.ndarray:
    dev = float(np.max(np.abs(m - m.conj().T), initial=0.0))
    if dev > 0:
        logger.debug("%s: symmetrized away Hermiticity deviation %.3e", what, dev)
    return 0.5 * (m + m.conj().T)


def propagate(L: Liouvillian, rho0: Operator, t: float) -> DensityMatrix:
    """``rho(t) = exp(t L) rho0`` by dense matrix exponential."""
    if t < 0:
        raise ValueError("propagate needs t >= 0")
    if t == 0:
        return rho0 if isinstance(rho0, DensityMatrix) else DensityMatrix.from_operator(rho0)
    v = scipy.linalg.expm(t * L.generator) @ vec(rho0.matrix)
    rho = _hermitize(unvec(v, L.dim), "propagate")
    return DensityMatrix(L.space, rho, tol=1e-9)


@dataclass(frozen=True, eq=False)
class SteadyStateResult:
    rho: DensityMatrix
    residual: float
    nullity: int
    degenerate: bool
    smallest_singular_values: np.ndarray
    clipped: float = 0.0


def _repair_psd(m: np.ndarray) -> tuple[np.ndarray, float]:
    E, U = np.linalg.eigh(m)
    lo = float(E.min())
    if lo >= 0:
        return m, 0.0
    if lo < -PSD_CLIP:
        raise SteadyStateError(f"steady state has negative eigenvalue {lo:.3e}")
    E = np.clip(E, 0.0, None)
    E /= E.sum()
    return (U * E) @ U.conj().T, -lo


def steady_state(L: Liouvillian, tol: Optional[float] = None) -> SteadyStateResult:
    """Null vector of the generator via SVD.

    With a degenerate null space the state returned is the ergodic
    projection of the maximally mixed state (the long-time limit started
    from ``I/d``), and a warning is issued.
    """
    G = L.generator
    d = L.dim
    if tol is None:
        tol = 1e-9 * max(1.0, float(np.linalg.norm(G, 2)))
    U, s, Vh = np.linalg.svd(G)
    null = s <= tol
    nullity = int(null.sum())
    tail = s[-min(len(s), 4):][::-1].copy()
    if nullity == 0:
        raise SteadyStateError(
            f"no null vector within tol={tol:.2e}; smallest singular value {s[-1]:.3e}")

    if nullity == 1:
        v = Vh[-1].conj()
        degenerate = False
    else:
        right = Vh[null].conj().T          # columns span ker L
        left = U[:, null]                  # columns span ker L^dag
        mixed = vec(np.eye(d) / d)
        coeff = np.linalg.solve(left.conj().T @ right, left.conj().T @ mixed)
        v = right @ coeff
        degenerate = True
        warnings.warn(f"steady state is not unique (nullity {nullity}); "
                      "returning the ergodic average of the maximally mixed state",
                      RuntimeWarning, stacklevel=2)

    m = unvec(v, d)
    tr = np.trace(m)
    if abs(tr) < 1e-14:
        raise SteadyStateError("null vector has zero trace")
    m = _hermitize(m / tr, "steady_state")
    m, clipped = _repair_psd(m)
    if clipped:
        logger.info("steady_state: clipped negative eigenvalue of magnitude %.3e", clipped)
    rho = DensityMatrix(L.space, m)
    residual = float(np.linalg.norm(G @ vec(rho.matrix)))
    return SteadyStateResult(rho, residual, nullity, degenerate, tail, clipped)


def spectral_gap(L: Liouvillian, zero_tol: float = 1e-10) -> float:
    """Smallest nonzero ``|Re lambda|`` of the generator."""
    ev = np.linalg.eigvals(L.generator)
    re = np.abs(ev.real)
    scale = max(1.0, float(np.abs(ev).max()))
    nonzero = re[re > zero_tol * scale]
    if nonzero.size == 0:
        return 0.0
    return float(nonzero.min())
