"""Two coupled two-level sites, each attached to its own thermal bath.

``H_S = E_A a^dag a + E_B b^dag b + nu (a^dag b + a b^dag)`` with site A
coupled to the hot bath through ``a + a^dag`` and site B to the cold bath
through ``b + b^dag``.  Everything here is written out in closed form, to
second order in ``nu``, and serves as an independent check of the generic
spectral -> lindblad -> dynamics -> thermo pipeline.

The moment system and flux coefficients assume ``E_A - E_B = 1`` (energy
unit); :func:`analytic_flux` accepts any positive splitting.

Heat-flux coefficients are returned with the signs that make
``J_h = lam^2 (J1 + Ja <a^dag a> + Jb <b^dag b> + JX <X>)`` hold exactly for
the order-2 generator: ``Ja``, ``Jb`` and ``JX`` are negative, and the
``gamma_Ah E_B nu^2`` term of ``J1`` carries ``exp(-beta_h omega_A)``.
"""
from __future__ import annotations

import functools
import warnings
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from . import dynamics, lindblad, spectral, thermo
from .opalg import HilbertSpace, Operator, SitePrimitive, embed, ladder

SPACE = HilbertSpace((2, 2))
LABELS = ("00", "01", "10", "11")
APPROACHES = lindblad.APPROACHES


class ValidityWarning(UserWarning):
    """Parameters outside ``nu^2 << lambda``."""


@dataclass(frozen=True)
class TwoSiteParams:
    E_A: float = 2.0
    E_B: float = 1.0
    nu: float = 0.05
    lam: float = 0.05
    beta_h: float = 0.5
    beta_c: float = 1.0
    gamma_Ah: float = 1.0
    gamma_Bh: float = 1.0
    gamma_Ac: float = 1.0
    gamma_Bc: float = 1.0
    delta: int = 1

    def __post_init__(self):
        if self.delta != 1:
            raise ValueError("closed forms exist for two-level sites only (delta=+1); "
                             "build oscillator networks with the generic pipeline")
        if not self.E_A > self.E_B:
            raise ValueError("need E_A > E_B (equal site energies are not supported)")
        if self.nu < 0 or self.lam < 0:
            raise ValueError("nu and lam must be >= 0")
        if self.beta_h <= 0 or self.beta_c <= 0:
            raise ValueError("inverse temperatures must be > 0")
        if min(self.gamma_Ah, self.gamma_Bh, self.gamma_Ac, self.gamma_Bc) < 0:
            raise ValueError("bath rates must be >= 0")
        if self.omega_B <= 0:
            raise ValueError("omega_B = E_B - nu^2/dE must be positive")
        if not self.valid:
            warnings.warn(f"nu^2 = {self.nu ** 2:.3g} exceeds lam/5 = {self.lam / 5:.3g}; "
                          "second-order corrections are not meaningful here",
                          ValidityWarning, stacklevel=3)

    @property
    def delta_E(self) -> float:
        return self.E_A - self.E_B

    @property
    def delta_beta(self) -> float:
        return self.beta_c - self.beta_h

    @property
    def omega_A(self) -> float:
        return self.E_A + self.nu ** 2 / self.delta_E

    @property
    def omega_B(self) -> float:
        return self.E_B - self.nu ** 2 / self.delta_E

    @property
    def valid(self) -> bool:
        return self.nu ** 2 <= self.lam / 5

    def with_(self, **changes) -> "TwoSiteParams":
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ValidityWarning)
            return replace(self, **changes)


class MomentState(NamedTuple):
    n_a: float
    n_b: float
    X: float
    Y: float

    def as_array(self) -> np.ndarray:
        return np.array(self)


class FluxCoefficients(NamedTuple):
    J1: float
    Ja: float
    Jb: float
    JX: float


def _unit_splitting(p: TwoSiteParams):
    if abs(p.delta_E - 1.0) > 1e-9:
        raise ValueError(f"closed-form coefficients assume E_A - E_B = 1, got {p.delta_E}; "
                         "rescale energies, nu, beta and rates first")


# -- operators and the generic pipeline ---------------------------------------

def operators() -> dict:
    """Site ladders and the moment observables on the two-qubit space."""
    return dict(_operators())


@functools.lru_cache(maxsize=None)
def _operators() -> dict:
    a1, _ = ladder(SitePrimitive(1, 2))
    a = embed(a1, 0, SPACE)
    b = embed(a1, 1, SPACE)
    ad, bd = a.dag(), b.dag()
    return {
        "a": a, "b": b,
        "n_a": ad @ a, "n_b": bd @ b,
        "X": ad @ b + a @ bd,
        "Y": 1j * (ad @ b - a @ bd),
    }


def hamiltonians(p: TwoSiteParams) -> tuple[Operator, Operator]:
    """``(H_0, V)`` with ``H_S = H_0 + nu V``."""
    ops = operators()
    H0 = p.E_A * ops["n_a"] + p.E_B * ops["n_b"]
    return H0, ops["X"]


def baths(p: TwoSiteParams) -> list[lindblad.BathSpec]:
    """Hot bath on site A, cold bath on site B.

    Rates are step functions so that each bath can have independent values
    at the A-like and B-like transition frequencies.
    """
    ops = operators()
    cut = [0.5 * (p.E_A + p.E_B)]
    hot = lindblad.BathSpec("h", p.beta_h, ops["a"] + ops["a"].dag(),
                            lindblad.piecewise(cut, [p.gamma_Bh, p.gamma_Ah]), p.lam)
    cold = lindblad.BathSpec("c", p.beta_c, ops["b"] + ops["b"].dag(),
                             lindblad.piecewise(cut, [p.gamma_Bc, p.gamma_Ac]), p.lam)
    return [hot, cold]


def generator(p: TwoSiteParams, approach: str = "perturbed2", **kw) -> lindblad.Liouvillian:
    """Liouvillian of the model for one of ``global``, ``local0``, ``perturbedK``."""
    H0, V = hamiltonians(p)
    HS = H0 + p.nu * V
    bs = baths(p)
    if approach == "global":
        spec = spectral.diagonalize(HS)
        return lindblad.build_generator(HS, spec, bs, approach="global", **kw)
    dec0 = spectral.diagonalize(H0)
    if approach == "local0":
        return lindblad.build_generator(HS, dec0, bs, approach="local0", **kw)
    if approach.startswith("perturbed"):
        k = int(approach[len("perturbed"):])
        series = spectral.rs_perturbation(dec0, V, order=2, nu=p.nu)
        return lindblad.build_generator(HS, series, bs, order=k, **kw)
    raise ValueError(f"unknown approach {approach!r}; expected one of {APPROACHES}")


def numeric_flux(p: TwoSiteParams, approach: str = "perturbed2") -> float:
    """Steady-state hot-bath flux from the generic pipeline."""
    L = generator(p, approach)
    ss = dynamics.steady_state(L)
    return thermo.heat_flux(L, "h", ss.rho)


def local0_flux(p: TwoSiteParams) -> float:
    """Hot-bath flux of the uncorrected local master equation.

    Heat is measured with the full ``H_0 + nu V``; this is the
    construction that can show heat flowing from cold to hot.
    """
    return numeric_flux(p, "local0")


# -- closed forms ------------------------------------------------------------

def perturbed_eigensystem(p: TwoSiteParams) -> list[tuple[str, float, np.ndarray]]:
    """Second-order eigenpairs ``(label, energy, vector)`` in the |AB> basis."""
    n = p.nu / p.delta_E
    c = 1.0 - 0.5 * n ** 2
    e = np.eye(4, dtype=complex)
    return [
        ("00", 0.0, e[0]),
        ("01", p.E_B - p.nu * n, c * e[1] - n * e[2]),
        ("10", p.E_A + p.nu * n, n * e[1] + c * e[2]),
        ("11", p.E_A + p.E_B, e[3]),
    ]


def _boltzmann(p: TwoSiteParams):
    return (np.exp(-p.beta_h * p.omega_A), np.exp(-p.beta_h * p.omega_B),
            np.exp(-p.beta_c * p.omega_A), np.exp(-p.beta_c * p.omega_B))


def flux_coefficients(p: TwoSiteParams) -> FluxCoefficients:
    _unit_splitting(p)
    eAh, eBh, _, _ = _boltzmann(p)
    nu2 = p.nu ** 2
    gAh, gBh = p.gamma_Ah, p.gamma_Bh
    J1 = gAh * p.E_A * eAh + gBh * p.E_B * nu2 * eBh - gAh * p.E_B * nu2 * eAh
    Ja = -gAh * (1 + eAh) * (p.E_A * (1 - nu2) - p.E_B * nu2)
    Jb = -nu2 * (gAh * p.E_A * (1 + eAh) + gBh * p.E_B * (1 + eBh))
    JX = -gAh * p.nu * p.E_A * (1 + eAh)
    return FluxCoefficients(float(J1), float(Ja), float(Jb), float(JX))


def flux_from_moments(p: TwoSiteParams, m) -> float:
    J1, Ja, Jb, JX = flux_coefficients(p)
    n_a, n_b, X = m[0], m[1], m[2]
    return p.lam ** 2 * (J1 + Ja * n_a + Jb * n_b + JX * X)


def moment_rates(p: TwoSiteParams) -> dict:
    """The scalar rate combinations ``M^(..)`` and ``c^(..)``."""
    eAh, eBh, eAc, eBc = _boltzmann(p)
    nu2 = p.nu ** 2
    gAh, gBh, gAc, gBc = p.gamma_Ah, p.gamma_Bh, p.gamma_Ac, p.gamma_Bc
    return {
        "M_aa": gAh * (1 - 2 * nu2) * (1 + eAh) + gBc * nu2 * (1 + eBc) + gAc * nu2 * (1 + eAc),
        "M_bb": gBc * (1 - 2 * nu2) * (1 + eBc) + gBh * nu2 * (1 + eBh) + gAh * nu2 * (1 + eAh),
        "M_XX": (gBh * nu2 * (1 + eBh) + gAh * (1 - nu2) * (1 + eAh)
                 + gAc * nu2 * (1 + eAc) + gBc * (1 - nu2) * (1 + eBc)),
        "M_aX": gBc * (1 + eBc) - gAh * (1 + eAh),
        "c_a": gAh * eAh * (1 - 2 * nu2) + gBc * nu2 * eBc + gAc * nu2 * eAc,
        "c_b": gBc * eBc * (1 - 2 * nu2) + gBh * nu2 * eBh + gAh * nu2 * eAh,
        "c_X": gAh * eAh - gBc * eBc,
    }


def moment_system(p: TwoSiteParams) -> tuple[np.ndarray, np.ndarray]:
    """``(M, c)`` with ``d/dt m = M m + lam^2 c`` for ``m = (n_a, n_b, X, Y)``."""
    _unit_splitting(p)
    r = moment_rates(p)
    l2, nu = p.lam ** 2, p.nu
    M = np.array([
        [-l2 * r["M_aa"], 0.0, 0.5 * l2 * nu * r["M_aX"], -nu],
        [0.0, -l2 * r["M_bb"], 0.5 * l2 * nu * r["M_aX"], nu],
        [l2 * nu * r["M_aX"], l2 * nu * r["M_aX"], -0.5 * l2 * r["M_XX"], 1.0],
        [2 * nu, -2 * nu, -1.0, -0.5 * l2 * r["M_XX"]],
    ])
    c = np.array([r["c_a"], r["c_b"], 2 * nu * r["c_X"], 0.0])
    return M, c


def stationary_moments(p: TwoSiteParams) -> MomentState:
    M, c = moment_system(p)
    cond = np.linalg.cond(M)
    if not np.isfinite(cond) or cond > 1e14:
        raise np.linalg.LinAlgError(f"moment matrix is singular (condition number {cond:.3e})")
    return MomentState(*(float(x) for x in np.linalg.solve(M, -p.lam ** 2 * c)))


def analytic_flux(p: TwoSiteParams) -> float:
    """Leading-order steady-state hot flux, ``O(lam^2 nu^2)``.

    For a splitting other than 1 the coupling enters as ``nu / (E_A - E_B)``.
    """
    n = p.nu / p.delta_E
    db = p.delta_beta
    hot = p.gamma_Ac * p.E_A * (-np.expm1(-p.E_A * db)) / (1 + np.exp(p.E_A * p.beta_h))
    cold = p.gamma_Bh * p.E_B * np.expm1(p.E_B * db) / (np.exp(p.E_B * p.beta_c) + 1)
    return float(p.lam ** 2 * n ** 2 * (hot + cold))
