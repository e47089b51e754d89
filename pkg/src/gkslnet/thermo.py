"""Heat fluxes, energy balance and entropy production at steady state.

Sign convention: ``J_s`` is the energy flowing from bath ``s`` *into* the
system, so a hot bath feeding a cold one has ``J_hot > 0``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

from .lindblad import Liouvillian, unvec, vec
from .opalg import Operator

FLUX_IMAG_RTOL = 1e-10
FLUX_IMAG_ATOL = 1e-14


def _trace_product(A: np.ndarray, B: np.ndarray) -> complex:
    return complex(np.sum(A * B.T))


def heat_flux(L: Liouvillian, bath_label: str, rho, H_S: Optional[Operator] = None, *,
              order: Optional[int] = None) -> float:
    """``lambda^2 Tr[D_s(rho) H_S]`` for bath ``s``.

    ``H_S`` defaults to the generator's system Hamiltonian (no Lamb shift).
    With ``order=k`` the functional is expanded in powers of nu and
    truncated at ``nu**k``, matching a perturbed-local generator of that
    order; this needs the default ``H_S``.
    """
    bath = L.bath(bath_label)
    m = rho.matrix if isinstance(rho, Operator) else np.asarray(rho)
    if order is None:
        H = (L.system_hamiltonian if H_S is None else H_S).matrix
        val = _trace_product(L.apply_dissipator(bath_label, m), H)
    else:
        if H_S is not None:
            raise ValueError("order-truncated flux uses the generator's own H_S")
        D = L.dissipator_terms[bath_label]
        Hk = L.hamiltonian_terms
        val = 0j
        for j in range(min(order, D.shape[0] - 1) + 1):
            Dr = unvec(D[j] @ vec(m), L.dim)
            for l in range(min(order - j, Hk.shape[0] - 1) + 1):
                val += _trace_product(Dr, Hk[l])
    val *= bath.lam ** 2
    if abs(val.imag) > FLUX_IMAG_RTOL * abs(val.real) + FLUX_IMAG_ATOL:
        raise ValueError(f"heat flux has imaginary part {val.imag:.3e} (real {val.real:.3e})")
    return float(val.real)


@dataclass(frozen=True)
class FluxReport:
    fluxes: dict
    entropy_production: float
    energy_balance_residual: float
    approach: str

    def balance_ok(self, rtol: float = 1e-9, atol: float = 1e-15) -> bool:
        scale = sum(abs(j) for j in self.fluxes.values())
        return self.energy_balance_residual <= rtol * scale + atol


def entropy_production(report, betas: Mapping[str, float]) -> float:
    """``sigma = -sum_s beta_s J_s`` over the report's baths.

    ``report`` may be a :class:`FluxReport` or a plain mapping of fluxes.
    """
    fluxes = report.fluxes if isinstance(report, FluxReport) else report
    return float(-sum(betas[k] * j for k, j in fluxes.items()))


def flux_report(L: Liouvillian, rho, H_S: Optional[Operator] = None) -> FluxReport:
    fluxes = {b.label: heat_flux(L, b.label, rho, H_S) for b in L.baths}
    betas = {b.label: b.beta for b in L.baths}
    return FluxReport(fluxes, entropy_production(fluxes, betas),
                      abs(sum(fluxes.values())), L.approach)
