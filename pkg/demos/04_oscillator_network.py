"""
A three-site network with oscillators and a Lamb shift
======================================================

Builds a chain qubit - oscillator - oscillator by hand, attaches an ohmic
hot bath and a flat cold bath, and reports fluxes and entropy production
for each approach.  A Lamb-shift function is switched on for the global
generator.
"""
import warnings

import numpy as np

from gkslnet import (HilbertSpace, OSCILLATOR, SitePrimitive, TWO_LEVEL, BathSpec, embed,
                     flat, ladder, ohmic)
from gkslnet.dynamics import steady_state
from gkslnet.lindblad import RegimeWarning, build_generator
from gkslnet.spectral import diagonalize, rs_perturbation
from gkslnet.thermo import flux_report

prims = [SitePrimitive(TWO_LEVEL, 2), SitePrimitive(OSCILLATOR, 3), SitePrimitive(OSCILLATOR, 3)]
space = HilbertSpace(tuple(s.dim for s in prims))
ann = [embed(ladder(s)[0], k, space) for k, s in enumerate(prims)]
energies = [2.3, 1.6, 1.0]
H0 = sum((E * x.dag() @ x for E, x in zip(energies[1:], ann[1:])), energies[0] * ann[0].dag() @ ann[0])
V = sum((ann[k].dag() @ ann[k + 1] + ann[k] @ ann[k + 1].dag() for k in range(1, 2)),
        ann[0].dag() @ ann[1] + ann[0] @ ann[1].dag())
nu = 0.03
HS = H0 + nu * V

hot = BathSpec("hot", 0.4, ann[0] + ann[0].dag(), ohmic(0.8), lam=0.04)
cold = BathSpec("cold", 1.5, ann[2] + ann[2].dag(), flat(1.0), lam=0.04)
baths = [hot, cold]

dec0 = diagonalize(H0)
series = rs_perturbation(dec0, V, order=2, nu=nu)
# nu^2-sized splittings sit close to the default merge tolerance lam^2 x range
with warnings.catch_warnings(record=True) as caught:
    warnings.simplefilter("always")
    gens = {
        "global": build_generator(HS, diagonalize(HS), baths),
        "local0": build_generator(HS, dec0, baths, approach="local0"),
        "perturbed2": build_generator(HS, series, baths, order=2),
    }
print(f"{sum(w.category is RegimeWarning for w in caught)} regime warnings at default tolerance")
print(f"Hilbert dimension {space.total_dim}, Liouvillian {gens['global'].generator.shape}")
print("approach     J_hot          J_cold         sigma          balance residual")
for name, L in gens.items():
    rep = flux_report(L, steady_state(L).rho)
    print(f"{name:<12} {rep.fluxes['hot']:+.6e}  {rep.fluxes['cold']:+.6e}  "
          f"{rep.entropy_production:+.6e}  {rep.energy_balance_residual:.1e}")

# Lamb shift: a bath-induced Hermitian term commuting with H_S
shifted = [BathSpec(b.label, b.beta, b.coupling, b.gamma, b.lam, shift=lambda w: 0.05 * w)
           for b in baths]
with warnings.catch_warnings():
    warnings.simplefilter("ignore", RegimeWarning)
    L = build_generator(HS, diagonalize(HS), shifted, include_lamb=True)
H_LS = L.hamiltonian - HS
print("\n|[H_LS, H_S]|_max =", f"{np.max(np.abs((H_LS @ HS - HS @ H_LS).matrix)):.1e}")
rep = flux_report(L, steady_state(L).rho)
print(f"global with Lamb shift: J_hot {rep.fluxes['hot']:+.6e}")

# close splittings relative to the merge tolerance are reported, not guessed
with warnings.catch_warnings(record=True) as caught:
    warnings.simplefilter("always")
    build_generator(HS, diagonalize(HS), baths, freq_tol=0.05)
print("\nwith freq_tol=0.05:", [str(w.message) for w in caught if w.category is RegimeWarning])
