"""
Operators, spectra and the perturbation series
==============================================

Builds the two-site Hamiltonian from site ladders, diagonalizes it, lists
its Bohr frequencies and compares the second-order Rayleigh-Schroedinger
levels with exact diagonalization.
"""
import numpy as np

from gkslnet import HilbertSpace, SitePrimitive, TWO_LEVEL, OSCILLATOR, embed, ladder
from gkslnet.spectral import approximate_spectrum, bohr_frequencies, diagonalize, rs_perturbation

# two sites: a qubit and a truncated oscillator
net = HilbertSpace((2, 3))
a = embed(ladder(SitePrimitive(TWO_LEVEL, 2))[0], 0, net)
b = embed(ladder(SitePrimitive(OSCILLATOR, 3))[0], 1, net)
print("[b, b^dag] on the truncated oscillator (last entry is the cutoff artifact):")
print(np.real(np.diag((b @ b.dag() - b.dag() @ b).matrix)))

# the qubit pair used throughout the demos
net = HilbertSpace((2, 2))
q = ladder(SitePrimitive(TWO_LEVEL, 2))[0]
a, b = embed(q, 0, net), embed(q, 1, net)
E_A, E_B, nu = 2.0, 1.0, 0.1
H0 = E_A * a.dag() @ a + E_B * b.dag() @ b
V = a.dag() @ b + a @ b.dag()

dec = diagonalize(H0 + nu * V)
print("\nexact levels:", np.round(dec.energies, 10))
print("closed form :", np.round([0, 1.5 - np.sqrt(0.26), 1.5 + np.sqrt(0.26), 3], 10))

bf = bohr_frequencies(dec, 1e-9)
print("\nBohr frequencies and the level pairs carrying them:")
for w, pairs in bf:
    print(f"  {w:+.6f}  {pairs}")

# second-order series: energies E_B - nu^2, E_A + nu^2 for unit splitting
series = rs_perturbation(diagonalize(H0), V, order=2, nu=nu)
print("\norder  energies                                   max error")
for k in range(3):
    approx = approximate_spectrum(series, k)
    err = np.max(np.abs(approx.energies - dec.energies))
    print(f"  {k}    {np.round(approx.energies, 6)}   {err:.2e}")

# the order-2 error falls as nu^4
print("\nnu       order-2 error   ratio")
prev = None
for nu in (0.1, 0.05, 0.025):
    s = rs_perturbation(diagonalize(H0), V, order=2, nu=nu)
    err = np.max(np.abs(s.energies(2) - diagonalize(H0 + nu * V).energies))
    print(f"{nu:<8} {err:.3e}      {'' if prev is None else f'{prev / err:.2f}'}")
    prev = err
