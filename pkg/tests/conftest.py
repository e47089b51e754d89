import numpy as np
import pytest

from gkslnet import lindblad
from gkslnet.opalg import (HilbertSpace, Operator, SitePrimitive, OSCILLATOR, TWO_LEVEL,
                           embed, ladder)


def random_density(d, rng, rank=None):
    rank = d if rank is None else rank
    G = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = G @ G.conj().T
    return rho / np.trace(rho)


def random_hermitian(d, rng):
    G = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return 0.5 * (G + G.conj().T)


def random_network(rng, n_sites=2, max_dim=4, oscillators=True):
    """Random chain of sites with hopping couplings and one bath per end site.

    Returns (space, H0, V, nu, baths).
    """
    prims = []
    for _ in range(n_sites):
        if oscillators and rng.random() < 0.6:
            prims.append(SitePrimitive(OSCILLATOR, int(rng.integers(2, max_dim + 1))))
        else:
            prims.append(SitePrimitive(TWO_LEVEL, 2))
    space = HilbertSpace(tuple(p.dim for p in prims))
    anns = [embed(ladder(p)[0], k, space) for k, p in enumerate(prims)]
    # incommensurate energies keep H0 nondegenerate
    energies = rng.uniform(0.5, 3.0, size=n_sites) + np.sqrt(2) * np.arange(n_sites)
    H0 = sum((E * a.dag() @ a for E, a in zip(energies, anns)), Operator.zero(space))
    V = Operator.zero(space)
    for k in range(n_sites - 1):
        V = V + anns[k].dag() @ anns[k + 1] + anns[k] @ anns[k + 1].dag()
    nu = float(rng.uniform(0.01, 0.08))
    baths = []
    for label, site, model in (("h", 0, lindblad.flat), ("c", n_sites - 1, lindblad.ohmic)):
        a = anns[site]
        baths.append(lindblad.BathSpec(label, float(rng.uniform(0.3, 2.0)), a + a.dag(),
                                       model(float(rng.uniform(0.2, 2.0))),
                                       float(rng.uniform(0.02, 0.1))))
    return space, H0, V, nu, baths


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
