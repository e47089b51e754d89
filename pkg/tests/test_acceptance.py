"""Acceptance suite: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v -s`` (the lines are printed
even without ``-s``).
"""

import numpy as np
import pytest

from gkslnet import lindblad, spectral, twosite
from gkslnet.dynamics import gibbs_state, steady_state, trace_distance
from gkslnet.lindblad import build_generator, frequency_decompose
from gkslnet.opalg import Operator
from gkslnet.thermo import flux_report, heat_flux

from conftest import random_density, random_hermitian, random_network

SEED = 20240611
REF = twosite.TwoSiteParams(E_A=2.0, E_B=1.0, lam=0.05, nu=0.05, beta_h=0.5, beta_c=1.0)


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} -- {detail}")
        return ok
    return emit


def _rel(a, b):
    return abs(a - b) / abs(b)


def test_criterion_1_analytic_flux(report):
    nus = [0.05, 0.025, 0.0125]
    err = {a: [] for a in ("perturbed2", "global")}
    for nu in nus:
        p = REF.with_(nu=nu)
        J = twosite.analytic_flux(p)
        for a in err:
            err[a].append(_rel(twosite.numeric_flux(p, a), J))
    within = {a: err[a][0] <= 0.05 for a in err}
    ratios = {a: [err[a][k] / err[a][k + 1] for k in range(2)] for a in err}
    in_window = {a: all(1.5 <= r <= 3.0 for r in ratios[a]) for a in err}
    ok = all(within.values()) and all(in_window.values())
    detail = "; ".join(
        f"{a}: rel err {err[a][0]:.3%} (<=5%: {within[a]}), halving ratios "
        f"{', '.join(f'{r:.2f}' for r in ratios[a])} (in [1.5, 3]: {in_window[a]})"
        for a in err)
    report(1, "analytic-flux agreement", ok, detail)
    assert all(within.values()), detail
    assert all(in_window.values()), detail


def _random_params(rng):
    E_B = rng.uniform(0.5, 2.0)
    lam = rng.uniform(0.01, 0.1)
    beta_h = rng.uniform(0.1, 2.0)
    g = rng.uniform(0.0, 2.0, size=4)
    g[g == 0.0] = 2.0
    return twosite.TwoSiteParams(
        E_A=E_B + rng.uniform(0.5, 2.0), E_B=E_B, lam=lam,
        nu=rng.uniform(0.0, 1.0) * np.sqrt(lam / 5),
        beta_h=beta_h, beta_c=beta_h + rng.uniform(0.05, 2.0),
        gamma_Ah=g[0], gamma_Bh=g[1], gamma_Ac=g[2], gamma_Bc=g[3])


@pytest.mark.filterwarnings("ignore::gkslnet.lindblad.RegimeWarning")
def test_criterion_2_second_law(report):
    rng = np.random.default_rng(SEED)
    n = 200
    worst = {"global": (np.inf, np.inf), "perturbed2": (np.inf, np.inf)}
    for _ in range(n):
        p = _random_params(rng)
        for a in worst:
            L = twosite.generator(p, a)
            rep = flux_report(L, steady_state(L).rho)
            J, s = rep.fluxes["h"], rep.entropy_production
            worst[a] = (min(worst[a][0], J), min(worst[a][1], s))
    ok = all(J >= -1e-12 and s >= -1e-12 for J, s in worst.values())
    detail = f"{n} random sets; " + "; ".join(
        f"{a}: min J_h {J:.3e}, min sigma {s:.3e}" for a, (J, s) in worst.items())
    report(2, "second law (global, perturbed2)", ok, detail)
    assert ok, detail


def test_criterion_3_local_artifact(report):
    # sweep beta_h at the reference point for a local-approach sign reversal
    found = []
    for beta_h in np.round(np.arange(0.5, 1.0, 0.05), 10):
        p = REF.with_(beta_h=float(beta_h))
        if twosite.local0_flux(p) < -1e-12 and twosite.numeric_flux(p, "global") > 1e-12:
            found.append(float(beta_h))
    pinned = REF.with_(beta_h=0.6)
    J_loc = twosite.local0_flux(pinned)
    J_glob = twosite.numeric_flux(pinned, "global")
    r_nu = J_loc / twosite.local0_flux(pinned.with_(nu=pinned.nu / 2))
    r_lam = J_loc / twosite.local0_flux(pinned.with_(lam=pinned.lam / 2))
    ok = (0.6 in found and J_loc < 0 < J_glob
          and abs(r_nu - 4) <= 0.8 and abs(r_lam - 4) <= 0.8)
    detail = (f"sweep hits beta_h={found}; pinned beta_h=0.6: local0 {J_loc:.4e}, "
              f"global {J_glob:.4e}; ratio per nu halving {r_nu:.3f}, per lambda halving "
              f"{r_lam:.3f}")
    report(3, "local-approach artifact", ok, detail)
    assert ok, detail


def test_criterion_4_equilibrium(report):
    worst_td, worst_J = 0.0, 0.0
    for beta in (0.3, 0.7, 1.0, 2.0):
        p = REF.with_(beta_h=beta, beta_c=beta)
        L = twosite.generator(p, "global")
        rho = steady_state(L).rho
        H0, V = twosite.hamiltonians(p)
        worst_td = max(worst_td, trace_distance(rho, gibbs_state(H0 + p.nu * V, beta)))
        worst_J = max(worst_J, abs(heat_flux(L, "h", rho)))
    ok = worst_td <= 1e-8 and worst_J <= 1e-10
    detail = f"max trace distance to Gibbs {worst_td:.2e}, max |J_h| {worst_J:.2e}"
    report(4, "equilibrium", ok, detail)
    assert ok, detail


def test_criterion_5_perturbation_engine(report):
    worst = 0.0
    errs = []
    for nu in (0.1, 0.05, 0.025):
        p = REF.with_(nu=nu, lam=0.1)
        H0, V = twosite.hamiltonians(p)
        series = spectral.rs_perturbation(spectral.diagonalize(H0), V, 2, nu=nu)
        E, vecs = series.energies(2), series.vectors(2)
        for n, (_, energy, vector) in enumerate(twosite.perturbed_eigensystem(p)):
            worst = max(worst, abs(E[n] - energy), np.max(np.abs(vecs[:, n] - vector)))
        exact = np.linalg.eigvalsh((H0 + nu * V).matrix)
        errs.append(np.max(np.abs(np.sort(E) - exact)))
    ratios = [errs[0] / errs[1], errs[1] / errs[2]]
    ok = worst <= 1e-12 and all(8 <= r <= 32 for r in ratios)
    detail = (f"max deviation from closed forms {worst:.1e}; error vs exact "
              f"{', '.join(f'{e:.3e}' for e in errs)}; ratios "
              f"{', '.join(f'{r:.2f}' for r in ratios)}")
    report(5, "perturbation engine", ok, detail)
    assert ok, detail


def test_criterion_6_moment_system(report):
    rng = np.random.default_rng(SEED)
    p = REF.with_(gamma_Ah=0.7, gamma_Bh=1.3, gamma_Ac=0.4, gamma_Bc=1.8)
    L = twosite.generator(p, "perturbed2")
    M, c = twosite.moment_system(p)
    ops = twosite.operators()
    names = ("n_a", "n_b", "X", "Y")
    obs = [ops[k].matrix for k in names]
    worst = 0.0
    for _ in range(100):
        rho = random_density(4, rng)
        drho = L.apply(rho)
        lhs = np.array([np.trace(drho @ O).real for O in obs])
        m = np.array([np.trace(rho @ O).real for O in obs])
        worst = max(worst, np.max(np.abs(lhs - (M @ m + p.lam ** 2 * c))))
    rho = steady_state(L).rho.matrix
    ss = np.array([np.trace(rho @ O).real for O in obs])
    dev = np.max(np.abs(ss - twosite.stationary_moments(p).as_array()))
    ok = worst <= 1e-10 and dev <= 1e-8
    detail = (f"max |d<O>/dt - (M m + lam^2 c)| over 100 states {worst:.1e}; "
              f"stationary moments vs steady state {dev:.1e}")
    report(6, "moment-system exactness", ok, detail)
    assert ok, detail


@pytest.mark.filterwarnings("ignore::gkslnet.lindblad.RegimeWarning")
def test_criterion_7_generator_invariants(report):
    rng = np.random.default_rng(SEED)
    worst = dict(trace=0.0, herm=0.0, complete=0.0, kms=0.0)
    dims = set()
    for _ in range(12):
        space, H0, V, nu, baths = random_network(rng, max_dim=4)
        dims.update(space.site_dims)
        HS = H0 + nu * V
        dec0 = spectral.diagonalize(H0)
        series = spectral.rs_perturbation(dec0, V, 2, nu=nu)
        gens = [build_generator(HS, spectral.diagonalize(HS), baths),
                build_generator(HS, dec0, baths, approach="local0"),
                build_generator(HS, series, baths, order=1),
                build_generator(HS, series, baths, order=2)]
        d = space.total_dim
        for L in gens:
            for _ in range(3):
                out = L.apply(random_density(d, rng))
                worst["trace"] = max(worst["trace"], abs(np.trace(out)))
                worst["herm"] = max(worst["herm"], np.max(np.abs(out - out.conj().T)))
            for b in L.baths:
                down = {round(ch.omega, 9): ch.rate for ch in L.channels[b.label]
                        if ch.omega > 0}
                for ch in L.channels[b.label]:
                    if ch.omega < 0:
                        want = np.exp(b.beta * ch.omega)
                        got = ch.rate / down[round(-ch.omega, 9)]
                        worst["kms"] = max(worst["kms"], abs(got - want) / want)
        A = Operator(space, random_hermitian(d, rng))
        for spec, kw in ((spectral.diagonalize(HS), {}), (dec0, {}), (series, {"order": 2})):
            total = sum(comp.operator.matrix for comp in frequency_decompose(A, spec, 1e-9, **kw))
            worst["complete"] = max(worst["complete"], np.max(np.abs(total - A.matrix)))
    ok = (worst["trace"] <= 1e-10 and worst["herm"] <= 1e-10
          and worst["complete"] <= 1e-12 and worst["kms"] <= 1e-12)
    detail = (f"site dims {sorted(dims)}; trace {worst['trace']:.1e}, Hermiticity "
              f"{worst['herm']:.1e}, completeness {worst['complete']:.1e}, "
              f"KMS rel {worst['kms']:.1e}")
    report(7, "generator invariants", ok, detail)
    assert ok, detail


def test_criterion_8_pipeline_consistency(report):
    p0 = REF.with_(nu=0.0)
    gens = [twosite.generator(p0, a).generator for a in lindblad.APPROACHES]
    gap = max(np.max(np.abs(G - H)) for G in gens for H in gens)
    rng = np.random.default_rng(SEED)
    p = REF.with_(gamma_Ah=0.7, gamma_Bh=1.3, gamma_Ac=0.4, gamma_Bc=1.8)
    L = twosite.generator(p, "perturbed2")
    ops = twosite.operators()
    worst = 0.0
    for _ in range(20):
        rho = random_density(4, rng)
        m = [np.trace(rho @ ops[k].matrix).real for k in ("n_a", "n_b", "X", "Y")]
        worst = max(worst, abs(twosite.flux_from_moments(p, m) - heat_flux(L, "h", rho, order=2)))
    ok = gap <= 1e-12 and worst <= 1e-10
    detail = (f"nu=0 max pairwise generator difference {gap:.1e}; flux assembly vs "
              f"heat_flux over 20 states {worst:.1e}")
    report(8, "pipeline consistency", ok, detail)
    assert ok, detail
