"""JSON-configured batch runs: sweep parameters, solve, write CSV.

Usage::

    gkslnet run config.json [--set model.nu=0.02]... [--out results.csv] [--no-timestamp]
    gkslnet compare results.csv [--out summary.csv]

Exit codes: 0 success, 1 configuration error, 2 at least one row failed.

Config layout (all keys as written)::

    {
      "model": {"type": "two_site", "E_A": 2.0, "E_B": 1.0, "nu": 0.05},
      "baths": [{"label": "h", "attach_site": 0, "beta": 0.5, "lambda": 0.05,
                 "gamma_model": {"name": "flat", "params": {"g": 1.0}}}, ...],
      "approaches": ["global", "perturbed2"],
      "sweep": [{"param_path": "model.nu", "values": [0.1, 0.05]}],
      "tolerances": {"cluster_tol": null, "freq_tol": null, "steady_tol": null},
      "outputs": {"csv_path": "out.csv", "quantities": ["J_h", "entropy_production"]}
    }

A generic network replaces the model with ``{"type": "network", "sites":
[{"dim", "energy", "statistics"}], "couplings": [{"site_i", "site_j",
"strength"}]}``; ``nu`` is the largest coupling strength.  Parameter paths
are dotted, with list entries addressed by index or by ``label``
(``baths.h.beta``).
"""
from __future__ import annotations

import argparse
import copy
import csv
import io
import itertools
import json
import math
import os
import sys
import tempfile
import warnings
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Any, Optional, Sequence

import numpy as np

from . import __version__, dynamics, lindblad, spectral, thermo, twosite
from .opalg import (HilbertSpace, Operator, OSCILLATOR, SitePrimitive, TWO_LEVEL, embed,
                    expectation, ladder)

STATISTICS = {"two_level": TWO_LEVEL, "oscillator": OSCILLATOR}
VIOLATION_TOL = 1e-12


class ConfigError(ValueError):
    pass


# -- parameter paths -------------------------------------------------------

def _step(node, key: str, path: str):
    if isinstance(node, list):
        if key.lstrip("-").isdigit():
            idx = int(key)
            if not -len(node) <= idx < len(node):
                raise ConfigError(f"{path}: index {idx} out of range")
            return idx
        for i, item in enumerate(node):
            if isinstance(item, dict) and item.get("label") == key:
                return i
        raise ConfigError(f"{path}: no entry labelled {key!r}")
    if isinstance(node, dict):
        if key not in node:
            raise ConfigError(f"{path}: unknown field {key!r}")
        return key
    raise ConfigError(f"{path}: cannot descend into {type(node).__name__}")


def get_path(doc: dict, path: str):
    node = doc
    for key in path.split("."):
        node = node[_step(node, key, path)]
    return node


def set_path(doc: dict, path: str, value) -> None:
    keys = path.split(".")
    node = doc
    for key in keys[:-1]:
        node = node[_step(node, key, path)]
    last = keys[-1]
    if isinstance(node, dict) and last not in node:
        # optional leaves (tolerances, gamma params) may be introduced
        node[last] = value
        return
    node[_step(node, last, path)] = value


def parse_override(text: str) -> tuple[str, Any]:
    if "=" not in text:
        raise ConfigError(f"--set expects path=value, got {text!r}")
    path, raw = text.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return path.strip(), value


# -- config ------------------------------------------------------------------

def _require(d: dict, key: str, where: str):
    if not isinstance(d, dict) or key not in d:
        raise ConfigError(f"{where}: missing field {key!r}")
    return d[key]


def _number(value, where: str, positive: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"{where}: expected a finite number, got {value!r}")
    if positive and value <= 0:
        raise ConfigError(f"{where}: must be > 0, got {value!r}")
    return float(value)


@dataclass(frozen=True)
class RunConfig:
    """Validated run description; ``doc`` is the raw JSON tree."""

    doc: dict

    @property
    def model_type(self) -> str:
        return self.doc["model"]["type"]

    @property
    def approaches(self) -> list[str]:
        return list(self.doc["approaches"])

    @property
    def sweep(self) -> list[dict]:
        return list(self.doc.get("sweep") or [])

    @property
    def tolerances(self) -> dict:
        return dict(self.doc.get("tolerances") or {})

    @property
    def outputs(self) -> dict:
        return dict(self.doc.get("outputs") or {})

    @classmethod
    def from_dict(cls, doc: dict) -> "RunConfig":
        doc = copy.deepcopy(doc)
        if not isinstance(doc, dict):
            raise ConfigError("config: top level must be an object")
        unknown = set(doc) - {"model", "baths", "approaches", "sweep", "tolerances", "outputs"}
        if unknown:
            raise ConfigError(f"config: unknown fields {sorted(unknown)}")
        model = _require(doc, "model", "config")
        mtype = _require(model, "type", "model")
        if mtype not in ("two_site", "network"):
            raise ConfigError(f"model.type: expected 'two_site' or 'network', got {mtype!r}")
        baths = _require(doc, "baths", "config")
        if not isinstance(baths, list) or not baths:
            raise ConfigError("baths: at least one bath is required")
        labels = [b.get("label") if isinstance(b, dict) else None for b in baths]
        if len(set(labels)) != len(labels):
            raise ConfigError(f"baths: labels must be unique, got {labels}")
        approaches = _require(doc, "approaches", "config")
        if not isinstance(approaches, list) or not approaches:
            raise ConfigError("approaches: must be a nonempty list")
        for k, a in enumerate(approaches):
            if a not in lindblad.APPROACHES:
                raise ConfigError(f"approaches[{k}]: {a!r} not in {list(lindblad.APPROACHES)}")
        if len(set(approaches)) != len(approaches):
            raise ConfigError("approaches: duplicates are not allowed")
        for k, axis in enumerate(doc.get("sweep") or []):
            where = f"sweep[{k}]"
            path = _require(axis, "param_path", where)
            values = _require(axis, "values", where)
            if not isinstance(values, list) or not values:
                raise ConfigError(f"{where}.values: must be a nonempty list")
            try:
                get_path(doc, path)
            except ConfigError as exc:
                raise ConfigError(f"{where}.param_path: {exc}") from None
        tol = doc.get("tolerances") or {}
        for key, value in tol.items():
            if key not in ("cluster_tol", "freq_tol", "steady_tol"):
                raise ConfigError(f"tolerances: unknown field {key!r}")
            if value is not None:
                _number(value, f"tolerances.{key}", positive=True)
        cfg = cls(doc)
        try:
            build_point(doc)  # structural checks on the base point
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return cfg


def load_config(path: str, overrides: Sequence[str] = ()) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    for item in overrides:
        p, value = parse_override(item)
        set_path(doc, p, value)
    return RunConfig.from_dict(doc)


# -- model assembly ----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Point:
    space: HilbertSpace
    H0: Operator
    V: Operator
    nu: float
    baths: list
    annihilators: list
    two_site: Optional[twosite.TwoSiteParams]
    hot_label: Optional[str] = None


def _sites(model: dict) -> tuple[list[dict], list[dict]]:
    if model["type"] == "two_site":
        E_A = _number(_require(model, "E_A", "model"), "model.E_A")
        E_B = _number(_require(model, "E_B", "model"), "model.E_B")
        nu = _number(_require(model, "nu", "model"), "model.nu")
        sites = [{"dim": 2, "energy": E_A, "statistics": "two_level"},
                 {"dim": 2, "energy": E_B, "statistics": "two_level"}]
        return sites, [{"site_i": 0, "site_j": 1, "strength": nu}]
    sites = _require(model, "sites", "model")
    if not isinstance(sites, list) or not sites:
        raise ConfigError("model.sites: must be a nonempty list")
    return sites, list(model.get("couplings") or [])


def _gamma(spec: dict, where: str) -> lindblad.SpectralFunction:
    name = _require(spec, "name", where)
    try:
        return lindblad.make_gamma(name, **(spec.get("params") or {}))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


def build_point(doc: dict) -> Point:
    """Hamiltonians and baths for one fully specified parameter point."""
    model = doc["model"]
    sites, couplings = _sites(model)
    prims = []
    for k, s in enumerate(sites):
        where = f"model.sites[{k}]"
        stat = s.get("statistics", "two_level")
        if stat not in STATISTICS:
            raise ConfigError(f"{where}.statistics: expected one of {list(STATISTICS)}")
        dim = s.get("dim", 2)
        if isinstance(dim, bool) or not isinstance(dim, int):
            raise ConfigError(f"{where}.dim: expected an integer")
        try:
            prims.append(SitePrimitive(STATISTICS[stat], dim))
        except ValueError as exc:
            raise ConfigError(f"{where}: {exc}") from None
        _number(_require(s, "energy", where), f"{where}.energy")
    space = HilbertSpace(tuple(p.dim for p in prims))
    anns = [embed(ladder(p)[0], k, space) for k, p in enumerate(prims)]
    H0 = Operator.zero(space)
    for s, a in zip(sites, anns):
        H0 = H0 + float(s["energy"]) * (a.dag() @ a)

    strengths = []
    for k, c in enumerate(couplings):
        where = f"model.couplings[{k}]"
        i, j = _require(c, "site_i", where), _require(c, "site_j", where)
        for idx in (i, j):
            if not isinstance(idx, int) or not 0 <= idx < len(sites):
                raise ConfigError(f"{where}: site index {idx!r} out of range")
        if i == j:
            raise ConfigError(f"{where}: site_i and site_j must differ")
        strengths.append(_number(_require(c, "strength", where), f"{where}.strength"))
    nu = max((abs(g) for g in strengths), default=0.0)
    V = Operator.zero(space)
    if nu > 0:
        for c, g in zip(couplings, strengths):
            a, b = anns[c["site_i"]], anns[c["site_j"]]
            V = V + (g / nu) * (a.dag() @ b + a @ b.dag())

    baths = []
    for k, b in enumerate(doc["baths"]):
        where = f"baths[{k}]"
        label = _require(b, "label", where)
        site = _require(b, "attach_site", where)
        if not isinstance(site, int) or not 0 <= site < len(sites):
            raise ConfigError(f"{where}.attach_site: {site!r} out of range")
        beta = _number(_require(b, "beta", where), f"{where}.beta", positive=True)
        lam = _number(_require(b, "lambda", where), f"{where}.lambda")
        if lam < 0:
            raise ConfigError(f"{where}.lambda: must be >= 0")
        gamma = _gamma(_require(b, "gamma_model", where), f"{where}.gamma_model")
        a = anns[site]
        baths.append(lindblad.BathSpec(str(label), beta, a + a.dag(), gamma, lam))

    if model["type"] != "two_site":
        return Point(space, H0, V, nu, baths, anns, None)
    params = _two_site_params(doc, sites, nu, baths)
    hot = next(b for b, d in zip(baths, doc["baths"]) if d["attach_site"] == 0)
    return Point(space, H0, V, nu, baths, anns, params, hot.label)


def _two_site_params(doc, sites, nu, baths) -> twosite.TwoSiteParams:
    if len(baths) != 2 or sorted(b["attach_site"] for b in doc["baths"]) != [0, 1]:
        raise ConfigError("baths: the two_site model needs one bath on site 0 and one on site 1")
    hot, cold = sorted(zip((b["attach_site"] for b in doc["baths"]), baths))
    hot, cold = hot[1], cold[1]
    E_A, E_B = float(sites[0]["energy"]), float(sites[1]["energy"])
    if not E_A > E_B:
        raise ConfigError("model: the two_site model needs E_A > E_B")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", twosite.ValidityWarning)
        base = twosite.TwoSiteParams(E_A=E_A, E_B=E_B, nu=nu, lam=min(hot.lam, cold.lam),
                                     beta_h=hot.beta, beta_c=cold.beta)
        try:
            return base.with_(gamma_Ah=hot.gamma(base.omega_A), gamma_Bh=hot.gamma(base.omega_B),
                              gamma_Ac=cold.gamma(base.omega_A),
                              gamma_Bc=cold.gamma(base.omega_B))
        except ValueError as exc:
            raise ConfigError(f"baths: {exc}") from None


def make_generator(pt: Point, approach: str, tol: dict) -> lindblad.Liouvillian:
    HS = pt.H0 + pt.nu * pt.V
    kw = dict(freq_tol=tol.get("freq_tol"))
    if approach == "global":
        return lindblad.build_generator(HS, spectral.diagonalize(HS, tol.get("cluster_tol")),
                                        pt.baths, approach="global", **kw)
    dec0 = spectral.diagonalize(pt.H0, tol.get("cluster_tol"))
    if approach == "local0":
        return lindblad.build_generator(HS, dec0, pt.baths, approach="local0", **kw)
    k = int(approach[len("perturbed"):])
    series = spectral.rs_perturbation(dec0, pt.V, order=2, nu=pt.nu)
    return lindblad.build_generator(HS, series, pt.baths, order=k,
                                    cluster_tol=tol.get("cluster_tol"), **kw)


# -- running -----------------------------------------------------------------

def _points(cfg: RunConfig):
    axes = cfg.sweep
    if not axes:
        yield {}, cfg.doc
        return
    for combo in itertools.product(*(ax["values"] for ax in axes)):
        doc = copy.deepcopy(cfg.doc)
        values = {}
        for ax, v in zip(axes, combo):
            set_path(doc, ax["param_path"], v)
            values[ax["param_path"]] = v
        yield values, doc


def _solve(pt: Point, approach: str, tol: dict) -> dict:
    L = make_generator(pt, approach, tol)
    ss = dynamics.steady_state(L, tol.get("steady_tol"))
    rep = thermo.flux_report(L, ss.rho)
    out = {}
    for b in pt.baths:
        out[f"beta_{b.label}"] = b.beta
        out[f"J_{b.label}"] = rep.fluxes[b.label]
    out["entropy_production"] = rep.entropy_production
    for k, a in enumerate(pt.annihilators):
        out[f"n_{k}"] = expectation(ss.rho, a.dag() @ a).real
    if pt.two_site is not None:
        ops = twosite.operators()
        out["X"] = expectation(ss.rho, ops["X"]).real
        out["Y"] = expectation(ss.rho, ops["Y"]).real
    out["steady_residual"] = ss.residual
    out["energy_balance_residual"] = rep.energy_balance_residual
    out["psd_clip"] = ss.clipped
    out["nullity"] = ss.nullity
    if ss.degenerate:
        out["status"] = "degenerate"
    elif not rep.balance_ok():
        out["status"] = "energy-balance"
    else:
        out["status"] = "ok"
    return out


def _warn_text(pt: Point, caught) -> str:
    notes = []
    lam = min((b.lam for b in pt.baths), default=0.0)
    if pt.nu ** 2 > lam / 5:
        notes.append(f"nu^2={pt.nu ** 2:.3g} > lambda/5={lam / 5:.3g}")
    for w in caught:
        if issubclass(w.category, lindblad.RegimeWarning):
            notes.append("secular regime ambiguous")
    return "WARN: " + "; ".join(dict.fromkeys(notes)) if notes else ""


def run(cfg: RunConfig) -> list[dict]:
    """One row per (sweep point, approach), in sweep-lexicographic then listed order."""
    tol = cfg.tolerances
    rows = []
    for values, doc in _points(cfg):
        try:
            pt = build_point(doc)
        except (ConfigError, ValueError) as exc:
            for approach in cfg.approaches:
                rows.append({**values, "approach": approach, "status": f"error: {exc}"})
            continue
        extras = {}
        if pt.two_site is not None:
            p = pt.two_site
            extras["analytic_flux"] = twosite.analytic_flux(p)
            try:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    L0 = make_generator(pt, "local0", tol)
                    extras["local0_flux"] = thermo.heat_flux(
                        L0, pt.hot_label, dynamics.steady_state(L0).rho)
            except Exception:
                extras["local0_flux"] = None
        for approach in cfg.approaches:
            row = {**values, "approach": approach}
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always")
                try:
                    row.update(_solve(pt, approach, tol))
                except (np.linalg.LinAlgError, ValueError, RuntimeError) as exc:
                    row["status"] = f"error: {type(exc).__name__}: {exc}"
            row.update(extras)
            row["warn"] = _warn_text(pt, caught)
            if row["status"] == "ok" and not all(
                    math.isfinite(v) for v in row.values()
                    if isinstance(v, float)):
                row["status"] = "non-finite"
            rows.append(row)
    return rows


# -- CSV -----------------------------------------------------------------------

QUANTITY_ORDER = ("entropy_production", "X", "Y", "analytic_flux", "local0_flux",
                  "steady_residual", "energy_balance_residual", "psd_clip", "nullity")


def columns(cfg: RunConfig, rows: list[dict]) -> list[str]:
    sweep = [ax["param_path"] for ax in cfg.sweep]
    seen = []
    for row in rows:
        for key in row:
            if key not in seen:
                seen.append(key)
    per_bath = [k for k in seen if k.startswith(("beta_", "J_"))]
    occ = [k for k in seen if k.startswith("n_")]
    quantities = per_bath + [k for k in QUANTITY_ORDER[:1] if k in seen] + occ + \
        [k for k in QUANTITY_ORDER[1:] if k in seen]
    wanted = cfg.outputs.get("quantities")
    if wanted:
        unknown = [q for q in wanted if q not in quantities]
        if unknown:
            raise ConfigError(f"outputs.quantities: unknown {unknown}; available {quantities}")
        quantities = [q for q in quantities if q in wanted]
    return sweep + ["approach"] + quantities + ["warn", "status"]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def render_csv(header: list[str], rows: list[dict], timestamp: bool = False) -> str:
    buf = io.StringIO()
    if timestamp:
        now = datetime.now(timezone.utc).isoformat(timespec="seconds")
        buf.write(f"# generated {now} by gkslnet {__version__}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(row.get(k)) for k in header])
    return buf.getvalue()


def write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".gkslnet-", suffix=".csv.tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_csv(path: str) -> list[dict]:
    with open(path, encoding="utf-8", newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))


# -- compare -------------------------------------------------------------------

def _float(text: str) -> Optional[float]:
    try:
        return float(text)
    except (TypeError, ValueError):
        return None


def compare(rows: list[dict]) -> tuple[list[str], list[dict]]:
    """Per point and approach: hot-bath flux, pairwise differences, verdict.

    The hot bath is the one with the smallest ``beta``.  Returns
    ``(header, summary_rows)``.
    """
    if not rows:
        raise ConfigError("compare: no rows")
    keys = list(rows[0])
    if "approach" not in keys:
        raise ConfigError("compare: CSV has no 'approach' column")
    point_cols = keys[:keys.index("approach")]
    beta_cols = [k for k in keys if k.startswith("beta_")]
    if not beta_cols:
        raise ConfigError("compare: CSV has no beta_<label> columns")

    points: dict[tuple, dict] = {}
    for row in rows:
        points.setdefault(tuple(row[c] for c in point_cols), {})[row["approach"]] = row
    approaches = list(dict.fromkeys(r["approach"] for r in rows))
    if len(approaches) < 2:
        raise ConfigError("compare: need at least two approaches")
    for key, by_app in points.items():
        if set(by_app) != set(approaches):
            raise ConfigError(f"compare: mismatched sweep grids at point {key}: "
                              f"has {sorted(by_app)}, expected {sorted(approaches)}")

    out = []
    for key, by_app in points.items():
        betas = {}
        for row in by_app.values():
            for c in beta_cols:
                if _float(row.get(c)) is not None:
                    betas[c[len("beta_"):]] = _float(row[c])
        hot = min(betas, key=betas.get) if betas else None
        J = {a: _float(by_app[a].get(f"J_{hot}")) for a in approaches}
        for a in approaches:
            src = by_app[a]
            rec = dict(zip(point_cols, key))
            rec["approach"] = a
            rec["hot_bath"] = hot
            rec["J_hot"] = J[a]
            sigma = _float(src.get("entropy_production"))
            rec["entropy_production"] = sigma
            for b in approaches:
                rec[f"dJ_vs_{b}"] = (abs(J[a] - J[b])
                                     if J[a] is not None and J[b] is not None else None)
            g = J.get("global")
            rec["rel_err_vs_global"] = (abs(J[a] - g) / abs(g)
                                        if g and J[a] is not None else None)
            if J[a] is None or sigma is None:
                rec["verdict"] = "failed"
            elif sigma < -VIOLATION_TOL or J[a] < -VIOLATION_TOL:
                rec["verdict"] = "2nd-law-violating"
            else:
                rec["verdict"] = "ok"
            out.append(rec)
    header = point_cols + ["approach", "hot_bath", "J_hot", "entropy_production"] + \
        [f"dJ_vs_{b}" for b in approaches] + ["rel_err_vs_global", "verdict"]
    return header, out


# -- entry point ---------------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gkslnet", description=__doc__.split("\n")[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="evaluate a config (and its sweep) and write CSV")
    r.add_argument("config")
    r.add_argument("--set", dest="overrides", action="append", default=[],
                   metavar="PATH=VALUE", help="override a config value (JSON literal)")
    r.add_argument("--out", help="CSV path (default outputs.csv_path, else stdout)")
    r.add_argument("--no-timestamp", action="store_true",
                   help="omit the '# generated' header line")
    c = sub.add_parser("compare", help="summarize approach discrepancies in a results CSV")
    c.add_argument("results")
    c.add_argument("--out", help="summary CSV path (default stdout)")
    return ap


def _emit(text: str, path: Optional[str]) -> None:
    if path:
        write_atomic(path, text)
    else:
        sys.stdout.write(text)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "run":
            cfg = load_config(args.config, args.overrides)
            rows = run(cfg)
            header = columns(cfg, rows)
            text = render_csv(header, rows, timestamp=not args.no_timestamp)
            _emit(text, args.out or cfg.outputs.get("csv_path"))
            failed = [r for r in rows if r.get("status") != "ok"]
            for r in failed:
                print(f"row {r['approach']} {r.get('status')}", file=sys.stderr)
            return 2 if failed else 0
        header, summary = compare(read_csv(args.results))
        _emit(render_csv(header, summary), args.out)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
