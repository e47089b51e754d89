import copy
import json
import os
import subprocess
import sys

import pytest

from gkslnet import cli

BASE = {
    "model": {"type": "two_site", "E_A": 2.0, "E_B": 1.0, "nu": 0.05},
    "baths": [
        {"label": "h", "attach_site": 0, "beta": 0.6, "lambda": 0.05,
         "gamma_model": {"name": "flat", "params": {"g": 1.0}}},
        {"label": "c", "attach_site": 1, "beta": 1.0, "lambda": 0.05,
         "gamma_model": {"name": "flat", "params": {"g": 1.0}}},
    ],
    "approaches": ["global"],
}


def config(tmp_path, **changes):
    doc = copy.deepcopy(BASE)
    doc.update(changes)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(doc, indent=2))
    return str(path)


def run_rows(tmp_path, *extra, **changes):
    out = tmp_path / "out.csv"
    code = cli.main(["run", config(tmp_path, **changes), "--out", str(out), *extra])
    return code, cli.read_csv(str(out)), out


def test_single_point_global_positive_flux(tmp_path):
    code, rows, _ = run_rows(tmp_path)
    assert code == 0 and len(rows) == 1
    row = rows[0]
    assert row["approach"] == "global" and row["status"] == "ok"
    assert float(row["J_h"]) > 0
    assert float(row["J_h"]) == pytest.approx(2.3947148181709629e-06, rel=1e-10)
    assert row["warn"] == ""


def test_local_sweep_scales_as_nu_squared(tmp_path):
    sweep = [{"param_path": "model.nu", "values": [0.1, 0.05, 0.025]}]
    code, rows, _ = run_rows(tmp_path, approaches=["local0"], sweep=sweep,
                             baths=[dict(BASE["baths"][0], **{"lambda": 0.1}),
                                    dict(BASE["baths"][1], **{"lambda": 0.1})])
    assert code == 0
    J = [abs(float(r["J_h"])) for r in rows]
    assert [r["model.nu"] for r in rows] == ["0.10000000000000001", "0.050000000000000003",
                                             "0.025000000000000001"]
    for a, b in zip(J, J[1:]):
        assert a / b == pytest.approx(4.0, rel=0.2)


def test_four_approaches_identical_at_nu_zero(tmp_path):
    code, rows, _ = run_rows(tmp_path, approaches=list(cli.lindblad.APPROACHES),
                             model={"type": "two_site", "E_A": 2.0, "E_B": 1.0, "nu": 0.0})
    assert code == 0
    assert [r["approach"] for r in rows] == list(cli.lindblad.APPROACHES)
    for key in ("J_h", "J_c", "n_0", "n_1"):
        vals = [float(r[key]) for r in rows]
        assert max(vals) - min(vals) <= 1e-15


def test_row_order_is_sweep_lexicographic(tmp_path):
    sweep = [{"param_path": "model.nu", "values": [0.05, 0.02]},
             {"param_path": "baths.h.beta", "values": [0.5, 0.6]}]
    code, rows, _ = run_rows(tmp_path, approaches=["perturbed2", "global"], sweep=sweep)
    keys = [(r["model.nu"], r["baths.h.beta"], r["approach"]) for r in rows]
    nus = ["0.050000000000000003", "0.02"]
    betas = ["0.5", "0.59999999999999998"]
    assert keys == [(n, b, a) for n in nus for b in betas for a in ("perturbed2", "global")]


def test_determinism_and_timestamp(tmp_path):
    path = config(tmp_path, approaches=["global", "perturbed2"])
    a, b, c = tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "c.csv"
    assert cli.main(["run", path, "--out", str(a), "--no-timestamp"]) == 0
    assert cli.main(["run", path, "--out", str(b), "--no-timestamp"]) == 0
    assert cli.main(["run", path, "--out", str(c)]) == 0
    assert a.read_bytes() == b.read_bytes()
    lines = c.read_text().splitlines(keepends=True)
    assert lines[0].startswith("# generated ")
    assert "".join(lines[1:]).encode() == a.read_bytes()
    leftovers = [f for f in os.listdir(tmp_path) if f.startswith(".gkslnet-")]
    assert leftovers == []


def test_csv_format(tmp_path):
    _, _, out = run_rows(tmp_path, "--no-timestamp")
    header, row = out.read_text().splitlines()
    assert header.startswith("approach,beta_h,J_h,beta_c,J_c,entropy_production,n_0,n_1,X,Y,")
    assert header.endswith(",warn,status")
    J = row.split(",")[2]
    assert J == "2.3947148181709629e-06"


def test_set_override_and_quantities(tmp_path):
    outputs = {"quantities": ["J_h", "local0_flux"]}
    code, rows, _ = run_rows(tmp_path, "--set", "baths.h.beta=0.5", "--set", "model.nu=0.02",
                             outputs=outputs)
    assert code == 0
    assert list(rows[0]) == ["approach", "J_h", "local0_flux", "warn", "status"]
    assert float(rows[0]["local0_flux"]) != 0


def test_validity_warn_column(tmp_path):
    code, rows, _ = run_rows(tmp_path, "--set", "model.nu=0.2")
    assert code == 0
    assert rows[0]["warn"].startswith("WARN: nu^2=0.04")


def test_network_model_and_label_paths(tmp_path):
    model = {"type": "network",
             "sites": [{"dim": 3, "energy": 2.0, "statistics": "oscillator"},
                       {"dim": 2, "energy": 1.0, "statistics": "two_level"}],
             "couplings": [{"site_i": 0, "site_j": 1, "strength": 0.03}]}
    sweep = [{"param_path": "baths.c.gamma_model.params.g", "values": [0.5, 1.0]}]
    code, rows, _ = run_rows(tmp_path, model=model, sweep=sweep,
                             approaches=["global", "perturbed2"])
    assert code == 0 and len(rows) == 4
    assert all(float(r["J_h"]) > 0 for r in rows)
    assert "X" not in rows[0] and "analytic_flux" not in rows[0]


def test_per_row_failure_exit_code(tmp_path):
    model = {"type": "network", "sites": [{"dim": 2, "energy": 1.0}]}
    baths = [{"label": "h", "attach_site": 0, "beta": 1.0, "lambda": 0.05,
              "gamma_model": {"name": "flat", "params": {"g": -1.0}}}]
    code, rows, _ = run_rows(tmp_path, model=model, baths=baths,
                             approaches=["global", "local0"])
    assert code == 2
    assert all(r["status"].startswith("error: GammaModelError") for r in rows)


@pytest.mark.parametrize("changes, message", [
    ({"approaches": ["redfield"]}, "approaches[0]"),
    ({"approaches": []}, "nonempty"),
    ({"baths": []}, "at least one bath"),
    ({"sweep": [{"param_path": "model.omega", "values": [1]}]}, "sweep[0].param_path"),
    ({"model": {"type": "two_site", "E_A": 1.0, "E_B": 2.0, "nu": 0.05}}, "E_A > E_B"),
    ({"tolerances": {"freq_tol": -1}}, "tolerances.freq_tol"),
])
def test_config_errors(tmp_path, capsys, changes, message):
    code = cli.main(["run", config(tmp_path, **changes)])
    assert code == 1
    assert message in capsys.readouterr().err


def test_json_syntax_error_has_line(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "model": {\n    "type": "two_site",\n  }\n}\n')
    assert cli.main(["run", str(path)]) == 1
    assert "bad.json:4:" in capsys.readouterr().err


def test_compare_flags_local_violation(tmp_path, capsys):
    _, _, out = run_rows(tmp_path, approaches=["global", "local0", "perturbed2"])
    header, summary = cli.compare(cli.read_csv(str(out)))
    by = {r["approach"]: r for r in summary}
    assert by["local0"]["verdict"] == "2nd-law-violating"
    assert by["global"]["verdict"] == "ok" and by["perturbed2"]["verdict"] == "ok"
    assert by["global"]["dJ_vs_global"] == 0 and by["local0"]["dJ_vs_local0"] == 0
    assert by["perturbed2"]["rel_err_vs_global"] < 0.05
    assert cli.main(["compare", str(out)]) == 0
    assert "2nd-law-violating" in capsys.readouterr().out


def test_compare_relative_error_shrinks_with_nu(tmp_path):
    sweep = [{"param_path": "model.nu", "values": [0.08, 0.04, 0.02]}]
    baths = [dict(b, **{"lambda": 0.1}) for b in BASE["baths"]]
    _, _, out = run_rows(tmp_path, approaches=["global", "perturbed2"], sweep=sweep,
                         baths=baths)
    _, summary = cli.compare(cli.read_csv(str(out)))
    err = [r["rel_err_vs_global"] for r in summary if r["approach"] == "perturbed2"]
    assert err[0] > err[1] > err[2]
    assert err[0] / err[1] >= 2 and err[1] / err[2] >= 2


def test_compare_errors(tmp_path, capsys):
    _, rows, out = run_rows(tmp_path)
    with pytest.raises(cli.ConfigError, match="two approaches"):
        cli.compare(rows)
    sweep = [{"param_path": "model.nu", "values": [0.05, 0.02]}]
    _, rows, out = run_rows(tmp_path, approaches=["global", "local0"], sweep=sweep)
    with pytest.raises(cli.ConfigError, match="mismatched sweep grids"):
        cli.compare(rows[:-1])
    text = out.read_text().splitlines()
    out.write_text("\n".join(text[:-1]) + "\n")
    assert cli.main(["compare", str(out)]) == 1


def test_module_entry_point(tmp_path):
    path = config(tmp_path)
    proc = subprocess.run([sys.executable, "-m", "gkslnet", "run", path, "--no-timestamp"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout.startswith("approach,beta_h,J_h")
