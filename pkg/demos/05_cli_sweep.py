"""
Parameter sweeps from the command line
======================================

Runs the bundled JSON configurations through the ``gkslnet`` command
(``python -m gkslnet``) and summarizes the approaches with ``compare``.
Output goes to a temporary directory.
"""
import pathlib
import subprocess
import sys
import tempfile

here = pathlib.Path(__file__).resolve().parent
out = pathlib.Path(tempfile.mkdtemp(prefix="gkslnet-demo-"))


def gkslnet(*args):
    cmd = [sys.executable, "-m", "gkslnet", *map(str, args)]
    print("$ gkslnet", " ".join(map(str, args)))
    proc = subprocess.run(cmd, capture_output=True, text=True)
    print(proc.stdout, end="")
    if proc.stderr:
        print(proc.stderr, end="")
    print(f"(exit {proc.returncode})\n")
    return proc.returncode


# beta_h sweep over all four approaches, then the discrepancy summary
gkslnet("run", here / "configs" / "two_site.json", "--out", out / "two_site.csv", "--no-timestamp")
print((out / "two_site.csv").read_text())
gkslnet("compare", out / "two_site.csv")

# local flux scaling with nu, overriding the config from the command line
gkslnet("run", here / "configs" / "two_site.json", "--set", 'approaches=["local0"]',
        "--set", "baths.h.beta=0.6", "--set", "outputs.quantities=[\"J_h\"]",
        "--out", out / "nu.csv", "--no-timestamp")
gkslnet("run", here / "configs" / "two_site.json", "--set", 'approaches=["local0"]',
        "--set", "baths.h.beta=0.6", "--set", "model.nu=0.025",
        "--set", "outputs.quantities=[\"J_h\"]", "--out", out / "nu_half.csv", "--no-timestamp")

# an oscillator chain
gkslnet("run", here / "configs" / "chain.json", "--out", out / "chain.csv")
gkslnet("compare", out / "chain.csv")
print("results in", out)
