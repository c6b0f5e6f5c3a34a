import os

import numpy as np
import pytest

from fpattern.cli import main

PATTERN33 = """
[pattern]
kind = axisymmetric
r0 = 1.0
amplitude = 1.0
nx = 33
ny = 33
xmin = -1.2
xmax = 1.2
ymin = -1.2
ymax = 1.2

[physics]
gamma = 1.4
C = 1.0
l = 1.0
pi_ambient = 2.0
"""


def _cfg(tmp_path, text, name="run.ini"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def _read_summary(outdir, fname="summary.csv"):
    rows = {}
    with open(os.path.join(outdir, fname)) as fh:
        next(fh)
        for line in fh:
            key, val = line.strip().split(",")
            rows[key] = val
    return rows


def test_build_writes_fields_and_manifest(tmp_path):
    cfg = _cfg(tmp_path, PATTERN33)
    out = str(tmp_path / "out")
    assert main(["build", "--config", cfg, "--out", out]) == 0
    for name in ("phi.vtk", "phi.csv", "pi0.vtk", "rho.csv", "u.vtk",
                 "quiver.csv", "summary.csv", "manifest.txt"):
        assert os.path.exists(os.path.join(out, name)), name
    rows = _read_summary(out)
    assert rows["kind"] == "axisymmetric"
    assert float(rows["min_pi0"]) == pytest.approx(0.8979591836734694, abs=1e-9)
    manifest = open(os.path.join(out, "manifest.txt")).read()
    assert "config_sha256=" in manifest and "summary.csv sha256=" in manifest


def test_build_reruns_are_byte_identical(tmp_path):
    cfg = _cfg(tmp_path, PATTERN33)
    out1, out2 = str(tmp_path / "a"), str(tmp_path / "b")
    assert main(["build", "--config", cfg, "--out", out1]) == 0
    assert main(["build", "--config", cfg, "--out", out2]) == 0
    names = sorted(os.listdir(out1))
    assert names == sorted(os.listdir(out2))
    for name in names:
        if name == "manifest.txt":
            continue  # carries the timestamp
        a = open(os.path.join(out1, name), "rb").read()
        b = open(os.path.join(out2, name), "rb").read()
        assert a == b, name


def test_verify_ladder_emits_orders(tmp_path):
    cfg = _cfg(tmp_path, PATTERN33 + "\n[verify]\nladder = 33, 65\n")
    out = str(tmp_path / "v")
    assert main(["verify", "--config", cfg, "--out", out]) == 0
    lines = open(os.path.join(out, "report.csv")).read().splitlines()
    assert lines[0] == "n,residual,linf,l2,h,excluded"
    assert len(lines) == 1 + 14  # 7 residuals x 2 rungs
    orders = open(os.path.join(out, "orders.csv")).read().splitlines()
    assert len(orders) == 1 + 7
    stab = _read_summary(out, "stability.csv")
    assert stab["passed"] == "1"


def test_transport_solid_body_reports_exact_error(tmp_path):
    cfg = _cfg(tmp_path, """
[pattern]
kind = zero
nx = 65
ny = 65
xmin = -1.2
xmax = 1.2
ymin = -1.2
ymax = 1.2

[bearing]
velocity = solid_body
pi1_kind = gaussian
a = 1.0
amp = 0.5
x0x = 0.3
x0y = 0.0
width = 0.25
dt = 0.1
T = 0.5

[output]
formats = csv
""")
    out = str(tmp_path / "tr")
    assert main(["transport", "--config", cfg, "--out", out]) == 0
    rows = _read_summary(out, "transport.csv")
    assert float(rows["exact_linf_error"]) < 0.05
    assert float(rows["sup_grad_ratio"]) <= 1.001
    assert os.path.exists(os.path.join(out, "pi1_exact.csv"))


def test_transport_pattern_velocity_reports_exterior_change(tmp_path):
    cfg = _cfg(tmp_path, PATTERN33 + """
[bearing]
velocity = pattern
pi1_kind = aligned
a = 1.0
b = 0.2
dt = 0.05
T = 0.2

[output]
formats = csv
""")
    out = str(tmp_path / "tp")
    assert main(["transport", "--config", cfg, "--out", out]) == 0
    rows = _read_summary(out, "transport.csv")
    assert float(rows["exterior_change"]) == 0.0
    assert float(rows["sup_grad_ratio"]) <= 1.05


def test_trajectory_matches_analytic_column(tmp_path):
    cfg = _cfg(tmp_path, """
[physics]
gamma = 1.4
C = 1.0
l = 1.0
pi_ambient = 2.0

[bearing]
gx = 0.0
gy = 0.01
dt = 0.01
T = 6.0

[output]
formats = csv
""")
    out = str(tmp_path / "tj")
    assert main(["trajectory", "--config", cfg, "--out", out]) == 0
    rows = _read_summary(out)
    assert float(rows["final_V_error"]) < 1e-9
    assert float(rows["Vstar1"]) == pytest.approx(-0.035, abs=1e-12)
    header = open(os.path.join(out, "trajectory.csv")).readline().strip()
    assert header == ("t,X1,X2,V1,V2,X1_exact,X2_exact,"
                      "V1_exact,V2_exact,X_error,V_error")


def test_evolve_short_run_stays_frozen(tmp_path):
    cfg = _cfg(tmp_path, PATTERN33.replace("amplitude = 1.0", "amplitude = 0.3")
               .replace("xmin = -1.2", "xmin = -1.5")
               .replace("xmax = 1.2", "xmax = 1.5")
               .replace("ymin = -1.2", "ymin = -1.5")
               .replace("ymax = 1.2", "ymax = 1.5") + """
[evolve]
T = 0.05
stride = 0

[output]
formats = csv
""")
    out = str(tmp_path / "ev")
    assert main(["evolve", "--config", cfg, "--out", out]) == 0
    rows = _read_summary(out)
    assert float(rows["corr_final"]) > 0.999
    assert float(rows["rel_mass_drift"]) < 1e-12
    ledger = open(os.path.join(out, "ledger.csv")).read().splitlines()
    assert ledger[0] == "t,mass,mom1,mom2,energy"
    assert len(ledger) == 3  # initial + final


def test_exit_code_1_for_config_problems(tmp_path, capsys):
    assert main(["build", "--config", str(tmp_path / "nope.ini")]) == 1
    cfg = _cfg(tmp_path, PATTERN33.replace("amplitude = 1.0", "amplitude = 0.0"))
    assert main(["build", "--config", cfg, "--out", str(tmp_path / "o")]) == 1
    assert "amplitude" in capsys.readouterr().err
    cfg2 = _cfg(tmp_path, PATTERN33.replace("kind =", "knid ="), "bad.ini")
    assert main(["build", "--config", cfg2, "--out", str(tmp_path / "o")]) == 1
    err = capsys.readouterr().err
    assert "knid" in err
    cfg3 = _cfg(tmp_path, PATTERN33 + "\n[output]\nformats = hdf5\n", "fmt.ini")
    assert main(["build", "--config", cfg3, "--out", str(tmp_path / "o")]) == 1
    assert "hdf5" in capsys.readouterr().err
    assert main(["frobnicate", "--config", "x"]) == 1


def test_exit_code_2_for_numerical_failure(tmp_path, capsys):
    cfg = _cfg(tmp_path, PATTERN33.replace("pi_ambient = 2.0", "pi_ambient = 1.0"))
    assert main(["build", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
    assert "pi_ambient" in capsys.readouterr().err


def test_exit_code_3_for_io_failure(tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("a file, not a directory")
    cfg = _cfg(tmp_path, PATTERN33)
    rc = main(["build", "--config", cfg, "--out", str(blocker / "sub")])
    assert rc == 3


def test_sector_circulation_is_positive(tmp_path):
    cfg = _cfg(tmp_path, PATTERN33.replace("kind = axisymmetric", "kind = sector")
               .replace("nx = 33", "nx = 65").replace("ny = 33", "ny = 65"))
    out = str(tmp_path / "sec")
    assert main(["build", "--config", cfg, "--out", out, "--threads", "1"]) == 0
    assert float(_read_summary(out)["circulation_mid"]) > 0.0
