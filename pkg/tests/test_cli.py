import csv
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from extremal_kit import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float)


def test_entire_odd_classical_value(tmp_path, capsys):
    prefix = tmp_path / "pw"
    code, out, _ = run(capsys, "entire", "--space", "pw:tau=1", "--measure", "dirac:0", "--kind", "odd",
                       "--out", str(prefix), "--grid", "201")
    assert code == 0
    doc = json.loads((tmp_path / "pw.json").read_text())
    assert doc["optimal_value"]["value"] == pytest.approx(2 * math.pi)
    assert doc["integral_numeric"]["value"] == pytest.approx(2 * math.pi, rel=1e-5)
    assert json.loads(out)["files"][0].endswith("pw.csv")
    head, data = read_csv(tmp_path / "pw.csv")
    assert head == ["x", "f_mu", "minorant", "majorant", "weight"]
    assert data.shape == (201, 5)
    assert np.all(data[:, 2] <= data[:, 1] + 1e-9) and np.all(data[:, 3] >= data[:, 1] - 1e-9)


def test_entire_delta_check(tmp_path, capsys):
    code, _, _ = run(capsys, "entire", "--space", "homog:nu=-0.5", "--measure", "dirac:0", "--kind", "odd",
                     "--delta-check", "2", "--out", str(tmp_path / "h"), "--format", "json", "--grid", "51",
                     "--integration-range", "200")
    assert code == 0
    doc = json.loads((tmp_path / "h.json").read_text())
    assert doc["closed_form"]["value"] == pytest.approx(2 * math.pi)
    assert doc["closed_form_reconstructed"]["value"] == pytest.approx(2 * math.pi)
    assert len(doc["table"]["x"]) == 51


def test_entire_without_h3(tmp_path, capsys):
    code, _, err = run(capsys, "entire", "--measure", "sine:a=1", "--out", str(tmp_path / "s"))
    assert code == 3
    assert "H3" in err and "--minorant-only" in err
    code, _, _ = run(capsys, "entire", "--measure", "sine:a=1", "--minorant-only", "--out", str(tmp_path / "s"),
                     "--grid", "51")
    assert code == 0
    doc = json.loads((tmp_path / "s.json").read_text())
    assert doc["majorant_extremal"] is False


@pytest.mark.parametrize("argv,code", [
    (["entire", "--measure", "gauss"], 2),
    (["entire", "--measure", "dirac:0", "--space", "pw:tau=-1"], 2),
    (["entire", "--measure", "dirac:0", "--delta-check", "1"], 2),
    (["periodic", "--measure", "dirac:0", "--degree", "3"], 3),
    (["periodic", "--measure", "ramp:2", "--degree", "-1"], 2),
    (["periodic", "--measure", "ramp:2", "--degree", "2", "--theta", "@/nonexistent/file"], 2),
    (["quadrature", "--theta", "jacobi:1", "--degree", "3"], 2),
    (["bogus"], 2),
    (["verify", "--only", "no_such_check"], 2),
])
def test_exit_codes(tmp_path, capsys, argv, code):
    assert run(capsys, *argv, *(["--out", str(tmp_path / "o")] if argv[0] not in ("bogus", "verify") else []))[0] == code


def test_trivial_circle_measure_exit_code(tmp_path, capsys):
    f = tmp_path / "theta.txt"
    f.write_text("atom 0 0.5\natom 0.5 0.5\n")
    code, _, err = run(capsys, "quadrature", "--theta", f"@{f}", "--degree", "3", "--out", str(tmp_path / "q"))
    assert code == 3
    assert "trivial" in err


def test_periodic_outputs(tmp_path, capsys):
    prefix = tmp_path / "saw"
    code, _, _ = run(capsys, "periodic", "--measure", "dirac:0", "--kind", "odd", "--degree", "7",
                     "--out", str(prefix), "--grid", "64")
    assert code == 0
    head, data = read_csv(tmp_path / "saw.csv")
    assert head == ["x", "target", "minorant", "majorant"] and data.shape == (64, 4)
    head, coeffs = read_csv(tmp_path / "saw_coeffs.csv")
    assert head == ["k", "minorant_re", "minorant_im", "majorant_re", "majorant_im"]
    assert coeffs.shape == (15, 5)
    doc = json.loads((tmp_path / "saw.json").read_text())
    assert doc["value_majorant"]["value"] == pytest.approx(0.125)
    assert doc["value_minorant"]["value"] == pytest.approx(-0.125)
    assert doc["theorem_sums"]["majorant"]["value"] == pytest.approx(0.125)


def test_quadrature_outputs(tmp_path, capsys):
    code, _, _ = run(capsys, "quadrature", "--degree", "3", "--out", str(tmp_path / "q"))
    assert code == 0
    head, data = read_csv(tmp_path / "q.csv")
    assert head == ["node", "weight"]
    assert np.allclose(data[:, 0], [0, 0.25, 0.5, 0.75]) and np.allclose(data[:, 1], 0.25)
    doc = json.loads((tmp_path / "q.json").read_text())
    assert doc["exactness"]["max_residual"] < 1e-12


@pytest.mark.parametrize("argv", [
    ["periodic", "--theta", "jacobi:1,1", "--measure", "ramp:2", "--degree", "5", "--grid", "50"],
    ["entire", "--space", "homog:nu=0", "--measure", "ramp:2", "--grid", "41", "--integration-range", "100"],
    ["quadrature", "--theta", "jacobi:0.5,2", "--degree", "6", "--format", "json"],
])
def test_outputs_are_byte_deterministic(tmp_path, capsys, argv):
    blobs = []
    for i in range(2):
        d = tmp_path / str(i)
        assert run(capsys, *argv, "--out", str(d / "r"))[0] == 0
        blobs.append({p.name: p.read_bytes() for p in sorted(d.iterdir())})
    assert blobs[0] == blobs[1]
    assert len(blobs[0]) >= 1


def test_plot_written_next_to_tables(tmp_path, capsys):
    pytest.importorskip("matplotlib")
    code, out, _ = run(capsys, "periodic", "--measure", "ramp:2", "--degree", "4", "--grid", "100",
                       "--out", str(tmp_path / "p"), "--plot")
    assert code == 0
    png = tmp_path / "p.png"
    assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
    assert str(png) in json.loads(out)["files"]
    code, _, _ = run(capsys, "quadrature", "--degree", "4", "--out", str(tmp_path / "q"), "--plot")
    assert code == 0 and (tmp_path / "q.png").exists()


def test_verify_subset_and_failures(tmp_path, capsys):
    out_json = tmp_path / "v.json"
    code, out, _ = run(capsys, "verify", "--only", "opuc,numerics.integrate", "--out-json", str(out_json))
    assert code == 0
    doc = json.loads(out_json.read_text())
    names = [c["name"] for c in doc["checks"]]
    assert names and all(n.startswith("opuc") or n == "numerics.integrate" for n in names)
    code, _, _ = run(capsys, "verify", "--only", "opuc.parseval", "--tol-scale", "1e-30")
    assert code == 5


def test_console_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "extremal_kit.cli", "quadrature", "--degree", "2",
                          "--out", str(tmp_path / "q")], capture_output=True, text=True, timeout=120)
    assert res.returncode == 0
    assert json.loads(res.stdout)["weight_sum"] == pytest.approx(1.0)


def test_verify_full_suite_passes(capsys):
    code, out, _ = run(capsys, "verify")
    assert code == 0, out
    rows = [line.split() for line in out.splitlines()[1:]]
    assert len(rows) >= 20 and all(r[1] == "pass" for r in rows)
