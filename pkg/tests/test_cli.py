import json

import numpy as np
import pytest

from table1 import EIG
from wavepred.cli import main, read_config_file
from wavepred.output import read_csv


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def numbers(text):
    vals = []
    for tok in text.split():
        try:
            vals.append(float(tok))
        except ValueError:
            pass
    return np.array(vals)


def test_solve(tmp_path, capsys):
    code, out, _ = run(capsys, "solve", "--genus", "4", "--omega", "1", "--M", "2", "--states", "6",
                       "--out", str(tmp_path))
    assert code == 0
    line = [ln for ln in out.splitlines() if ln.strip().startswith("E[2]")][0]
    assert abs(numbers(line)[2] - 2.500673509869070) < 1e-8
    doc = json.loads((tmp_path / "solution_M2.json").read_text())
    assert doc["format"] == "wavepred-solution" and doc["version"] == 1


def test_solve_level0(tmp_path, capsys):
    code, out, _ = run(capsys, "solve", "--M", "0", "--out", str(tmp_path))
    assert code == 0
    assert abs(numbers(out.splitlines()[1])[0] - 0.517112256390810) < 1e-8


@pytest.mark.parametrize("argv", [["solve", "--genus", "0"], ["solve", "--mode", "bogus"],
                                  ["solve", "--M", "9"], ["predict", "--window", "4"], []])
def test_usage_errors(tmp_path, capsys, argv):
    with pytest.raises(SystemExit) as exc:
        code = main(argv + ["--out", str(tmp_path)] if argv else argv)
        raise SystemExit(code)
    assert exc.value.code == 1
    assert "usage" in capsys.readouterr().err


def test_predict(tmp_path, capsys):
    code, out, _ = run(capsys, "predict", "--M", "0", "--out", str(tmp_path))
    assert code == 0
    assert "E_pred[1] (additive)" in out
    header, rows = read_csv(tmp_path / "predict_M0_s0.csv")
    assert header == ["k", "x", "W", "R", "lambda", "alpha"]
    assert len(rows) == 24


def test_predict_projected_level2(tmp_path, capsys):
    code, out, _ = run(capsys, "predict", "--M", "2", "--mode", "projected", "--out", str(tmp_path))
    line = [ln for ln in out.splitlines() if ln.startswith("E_pred")][0]
    assert abs(numbers(line.split("=")[1])[0] - 0.499992232871423) < 1e-6


def test_predict_zero_coupling(tmp_path, capsys):
    run(capsys, "solve", "--M", "1", "--out", str(tmp_path))
    doc = json.loads((tmp_path / "solution_M1.json").read_text())
    doc["vectors"] = [[0.0] * len(v) for v in doc["vectors"]]
    src = tmp_path / "zero.json"
    src.write_text(json.dumps(doc))
    code, _, _ = run(capsys, "predict", "--from", str(src), "--out", str(tmp_path / "z"))
    assert code == 0
    _, rows = read_csv(tmp_path / "z" / "predict_M1_s0.csv")
    assert all(float(r[5]) == 0 for r in rows)


def test_predict_missing_input(tmp_path, capsys):
    code, _, err = run(capsys, "predict", "--from", str(tmp_path / "none.json"), "--out", str(tmp_path))
    assert code == 2


def test_secondary(tmp_path, capsys):
    code, out, _ = run(capsys, "predict", "--M", "3", "--secondary", "--out", str(tmp_path))
    assert code == 0
    header, rows = read_csv(tmp_path / "secondary_M3_s0.csv")
    assert header == ["k", "x", "W", "R", "lambda", "beta", "beta_avg", "d_exact"]
    rms = {ln.split(" = ")[0]: float(ln.split(" = ")[1]) for ln in out.splitlines() if ln.startswith("RMS")}
    assert rms["RMS(beta_avg - d_exact)"] <= rms["RMS(beta - d_exact)"]


def test_table(tmp_path, capsys):
    code, out, _ = run(capsys, "table", "--M", "4", "--out", str(tmp_path))
    assert code == 0
    header, rows = read_csv(tmp_path / "energy_table.csv")
    assert header == ["row_label"] + [f"state{i}" for i in range(6)]
    cells = {r[0]: np.array(r[1:], dtype=float) for r in rows}
    for M in range(5):
        assert np.max(np.abs(cells[f"E[{M}]"] - EIG[M])) < 1e-8


def test_deterministic(tmp_path, capsys):
    for d in ("a", "b"):
        run(capsys, "table", "--M", "2", "--out", str(tmp_path / d))
        run(capsys, "figdata", "--fig", "2", "--M", "2", "--out", str(tmp_path / d))
    for name in ("energy_table.csv", "fig2_R_lambda_alpha.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_scaling(tmp_path, capsys):
    code, out, _ = run(capsys, "scaling", "--quantity", "Wkin", "--M", "6", "--out", str(tmp_path))
    assert code == 0
    header, rows = read_csv(tmp_path / "scaling_Wkin.csv")
    assert header == ["M", "aggregate", "at_center", "slope", "residual"]
    assert all(abs(float(r[3]) - 2.0) < 1e-9 for r in rows)


def test_scaling_reports_R_and_lambda(tmp_path, capsys):
    code, out, _ = run(capsys, "scaling", "--quantity", "R", "--M", "5", "--out", str(tmp_path))
    assert code == 0 and "vanishing-moment law" in out


def test_figdata_fig5(tmp_path, capsys):
    code, out, _ = run(capsys, "figdata", "--fig", "5", "--M", "3", "--out", str(tmp_path))
    assert code == 0
    header, rows = read_csv(tmp_path / "fig5_coefficients.csv")
    assert header == ["k", "x", "d_exact", "d_eig", "alpha", "beta", "beta_avg"]
    assert [int(r[0]) for r in rows] == list(range(-39, 33))


@pytest.mark.parametrize("fig", [1, 3, 4])
def test_figdata_other(tmp_path, capsys, fig):
    code, out, _ = run(capsys, "figdata", "--fig", str(fig), "--M", "4", "--out", str(tmp_path))
    assert code == 0 and "wrote" in out


def test_svg(tmp_path, capsys):
    pytest.importorskip("matplotlib")
    code, _, _ = run(capsys, "figdata", "--fig", "3", "--M", "2", "--svg", "--out", str(tmp_path))
    assert code == 0
    assert (tmp_path / "fig3_energy_errors.svg").read_text().lstrip().startswith("<?xml")


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# example\nM = 1\nstates = 3\nout = %s\n" % (tmp_path / "fromfile"))
    assert read_config_file(cfg)["M"] == 1
    code, out, _ = run(capsys, "solve", "--config", str(cfg), "--M", "0")
    assert code == 0
    assert (tmp_path / "fromfile" / "solution_M0.json").exists()
    assert not (tmp_path / "fromfile" / "solution_M1.json").exists()
    header, _ = read_csv(tmp_path / "fromfile" / "eigenvalues.csv")
    assert len(header) == 4


def test_bad_config(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n")
    code, _, _ = run(capsys, "solve", "--config", str(cfg))
    assert code == 1


def test_io_error(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    code, _, err = run(capsys, "solve", "--M", "0", "--out", str(blocker / "sub"))
    assert code == 3
