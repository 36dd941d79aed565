import csv
import json

import numpy as np
import pytest

from rwlab.grid import Grid
from rwlab.harness.cli import main, read_samples
from rwlab.operators import maximal


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_list(capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert [line.split()[0] for line in out] == [f"e{i}" for i in range(1, 8)]


@pytest.mark.parametrize("body, needle", [
    ("e1 { p1=2 p2=2 w1=powr(1) }", "unknown identifier"),
    ("e1 { p1=2 p2=3 p=1 }", "exponent relation"),
    ("e1 { p1=2..0 }", "malformed real literal"),
    ("e1 { w1=power(-2) }", "integrable"),
])
def test_run_parse_errors_exit_2(tmp_path, capsys, body, needle):
    cfg = write(tmp_path, "bad.cfg", "# comment\n" + body + "\n")
    assert main(["run", "e1", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
    err = capsys.readouterr().err
    assert needle in err and err.startswith(f"{cfg}:2:")
    assert not (tmp_path / "o").exists()


def test_run_unknown_experiment_and_bad_grid(tmp_path):
    assert main(["run", "e9", "--out", str(tmp_path)]) == 2
    assert main(["run", "e1", "--out", str(tmp_path), "--grid-N", "1000"]) == 2


def test_run_writes_outputs_and_is_reproducible(tmp_path, capsys):
    cfg = write(tmp_path, "e2.cfg", "e2 { p1=2 p2=2 family=indicators(4) }\n")
    args = ["run", "e2", "--config", cfg, "--grid-N", "1024", "--seed", "3", "--no-doubling"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    a = (tmp_path / "a" / "rows.csv").read_bytes()
    assert a == (tmp_path / "b" / "rows.csv").read_bytes()
    header = a.decode().splitlines()[0]
    assert header == "case_id,lhs,rhs,ratio"
    summary = json.loads((tmp_path / "a" / "summary.json").read_text())
    assert summary["grid"]["N"] == 1024 and summary["seed"] == 3
    assert "max ratio" in capsys.readouterr().out


def test_run_vacuous_exit_3(tmp_path):
    cfg = write(tmp_path, "v.cfg", "e1 { p1=2 p2=2 w1=power(3) family=indicators(2) }\n")
    assert main(["run", "e1", "--config", cfg, "--out", str(tmp_path / "o"),
                 "--grid-N", "1024", "--no-doubling"]) == 3


def test_run_violation_exit_4(tmp_path):
    # a drift slack of zero cannot be met
    cfg = write(tmp_path, "s.cfg", "e2 { p1=2 p2=2 family=indicators(2) slack=0 }\n")
    assert main(["run", "e2", "--config", cfg, "--out", str(tmp_path / "o"),
                 "--grid-N", "1024"]) == 4


def test_weights_constant(capsys):
    assert main(["weights", "constant", "a1", "--weight", "one", "--grid-N", "256"]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(1.0)
    assert main(["weights", "constant", "ap", "--weight", "power(", "--grid-N", "256"]) == 2
    assert "--weight:1:" in capsys.readouterr().err


def test_ops_round_trip(tmp_path):
    g = Grid(4.0, 64)
    f = g.indicator(0, 1)
    rows = "x,f\n" + "".join(f"{x:.17g},{v:.17g}\n" for x, v in zip(g.x, f.samples))
    inp = write(tmp_path, "in.csv", rows)
    out = tmp_path / "out.csv"
    assert main(["ops", "M", "--input", inp, "--output", str(out)]) == 0
    with open(out) as fh:
        vals = np.array([float(r["value"]) for r in csv.DictReader(fh)])
    assert np.array_equal(vals, maximal(f).samples)
    assert main(["ops", "Hr", "--input", inp, "--output", str(out), "--r", "0.25"]) == 0
    assert out.read_text().startswith("x,re,im")


def test_ops_input_errors(tmp_path, capsys):
    assert main(["ops", "M", "--input", write(tmp_path, "a.csv", "y\n1\n")]) == 1
    assert main(["ops", "M", "--input", write(tmp_path, "b.csv", "f\n1\n0\n")]) == 1
    assert "--L" in capsys.readouterr().err
    assert main(["ops", "Q", "--input", write(tmp_path, "c.csv", "f\n1\n0\n"),
                 "--L", "1"]) == 1


def test_read_samples_checks_grid(tmp_path):
    with pytest.raises(ValueError, match="uniform grid"):
        read_samples(write(tmp_path, "x.csv", "x,f\n-1,0\n0.3,1\n"))
    f = read_samples(write(tmp_path, "y.csv", "f\n1\n2\n3\n4\n"), L=2.0)
    assert f.grid.L == 2.0 and f.grid.N == 4
