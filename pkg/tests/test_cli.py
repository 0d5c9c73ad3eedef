import json
import subprocess
import sys

import pytest

from kmsharp.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_table_float(tmp_path, capsys):
    path = tmp_path / "d.csv"
    code, _, err = run(capsys, "table", "--schedule", "const:0.5", "--n", "300", "--which", "d",
                       "--mode", "float", "-o", str(path))
    assert code == 0 and "wall=" in err
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# kind=d") and lines[1] == "m,n,value"
    assert "1,2,0.375" in lines


def test_table_c_and_exact(capsys):
    code, out, _ = run(capsys, "table", "--schedule", "const:0.5", "--n", "9", "--which", "c")
    assert code == 0 and "kind=c" in out.splitlines()[0]
    code, out, _ = run(capsys, "table", "--mode", "exact", "--n", "9", "--schedule", "const:0.5")
    assert code == 0
    assert "1,2,3/8" in out.splitlines() and "8,9,46302245/268435456" in out.splitlines()


def test_table_json(capsys):
    code, out, _ = run(capsys, "table", "--n", "2", "--mode", "exact", "--format", "json")
    data = json.loads(out)
    assert code == 0 and [1, 2, "3/8"] in data["cells"]


def test_table_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        run(capsys, "table", "--alpha", "0.3", "--n", "20", "-o", str(p))
    assert a.read_bytes() == b.read_bytes()


def test_table_precondition_exit_1(capsys):
    code, _, err = run(capsys, "table", "--alpha", "0.3", "--method", "closed_form", "--n", "3")
    assert code == 1 and "PreconditionError" in err


@pytest.mark.parametrize("argv", [
    ["table", "--schedule", "bogus"],
    ["table", "--mode", "double"],
    ["table", "--n", "-3"],
    ["simulate", "--state", "1,2", "--samples", "0"],
    ["simulate", "--state", "2,1"],
    ["verify", "--suite", "metric,nope"],
    ["gamma", "--alpha-grid", "0.1:0.2"],
    ["limit", "--n", "10,x"],
    ["frobnicate"],
])
def test_usage_errors_exit_2(capsys, argv):
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    assert code == 2


def test_rates(capsys):
    code, out, _ = run(capsys, "rates", "--alpha", "0.5", "--n", "300")
    lines = out.splitlines()
    assert code == 0 and lines[1] == "n,alpha,kappa,kappa_tilde"
    assert lines[2] == "1,0.5,0.375,0.375"
    assert len(lines) == 302
    last = lines[-1].split(",")
    assert abs(float(last[2]) - 0.4625482) < 1e-7 and abs(float(last[3]) - 0.563018) < 1e-6


@pytest.mark.parametrize("alpha, col, row, expected", [("0.85", 3, -1, 0.562567), ("0.99", 2, 2, 0.0985137)])
def test_rates_spot(capsys, alpha, col, row, expected):
    _, out, _ = run(capsys, "rates", "--alpha", alpha, "--n", "300")
    assert abs(float(out.splitlines()[row].split(",")[col]) - expected) < 1e-6


def test_gamma_single(capsys):
    code, out, _ = run(capsys, "gamma", "--alpha", "0.5")
    row = out.splitlines()[2].split(",")
    assert code == 0
    assert abs(float(row[1]) - 0.9757468) < 1e-7 and row[2:] == ["8", "false"]


def test_gamma_grid(capsys):
    code, out, _ = run(capsys, "gamma", "--alpha-grid", "0.5:0.9:0.1", "--nmax", "32")
    assert code == 0 and len(out.splitlines()) == 2 + 5


def test_verify_metric_exact(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "metric", "--n", "15", "--schedule", "const:0.5",
                       "--mode", "exact")
    data = json.loads(out)
    assert code == 0 and data["passed"] and len(data["results"]) == 1


def test_verify_oracle_default_alphas(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "oracle", "--n", "12")
    data = json.loads(out)
    assert code == 0
    assert [r["schedule"] for r in data["results"]] == [
        "const:3/10", "const:9/20", "const:1/2", "const:7/10", "const:9/10"]


def test_verify_skips_low_alpha(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "cd_gap,appendix_b", "--n", "8", "--alpha", "0.3")
    data = json.loads(out)
    assert code == 0 and all("skipped" in r for r in data["results"])


def test_verify_fault_injection(tmp_path, capsys):
    path = tmp_path / "d.csv"
    run(capsys, "table", "--mode", "exact", "--n", "8", "--alpha", "0.5", "-o", str(path))
    lines = path.read_text().splitlines()
    lines = [("2,5,0" if ln.startswith("2,5,") else ln) for ln in lines]
    path.write_text("\n".join(lines) + "\n")
    code, out, _ = run(capsys, "verify", "--suite", "metric", "--table", str(path))
    data = json.loads(out)
    assert code == 1 and not data["passed"]
    assert ["zero", 2, 5] in data["results"][0]["violations"]


def test_verify_csv(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "monotone", "--n", "6", "--alpha", "0.7",
                       "--format", "csv")
    assert code == 0 and out.splitlines()[1].startswith("monotone,const:7/10,pass")


@pytest.mark.parametrize("alpha", ["0.5", "0.75"])
def test_tightmap(tmp_path, capsys, alpha):
    path = tmp_path / "orbit.csv"
    code, out, _ = run(capsys, "tightmap", "--alpha", alpha, "--n", "15", "-o", str(path))
    data = json.loads(out)
    assert code == 0 and data["passed"] and data["max_deviation"] == 0
    assert path.read_text().splitlines()[0] == "k,m,n,x_value"


def test_tightmap_single_pair(capsys):
    code, out, _ = run(capsys, "tightmap", "--n", "1")
    assert code == 0 and json.loads(out)["checked"] == 1


def test_simulate(capsys):
    code, out, _ = run(capsys, "simulate", "--state", "1,2", "--alpha", "0.5", "--samples", "1000000",
                       "--seed", "42")
    data = json.loads(out)
    assert code == 0 and abs(data["z_score"]) <= 4 and data["exact"] == 0.375


def test_simulate_kinds_agree_at_12(capsys):
    exact = []
    for kind in "CD":
        _, out, _ = run(capsys, "simulate", "--state", "1,2", "--kind", kind, "--samples", "10")
        exact.append(json.loads(out)["exact"])
    assert exact[0] == exact[1]


def test_simulate_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        run(capsys, "simulate", "--state", "5,8", "--alpha", "0.6", "--samples", "50000", "--seed", "9",
            "-o", str(p))
    assert a.read_bytes() == b.read_bytes()


def test_limit(capsys):
    code, out, _ = run(capsys, "limit")
    lines = out.splitlines()
    assert code == 0 and lines[1] == "n,theta,kappa_tilde,distance_to_limit,gap_bound"
    assert len(lines) == 6


def test_entry_point_module():
    res = subprocess.run([sys.executable, "-m", "kmsharp.cli", "gamma", "--alpha", "0.5", "--nmax", "10"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "alpha,gamma,argmax_n,saturated" in res.stdout
