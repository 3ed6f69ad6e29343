import io
import json
import math
import subprocess
import sys

import pytest

from helpers import bernoulli_nu
from qid.cli import parse_grid, run


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


@pytest.fixture
def files(tmp_path):
    f = {
        "bern03": write(tmp_path, "bern03.json", {"dim": 1, "M": [1], "b": [0], "probs": [[0, 0.7], [1, 0.3]]}),
        "bern05": write(tmp_path, "bern05.json", {"dim": 1, "M": [1], "b": [0], "probs": [[0, 0.5], [1, 0.5]]}),
        "near": write(tmp_path, "near.json", {"dim": 1, "probs": [[0, 0.5000001], [1, 0.4999999]]}),
        "stable": write(tmp_path, "stable.json", {"dim": 2, "mode": "standard", "A": [0, 0, 0, 0], "gamma": [0, 0],
                                                   "nu": {"dim": 2, "atoms": [], "stable": {"alpha": 1.5, "C": 1.0}}}),
        "gauss": write(tmp_path, "gauss.json", {"dim": 1, "A": [1.0], "gamma": [0.0]}),
        "poisson": write(tmp_path, "poisson.json", {"dim": 1, "mode": "drift", "A": [0.0], "gamma": [0.0],
                                                     "nu": {"dim": 1, "atoms": [[1.0, 2.0]], "stable": None}}),
        "cuppens": write(tmp_path, "cup.json", {"lambda": 0.6, "a": [0.0],
                                                "sigma": {"dim": 1, "atoms": [[1.0, 0.5], [2.0, 0.5]]}}),
    }
    code, out, _ = call("analyze", f["bern03"], "--grid", "256", "--mass-tol", "1e-14")
    assert code == 0
    f["bern03_t"] = write(tmp_path, "bern03.triplet.json", json.loads(out)["triplet"])
    seq = {"target": json.load(open(f["poisson"])),
           "sequence": [{"index": n, "triplet": {"dim": 1, "mode": "drift", "A": [0.0], "gamma": [1.0 / n],
                                                 "nu": {"dim": 1, "atoms": [[1.0, 2.0 + 1.0 / n]]}}}
                        for n in (1, 2, 4, 8)]}
    f["seq"] = write(tmp_path, "seq.json", seq)
    f["dir"] = tmp_path
    return f


def test_analyze_bernoulli(files):
    code, out, _ = call("analyze", files["bern03"], "--grid", "256")
    data = json.loads(out)
    assert code == 0
    atoms = dict((r[0], r[1]) for r in data["triplet"]["nu"]["atoms"])
    for k in range(1, 13):
        assert atoms[float(k)] == pytest.approx(bernoulli_nu(0.3, k), abs=1e-10)
    assert data["triplet"]["gamma"] == [0.0] and data["triplet"]["A"] == [0.0]
    assert data["tolerances"] == {"grid": 256, "mass_tol": 1e-10, "refine": False, "witness_tol": 1e-13}


def test_analyze_zero(files):
    code, out, err = call("analyze", files["bern05"])
    assert code == 2 and out == ""
    assert "zero of characteristic function at z ≈" in err and "π" in err


def test_analyze_inconclusive(files):
    code, _, err = call("analyze", files["near"], "--grid", "64")
    assert code == 3 and "increase N" in err


def test_moments_exp_moment_fails_hypothesis(files):
    code, out, _ = call("moments", "--alpha", "1", files["bern03_t"])
    data = json.loads(out)
    assert code == 4
    assert "hypothesis_fails" in data["exp_moment"]
    assert data["mean"][0] == pytest.approx(0.3, abs=1e-10)


def test_moments_poisson_exp(files):
    code, out, _ = call("moments", "--alpha", "0.5", files["poisson"])
    assert code == 0
    assert json.loads(out)["exp_moment"] == pytest.approx(math.exp(2.0 * math.expm1(0.5)), rel=1e-13)


def test_cuppens_command(files):
    code, out, _ = call("cuppens", files["cuppens"], "--tol", "1e-10")
    data = json.loads(out)
    assert code == 0 and data["mass_identity_residual"] <= 1.1e-10 and data["tolerances"]["tol"] == 1e-10
    code, _, err = call("cuppens", files["cuppens"], "--lambda", "0.4")
    assert code == 2 and "lambda" in err


def test_convolve_and_affine(files):
    code, out, _ = call("convolve", files["poisson"], files["poisson"])
    assert code == 0 and json.loads(out)["triplet"]["nu"]["atoms"] == [[1.0, 4.0]]
    code, out, _ = call("affine", files["gauss"], "--matrix", "[[2.0]]", "--shift", "[1.0]")
    t = json.loads(out)["triplet"]
    assert code == 0 and t["A"] == [4.0] and t["gamma"] == [1.0]
    code, _, _ = call("convolve", files["poisson"], files["gauss"])
    assert code == 2  # drift vs standard mode


def test_density_check_table_and_svg(files):
    code, out, _ = call("density-check", files["stable"], "--format", "table")
    assert code == 0 and "condition_holds_on_grid" in out and "index" in out
    svg = str(files["dir"] / "k.svg")
    code, out, _ = call("density-check", files["bern03_t"], "--format", "svg", "--out", svg,
                        "--r-grid", "0.5:1e-5:12")
    data = json.loads(out)
    assert code == 0 and data["verdict"] == "condition_fails" and data["figure"] == svg
    assert open(svg).read().lstrip().startswith("<?xml")
    assert len(data["tolerances"]["r_grid"]) == 12


def test_orey_command(files):
    code, out, _ = call("orey", files["stable"], "--beta", "0.5")
    assert code == 0 and json.loads(out)["verdict"] == "holds_on_grid"


def test_support_check(files):
    code, out, _ = call("support-check", files["bern03_t"])
    assert code == 0 and json.loads(out)["conclusion"] == "supported_in_K"
    code, out, _ = call("support-check", files["gauss"], "--normals", "[[1.0]]")
    assert json.loads(out)["conclusion"] == "conditions_fail"


def test_probe_command(files):
    code, out, _ = call("probe", "--polya")
    assert code == 0 and json.loads(out)["classification"] == "diverges"
    code, out, _ = call("probe", files["gauss"])
    assert json.loads(out)["limit"] == pytest.approx(1.0, rel=0.05)
    code, _, _ = call("probe")
    assert code == 1


def test_converge_command(files):
    code, out, _ = call("converge", files["seq"], "--eps", "0.5,0.1")
    data = json.loads(out)
    assert code == 0 and data["flags"]["c4_shrinking"] and data["tolerances"]["eps"] == [0.5, 0.1]
    code, out, _ = call("converge", files["seq"], "--format", "table")
    assert "index" in out


def test_project_id(files):
    code, out, _ = call("project-id", files["poisson"], "--a", "3")
    assert code == 0 and json.loads(out)["id"] is True
    code, out, _ = call("project-id", files["bern03_t"], "--a", "1")
    assert json.loads(out)["id"] is False


@pytest.mark.parametrize("argv", [[], ["bogus"], ["analyze"], ["orey", "x.json"], ["analyze", "missing.json"],
                                  ["convolve", "a", "b", "--format", "pdf"]])
def test_usage_errors_exit_one(argv):
    assert call(*argv)[0] == 1


def test_svg_not_available_everywhere(files):
    assert call("support-check", files["bern03_t"], "--format", "svg")[0] == 1


def test_invalid_triplet_exit_two(tmp_path):
    bad = write(tmp_path, "bad.json", {"dim": 1, "A": [-1.0]})
    assert call("moments", bad)[0] == 2


def test_output_is_byte_identical(files):
    a = call("analyze", files["bern03"], "--grid", "128")[1]
    b = call("analyze", files["bern03"], "--grid", "128")[1]
    assert a == b
    s1, s2 = str(files["dir"] / "a.svg"), str(files["dir"] / "b.svg")
    call("probe", "--polya", "--format", "svg", "--out", s1)
    call("probe", "--polya", "--format", "svg", "--out", s2)
    assert open(s1, "rb").read() == open(s2, "rb").read()


def test_parse_grid():
    g = parse_grid("1:1e-6:7")
    assert g[0] == 1.0 and g[-1] == pytest.approx(1e-6) and len(g) == 7
    assert list(parse_grid("0:1:3:lin")) == [0.0, 0.5, 1.0]


def test_console_entry_point(files):
    proc = subprocess.run([sys.executable, "-m", "qid.cli", "analyze", files["bern05"]], capture_output=True,
                          text=True)
    assert proc.returncode == 2 and "π" in proc.stderr
