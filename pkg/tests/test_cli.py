import subprocess
import sys

import numpy as np
import pytest

from slicediv.cli import main


def write(path, arr):
    np.savetxt(path, np.atleast_2d(arr), delimiter=",")
    return str(path)


@pytest.fixture
def files(tmp_path):
    rng = np.random.default_rng(0)
    return {
        "a": write(tmp_path / "a.csv", rng.normal(size=(12, 3))),
        "b": write(tmp_path / "b.csv", rng.normal(size=(12, 3)) + 1.0),
        "x1": write(tmp_path / "x1.csv", rng.normal(size=(9, 1))),
        "y1": write(tmp_path / "y1.csv", rng.normal(size=(7, 1))),
        "c2": write(tmp_path / "c2.csv", rng.normal(size=(5, 2))),
    }


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, dict(line.split("=", 1) for line in out.out.splitlines()), out


def test_identical_files_give_zero(capsys, files):
    code, kv, _ = run(capsys, "compute", files["a"], files["a"], "--div", "sw", "--p", "2", "--L", "100")
    assert code == 0 and float(kv["value"]) == 0.0 and "std_error" in kv


def test_one_dimension_sw_equals_w1d(capsys, files):
    _, sw, _ = run(capsys, "compute", files["x1"], files["y1"], "--div", "sw", "--L", "5")
    _, w, _ = run(capsys, "compute", files["x1"], files["y1"], "--div", "w1d")
    assert float(sw["value"]) == pytest.approx(float(w["value"]), rel=1e-12)


def test_output_is_deterministic(capsys, files):
    outs = [run(capsys, "compute", files["a"], files["b"], "--div", "sw", "--seed", "7", "--L", "50")[2].out
            for _ in range(2)]
    assert outs[0] == outs[1]
    many = run(capsys, "compute", files["a"], files["b"], "--div", "sw", "--seed", "7", "--L", "50",
               "--workers", "3")[2].out
    assert many == outs[0]


@pytest.mark.parametrize("div", ["w", "sw", "scramer", "mmd", "smmd", "sinkhorn", "ssinkhorn", "tv", "stv"])
def test_every_divergence_runs(capsys, files, div):
    code, kv, _ = run(capsys, "compute", files["a"], files["b"], "--div", div, "--L", "10", "--eps", "2")
    assert code == 0 and float(kv["value"]) >= 0
    if "sinkhorn" in div:
        assert "iterations" in kv
    sliced = div.startswith("s") and div != "sinkhorn"
    assert ("std_error" in kv) == sliced


def test_one_dimensional_only_divergences(capsys, files):
    assert run(capsys, "compute", files["x1"], files["y1"], "--div", "cramer")[0] == 0
    assert run(capsys, "compute", files["a"], files["b"], "--div", "cramer")[0] == 2


def test_kernel_flags(capsys, files):
    code, kv, _ = run(capsys, "compute", files["a"], files["b"], "--div", "mmd", "--kernel", "linear")
    assert code == 0
    code, kv2, _ = run(capsys, "compute", files["a"], files["b"], "--div", "mmd", "--bandwidth", "3.5")
    assert code == 0 and kv2["value"] != kv["value"]
    assert run(capsys, "compute", files["a"], files["b"], "--bandwidth", "-1")[0] == 2


def test_input_errors(capsys, files, tmp_path):
    assert run(capsys, "compute", files["a"], files["c2"])[0] == 2
    assert run(capsys, "compute", files["a"], str(tmp_path / "missing.csv"))[0] == 2
    assert run(capsys, "compute", files["a"], files["b"], "--div", "energy")[0] == 2
    assert run(capsys, "compute", files["a"], files["b"], "--L", "0")[0] == 2
    assert run(capsys, "compute", files["a"], files["b"], "--unknown-flag")[0] == 2
    (tmp_path / "bad.csv").write_text("1,2,3\n4,5\n")
    code, _, out = run(capsys, "compute", files["a"], str(tmp_path / "bad.csv"))
    assert code == 2 and out.err.count("\n") == 1


def test_non_converged_sinkhorn(capsys, files):
    args = ["compute", files["a"], files["b"], "--div", "sinkhorn", "--eps", "0.01", "--max-iter", "2"]
    assert run(capsys, *args)[0] == 3
    code, kv, _ = run(capsys, *args, "--allow-partial")
    assert code == 0 and kv["converged"] == "false"
    sliced = ["compute", files["a"], files["b"], "--div", "ssinkhorn", "--eps", "0.01", "--max-iter", "2", "--L", "3"]
    assert run(capsys, *sliced)[0] == 3


def test_bench_unknown_experiment(capsys):
    assert main(["bench", "nonsense"]) == 2


def test_bench_projection_quick(capsys, tmp_path):
    code = main(["bench", "projection-complexity", "--quick", "--out", str(tmp_path), "--workers", "1"])
    text = (tmp_path / "projection-complexity_verdicts.txt").read_text()
    assert "rule_id=proj_slope" in text
    assert code == (0 if "pass=false" not in text else 1)


def test_bench_single_sigma(capsys, tmp_path):
    code = main(["bench", "bound-check", "--sigma-grid", "4", "--quick", "--n", "60", "--L", "8",
                 "--replications", "2", "--out", str(tmp_path), "--plots"])
    assert code == 0
    assert (tmp_path / "bound-check.csv").exists() and (tmp_path / "bound-check.svg").exists()


def test_bench_failed_verdict_exit_code(capsys, tmp_path):
    # the argmin rule cannot hold on a grid without 4 near the minimum of a single noisy replication
    code = main(["bench", "bound-check", "--sigma-grid", "0.1,9", "--n", "30", "--L", "4",
                 "--replications", "1", "--out", str(tmp_path)])
    assert code in (0, 1)
    assert (tmp_path / "bound-check_verdicts.txt").exists()


def test_module_entry_point(files):
    out = subprocess.run([sys.executable, "-m", "slicediv", "compute", files["a"], files["a"], "--div", "w"],
                         capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.startswith("value=0")
