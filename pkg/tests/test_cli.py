import json
import math

from mushroom.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_geom_stdout(capsys):
    code, out = run(capsys, "geom", "--r1", "1", "--r2", "2", "--t", "1")
    assert code == 0
    assert "area=8.283185307" in out
    assert "cap-arc" in out


def test_dyn_classify(capsys):
    code, out = run(capsys, "dyn", "classify", "--x", "0", "--y", "1.5",
                    "--dx", "1", "--dy", "0")
    assert code == 0
    assert "class=integrable" in out


def test_dyn_trace_csv(capsys):
    code, out = run(capsys, "dyn", "trace", "--x", "0", "--y", "1.5",
                    "--dx", "0", "--dy", "1", "--bounces", "3")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "index,x,y,dx,dy,wall-kind"
    assert lines[1].startswith("0,") and "cap-arc" in lines[1]


def test_specfun_zeros_csv(capsys, tmp_path):
    code, out = run(capsys, "specfun", "zeros", "--n", "0", "--kmax", "2",
                    "--cache-dir", str(tmp_path))
    assert code == 0
    assert out.splitlines()[1].startswith("0,1,2.4048255576957")


def test_config_file_and_validation(capsys, tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[geometry]\nr1=1.0\nr2=2.0\nt=0.5\n")
    code, out = run(capsys, "geom", "--config", str(cfg))
    assert code == 0
    assert "area=7.283185307" in out
    bad = tmp_path / "bad.ini"
    bad.write_text("[geometry]\nr1=3.0\nr2=2.0\n")
    code = main(["geom", "--config", str(bad)])
    assert code == 1
    unknown = tmp_path / "unknown.ini"
    unknown.write_text("[geometry]\nradius=3.0\n")
    assert main(["geom", "--config", str(unknown)]) == 1


def test_artifacts_and_manifest(tmp_path):
    out_dir = tmp_path / "run1"
    code = main(["quasi", "count", "--eps", "0.1", "--lambda-max", "20",
                 "--cache-dir", str(tmp_path / "cache"),
                 "--out-dir", str(out_dir)])
    assert code == 0
    manifest = json.loads((out_dir / "manifest.json").read_text())
    assert manifest["command"] == "quasi"
    assert "quasi_count.csv" in manifest["artifacts"]
    assert not (out_dir / "FAILED").exists()


def test_byte_identical_reruns(tmp_path):
    argv = ["dyn", "mc", "--samples", "20000", "--seed", "11"]
    a_dir, b_dir = tmp_path / "a", tmp_path / "b"
    assert main(argv + ["--out-dir", str(a_dir)]) == 0
    assert main(argv + ["--out-dir", str(b_dir)]) == 0
    assert (a_dir / "mc.txt").read_bytes() == (b_dir / "mc.txt").read_bytes()
    ma = json.loads((a_dir / "manifest.json").read_text())
    mb = json.loads((b_dir / "manifest.json").read_text())
    assert ma == mb


def test_numerical_failure_exit_code_and_marker(tmp_path):
    out_dir = tmp_path / "fail"
    code = main(["eig", "weyl", "--h", "0.1", "--count", "5",
                 "--lambda-grid", "1e9",
                 "--cache-dir", str(tmp_path / "cache"),
                 "--out-dir", str(out_dir)])
    assert code == 2
    assert (out_dir / "FAILED").exists()


def test_approx_run_and_refusal(capsys, tmp_path):
    spectrum = tmp_path / "spec.txt"
    spectrum.write_text(
        "dim 3\neigenvalues\n1.0 10.0 20.0\n"
        "eigenvectors\n1 0 0\n0 1 0\n0 0 1\n"
        "quasi_eigenvalues\n1\n1.0\nquasimodes\n1\n0\n0\n")
    code, out = run(capsys, "approx", "run", "--input", str(spectrum),
                    "--c", "2.0", "--eps", "0.25", "--delta", "0.25")
    assert code == 0
    rep = json.loads(out)
    assert rep["accepted"] and rep["certified"] == [0]
    code, out = run(capsys, "approx", "run", "--input", str(spectrum),
                    "--c", "2.0", "--eps", "0.25", "--delta", "0.6")
    assert code == 0
    rep = json.loads(out)
    assert not rep["accepted"] and rep["violation"] == "delta-range"


def test_density_assemble_cli(capsys, tmp_path):
    inst = tmp_path / "inst.json"
    inst.write_text(json.dumps({
        "g": [1.0 / k for k in range(1, 101)],
        "subsets": [list(range(2, 101))],
        "eps": [0.5], "eps_prime": [0.3], "d": 1.0, "n_max": 100}))
    code, out = run(capsys, "density", "assemble", "--input", str(inst))
    assert code == 0
    rep = json.loads(out)
    assert rep["accepted"]
    assert rep["S_runs"][0][0] == 1


def test_plot_svg(tmp_path):
    table = tmp_path / "t.csv"
    table.write_text("x,y\n0,1\n1,2\n2,0.5\n")
    out_dir = tmp_path / "plots"
    assert main(["plot", "--input", str(table), "--x", "x", "--y", "y",
                 "--out-dir", str(out_dir)]) == 0
    svg = (out_dir / "plot.svg").read_text()
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")
    # empty table still renders axes
    empty = tmp_path / "e.csv"
    empty.write_text("x,y\n")
    assert main(["plot", "--input", str(empty), "--x", "x", "--y", "y",
                 "--out-dir", str(out_dir), "--out-name", "empty.svg"]) == 0
    assert (out_dir / "empty.svg").read_text().startswith("<svg")
    # malformed rows are a validation error
    broken = tmp_path / "b.csv"
    broken.write_text("x,y\n1\n")
    assert main(["plot", "--input", str(broken), "--x", "x", "--y", "y",
                 "--out-dir", str(out_dir)]) == 1


def test_eig_solve_csv(capsys, tmp_path):
    code, out = run(capsys, "eig", "solve", "--t", "1", "--h", "0.05",
                    "--count", "3", "--cache-dir", str(tmp_path))
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "j,energy,residual,parity"
    assert lines[1].startswith("1,2.5")


def test_flow_hadamard_cli(capsys, tmp_path):
    code, out = run(capsys, "flow", "hadamard", "--j", "1", "--h", "0.05",
                    "--cache-dir", str(tmp_path))
    assert code == 0
    assert "dE_boundary=" in out and "speed_bound=" in out


def test_quasi_count_byte_identical_rerun(tmp_path):
    argv = ["quasi", "count", "--eps", "0.1", "--lambda-max", "15",
            "--cache-dir", str(tmp_path / "cache")]
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(argv + ["--out-dir", str(a)]) == 0
    assert main(argv + ["--out-dir", str(b)]) == 0  # second run hits the cache
    assert (a / "quasi_count.csv").read_bytes() == (b / "quasi_count.csv").read_bytes()


def test_report_percival_schema(tmp_path):
    cfg = tmp_path / "light.ini"
    cfg.write_text(
        "[solver]\nh = 0.1\ncount = 40\n"
        "[quasimodes]\neps = 0.1\nlambda_max = 12\nc = 0.25\n"
        "[flow]\njmax = 2\n"
        "[run]\nmc_samples = 5000\n")
    out_dir = tmp_path / "rep"
    assert main(["report", "percival", "--config", str(cfg),
                 "--cache-dir", str(tmp_path / "cache"),
                 "--out-dir", str(out_dir)]) == 0
    rep = json.loads((out_dir / "percival_report.json").read_text())
    assert set(rep) == {"geometry", "liouville_fraction", "quasimode_counting",
                        "weyl", "good_time_ratio", "flow"}
    d1 = (4 * math.pi / 3 - math.sqrt(3)) / (2 * math.pi + 2)
    assert abs(rep["liouville_fraction"]["closed_form"] - d1) < 1e-12
    assert rep["flow"][0]["dE_boundary"] < 0


def test_flow_sweep_columns(capsys, tmp_path):
    code = main(["flow", "sweep", "--t0", "0.9", "--t1", "1.1",
                 "--samples", "3", "--jmax", "2", "--h", "0.1",
                 "--cache-dir", str(tmp_path)])
    out = capsys.readouterr().out
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "t,j,energy,dE_numeric,dE_boundary,dE_interior,bound"
    mid = lines[1 + 2].split(",")  # interior grid point, j = 1
    assert float(mid[3]) < 0 and float(mid[4]) < 0 and float(mid[5]) < 0
    assert "crude_speed_constant=" in out
