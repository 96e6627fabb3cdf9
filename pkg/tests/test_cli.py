import csv
import json

import numpy as np

from dopfit.cli import main


def run(args):
    try:
        return main(args)
    except SystemExit as exc:  # argparse usage errors
        return exc.code


def test_usage_errors_exit_2(tmp_path):
    assert run(["basis", "--degree", "-1", "--out", str(tmp_path)]) == 2
    assert run(["sweep", "--mode", "incomplete", "--n", "100", "--degrees", "",
                "--out", str(tmp_path)]) == 2
    assert run(["sweep", "--out", str(tmp_path)]) == 2
    assert run(["montecarlo", "--n-iter", "0", "--out", str(tmp_path)]) == 2
    assert run(["fit", "--n", "1", "--out", str(tmp_path)]) == 2


def test_data_errors_exit_3(tmp_path):
    assert run(["fit", "--input", str(tmp_path / "missing.csv"), "--degree", "3",
                "--out", str(tmp_path)]) == 3
    bad = tmp_path / "bad.csv"
    bad.write_text("x,y,dy\n1,1,1\n0.5,1,1\n2,1,1\n")
    assert run(["fit", "--input", str(bad), "--degree", "1", "--sigma-y", "1",
                "--sigma-dy", "1", "--out", str(tmp_path)]) == 3
    # degree beyond 2n-1 is discovered against the data
    small = tmp_path / "small.csv"
    small.write_text("x,y,dy\n0,1,0\n1,1,0\n")
    assert run(["fit", "--input", str(small), "--degree", "9", "--sigma-y", "1",
                "--sigma-dy", "1", "--out", str(tmp_path)]) == 3


def test_numerical_errors_exit_4(tmp_path):
    code = run(["fit", "--n", "500", "--degree", "35", "--method", "vandermonde",
                "--seed", "0", "--no-plot", "--out", str(tmp_path)])
    assert code == 4


def test_basis_command_outputs(tmp_path):
    code = run(["basis", "--n", "50", "--degree", "9", "--sigma-y", "0.2",
                "--sigma-dy", "0.8", "--check", "--out", str(tmp_path)])
    assert code == 0
    assert (tmp_path / "p.csv").exists()
    assert (tmp_path / "p_prime.csv").exists()
    assert (tmp_path / "basis.png").exists()  # figures on by default
    report = json.loads((tmp_path / "quality.json").read_text())
    assert report["eps_rank"] == 0
    with (tmp_path / "p.csv").open(newline="") as handle:
        header = next(csv.reader(handle))
    assert header == ["x"] + [f"p{i}" for i in range(10)]


def test_basis_complete_check_full_rank(tmp_path):
    code = run(["basis", "--n", "50", "--degree", "99", "--check", "--no-plot",
                "--out", str(tmp_path)])
    assert code == 0
    report = json.loads((tmp_path / "quality.json").read_text())
    assert report["eps_rank"] == 0


def test_fit_both_writes_diff_summary(tmp_path):
    code = run(["fit", "--n", "80", "--degree", "6", "--seed", "3", "--method", "both",
                "--no-plot", "--out", str(tmp_path)])
    assert code == 0
    diff = json.loads((tmp_path / "diff.json").read_text())
    assert diff["vandermonde_solved"] is True
    assert diff["rel_diff_y"] <= 1e-6
    assert (tmp_path / "fit_dop.csv").exists()
    assert (tmp_path / "fit_vandermonde.csv").exists()


def test_fit_both_survives_singular_baseline(tmp_path):
    code = run(["fit", "--n", "500", "--degree", "35", "--seed", "0", "--method",
                "both", "--no-plot", "--out", str(tmp_path)])
    assert code == 0
    diff = json.loads((tmp_path / "diff.json").read_text())
    assert diff["vandermonde_solved"] is False
    assert (tmp_path / "fit_dop.csv").exists()
    assert not (tmp_path / "fit_vandermonde.csv").exists()


def test_fit_from_file_with_global_sigmas(tmp_path):
    data = tmp_path / "data.csv"
    x = np.linspace(0, 1, 30)
    rows = ["x,y,dy"] + [f"{float(xi)!r},{float(2 * xi + 1)!r},2.0" for xi in x]
    data.write_text("\n".join(rows) + "\n")
    out = tmp_path / "out"
    code = run(["fit", "--input", str(data), "--degree", "1", "--sigma-y", "0.1",
                "--sigma-dy", "0.4", "--no-plot", "--out", str(out)])
    assert code == 0
    sidecar = json.loads((out / "fit.json").read_text())
    assert sidecar["degree"] == 1
    with (out / "fit.csv").open(newline="") as handle:
        table = list(csv.DictReader(handle))
    fitted = np.array([float(r["y_tilde"]) for r in table])
    np.testing.assert_allclose(fitted, 2 * x + 1, atol=1e-10)


def test_montecarlo_json(tmp_path):
    code = run(["montecarlo", "--n", "60", "--degree", "5", "--n-iter", "4",
                "--seed", "8", "--no-plot", "--out", str(tmp_path)])
    assert code == 0
    payload = json.loads((tmp_path / "montecarlo.json").read_text())
    assert payload["n_iter"] == 4
    assert len(payload["per_iteration"]) == 4
    assert payload["seed"] == 8


def test_sweep_complete_table(tmp_path):
    code = run(["sweep", "--mode", "complete", "--n", "5:5:15", "--no-plot",
                "--out", str(tmp_path)])
    assert code == 0
    with (tmp_path / "sweep_complete.csv").open(newline="") as handle:
        rows = list(csv.DictReader(handle))
    assert {row["method"] for row in rows} == {"dop", "vandermonde"}
    assert sorted({int(row["n"]) for row in rows}) == [5, 10, 15]
    dop_rows = [row for row in rows if row["method"] == "dop"]
    assert all(int(row["eps_rank"]) == 0 for row in dop_rows)


def test_sweep_incomplete_table(tmp_path):
    code = run(["sweep", "--mode", "incomplete", "--n", "100", "--degrees", "3,30",
                "--no-plot", "--out", str(tmp_path)])
    assert code == 0
    with (tmp_path / "sweep_incomplete.csv").open(newline="") as handle:
        rows = list(csv.DictReader(handle))
    assert sorted({int(row["d"]) for row in rows}) == [3, 30]


def test_compare_outputs(tmp_path):
    code = run(["compare", "--n", "80", "--degree", "6", "--seed", "3", "--no-plot",
                "--out", str(tmp_path)])
    assert code == 0
    payload = json.loads((tmp_path / "comparison.json").read_text())
    assert payload["vandermonde_error"] is None
    assert payload["gram_condition"] > 1
    assert (tmp_path / "fit_dop.csv").exists()
    assert (tmp_path / "fit_vandermonde.csv").exists()


def test_config_file_and_flag_precedence(tmp_path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"n": 40, "degree": 3, "plot": False}))
    out1 = tmp_path / "a"
    assert run(["basis", "--config", str(config), "--out", str(out1)]) == 0
    with (out1 / "p.csv").open(newline="") as handle:
        header = next(csv.reader(handle))
    assert header == ["x", "p0", "p1", "p2", "p3"]
    assert not (out1 / "basis.png").exists()
    # explicit flag beats the config value
    out2 = tmp_path / "b"
    assert run(["basis", "--config", str(config), "--degree", "5",
                "--out", str(out2)]) == 0
    with (out2 / "p.csv").open(newline="") as handle:
        header = next(csv.reader(handle))
    assert header == ["x"] + [f"p{i}" for i in range(6)]


def test_config_rejects_unknown_keys(tmp_path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"degre": 3}))
    assert run(["basis", "--config", str(config), "--out", str(tmp_path)]) == 2


def test_fit_outputs_reparse_through_reader(tmp_path):
    # CLI fit output feeds back through the dataset reader (schema adapter):
    # x,y_tilde,dy_tilde columns are a valid x,y,dy dataset
    out = tmp_path / "out"
    assert run(["fit", "--n", "40", "--degree", "4", "--seed", "2", "--no-plot",
                "--out", str(out)]) == 0
    with (out / "fit.csv").open(newline="") as handle:
        rows = list(csv.DictReader(handle))
    data = tmp_path / "back.csv"
    lines = ["x,y,dy"] + [
        ",".join((row["x"], row["y_tilde"], row["dy_tilde"])) for row in rows
    ]
    data.write_text("\n".join(lines) + "\n")
    from dopfit import read_dataset

    x, obs, _ = read_dataset(data, sigma_y=1.0, sigma_dy=1.0)
    np.testing.assert_array_equal(
        obs.y_hat, [float(row["y_tilde"]) for row in rows]
    )
