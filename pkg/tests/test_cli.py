import csv
import io
import json
import math

import pytest

from strip6v.cli import main
from strip6v.params import params_from_boundary

RUN = ["--theta1", "0.2", "--theta2", "0.5", "--a", "0.5", "--b", "0.3", "--c", "0.4", "--d", "0.2"]


def _run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_verify_tilting_json(capsys):
    code, out, err = _run(["verify-tilting", *RUN, "--n", "4"], capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["N"] == 4
    assert rep["max_abs_error"] < 1e-10
    assert err.startswith("verify-tilting:")


def test_verify_tilting_exact_fractions(capsys):
    argv = ["verify-tilting", "--theta1", "1/5", "--theta2", "1/2", "--a", "1/2", "--b", "3/10",
            "--c", "2/5", "--d", "1/5", "--n", "2"]
    code, out, _ = _run(argv, capsys)
    assert code == 0
    assert json.loads(out)["max_abs_error"] == 0


def test_simulate_is_reproducible(tmp_path, capsys):
    files = []
    for k in range(2):
        f = tmp_path / f"traj{k}.csv"
        assert main(["simulate", *RUN, "--n", "6", "--steps", "40", "--seed", "7", "-o", str(f)]) == 0
        files.append(f.read_bytes())
    assert files[0] == files[1]
    rows = list(csv.reader(io.StringIO(files[0].decode())))
    assert rows[0] == ["step", "site", "occupation"]
    assert len(rows) == 1 + 41 * 6


def test_simulate_ensemble_distribution(capsys):
    code, out, _ = _run(["simulate", *RUN, "--n", "2", "--steps", "5", "--replicas", "500"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert sum(float(r["probability"]) for r in rows) == pytest.approx(1)


def test_couple_reports_no_violations(capsys):
    argv = ["couple", *RUN, "--a2", "0.55", "--b2", "0.2", "--c2", "0.3", "--d2", "0.25",
            "--n", "5", "--steps", "30", "--seed", "3"]
    code, out, err = _run(argv, capsys)
    assert code == 0
    assert "ordering violations=0" in err
    assert out.splitlines()[0] == "step,site,occupation,color"


def test_stationary_and_mpa_agree(capsys):
    _, out1, _ = _run(["stationary", *RUN, "--path", "URU"], capsys)
    _, out2, _ = _run(["mpa", *RUN, "--path", "URU"], capsys)
    p1 = [float(r["probability"]) for r in csv.DictReader(io.StringIO(out1))]
    p2 = [float(r["probability"]) for r in csv.DictReader(io.StringIO(out2))]
    assert max(abs(x - y) for x, y in zip(p1, p2)) < 1e-12


def test_mpa_json_derived(capsys):
    code, out, _ = _run(["mpa", *RUN, "--n", "1", "--json"], capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["r"] == pytest.approx(0.625)
    assert rep["A"] == pytest.approx(1.6957, abs=1e-4)


def test_seventeen_digits(capsys):
    _, out, _ = _run(["stationary", *RUN, "--n", "1"], capsys)
    value = out.splitlines()[2].split(",")[1]
    assert float(value) == pytest.approx(9 / 19, abs=1e-16)
    assert len(value.replace("0.", "", 1)) == 17


def test_phase_sweep_labels(capsys):
    code, out, _ = _run(["phase-sweep", "--r", "0.625", "--grid", "12x12"], capsys)
    assert code == 0
    sr = math.sqrt(0.625)
    for row in csv.DictReader(io.StringIO(out)):
        A, C = float(row["A"]), float(row["C"])
        if A * C >= 1:
            assert row["region"] == "shock"
        elif A > 1 / sr:
            assert row["phase"] == "high-density"
        elif C > sr:
            assert row["phase"] == "low-density"
        else:
            assert row["phase"] == "maximal-current"


def test_phase_sweep_with_density_column(capsys):
    code, out, _ = _run(["phase-sweep", "--r", "0.625", "--grid", "3x3", "--nmax", "20"], capsys)
    assert code == 0
    assert out.splitlines()[0].endswith("density_N20")


def test_config_file_with_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("theta1 = 0.2\ntheta2 = 0.5\na = 0.5\nb = 0.3\nc = 0.4\nd = 0.2\nn = 3\n")
    _, out, _ = _run(["verify-tilting", "--config", str(cfg)], capsys)
    assert json.loads(out)["N"] == 3
    _, out, _ = _run(["verify-tilting", "--config", str(cfg), "--n", "2"], capsys)
    assert json.loads(out)["N"] == 2


def test_aw_measure_and_partition(capsys):
    _, out, _ = _run(["aw-measure", "--aw", "2,0,0,0,0.4"], capsys)
    rep = json.loads(out)
    assert len(rep["atoms"]) == 1
    assert rep["total_mass"] == pytest.approx(1, abs=1e-8)
    mc = ["--theta1", "0.2", "--theta2", "0.5"]
    p = params_from_boundary(0.5, -0.1, 0.5, -0.1, 0.2, 0.5)
    for name in "abcd":
        mc += [f"--{name}", repr(getattr(p, name))]
    _, out, _ = _run(["partition", *mc, "--n", "10"], capsys)
    assert abs(json.loads(out)["relative_error"]) < 1e-8
    _, out, _ = _run(["density", *mc, "--n-list", "5,10"], capsys)
    rep = json.loads(out)
    assert rep["phase"]["phase"] == "maximal-current"


def test_scaling_check(capsys):
    code, out, _ = _run(["scaling-check", "--rates", "0.8,0.6,0.4,0.64,0.4,1", "--n", "2",
                         "--eps", "1e-2,1e-3,1e-4"], capsys)
    assert code == 0
    assert all(8 <= x <= 12 for x in json.loads(out)["ratios"])


@pytest.mark.parametrize("argv,needle", [
    (["verify-tilting", "--theta1", "0.2", "--theta2", "0.5", "--a", "0.5", "--b", "0.6", "--c", "0.4",
      "--d", "0.5", "--n", "2"], "b+d must be < 1"),
    (["stationary", *RUN], "--n or --path"),
    (["stationary", *RUN, "--path", "UXU"], "unknown edge label"),
    (["partition", *RUN, "--n", "3"], "AC"),
])
def test_errors_exit_nonzero(argv, needle, capsys):
    code, _, err = _run(argv, capsys)
    assert code == 2
    assert needle in err


def test_unknown_command(capsys):
    assert main(["nonsense"]) != 0
