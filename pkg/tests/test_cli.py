import csv
import io
import json

import pytest

from conftest import make_instance
from tsra.bikeshare import synthetic_trip_log, write_trips
from tsra.cli import SweepSpec, main
from tsra.core import dumps, loads, sparsities, validate
from tsra.policy import Greedy


def rows(text):
    return list(csv.reader(io.StringIO(text)))


@pytest.fixture
def inst_file(tmp_path):
    path = tmp_path / "inst.json"
    assert main(["gen", "--synthetic", "--shape", "2,2,4,10", "--seed", "7", "--out", str(path)]) == 0
    return path


def test_gen_is_deterministic(tmp_path, inst_file):
    again = tmp_path / "again.json"
    assert main(["gen", "--synthetic", "--shape", "2,2,4,10", "--seed", "7", "--out", str(again)]) == 0
    assert inst_file.read_bytes() == again.read_bytes()
    inst = loads(inst_file.read_text())
    assert validate(inst) == [] and sparsities(inst) == (2, 1)


def test_gen_from_trips(tmp_path, capsys):
    trips = tmp_path / "trips.csv"
    write_trips(trips, synthetic_trip_log(n_stations=60, n_days=6, trips_per_day=250, seed=3))
    out = tmp_path / "inst.json"
    argv = ["gen", "--trips", str(trips), "--gamma", "2", "--lambda", "1.5", "--beta", "1",
            "--num-sites", "12", "--top-k", "3", "--out", str(out)]
    assert main(argv) == 0
    assert sparsities(loads(out.read_text())) == (2, 1)
    assert "sparsities=(2,1)" in capsys.readouterr().err


def test_gen_malformed_csv(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("starttime,stoptime\nfoo,bar\n")
    assert main(["gen", "--trips", str(bad)]) == 2
    assert "missing columns" in capsys.readouterr().err
    rows_only_bad = tmp_path / "bad2.csv"
    rows_only_bad.write_text(
        "starttime,stoptime,start station id,start station latitude,start station longitude,"
        "end station id,end station latitude,end station longitude\n"
        "x,y,1,0,0,2,0,0\nx,y,1,0,0,2,0,0\n"
    )
    assert main(["gen", "--trips", str(rows_only_bad)]) == 2
    assert "2 rows read, 0 kept, 2 malformed" in capsys.readouterr().err


def test_gen_needs_a_source(capsys):
    assert main(["gen"]) == 2


def test_lp_json(inst_file, capsys):
    assert main(["lp", "--instance", str(inst_file)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert set(out) == {"objective", "aggregated", "x", "y"}
    assert out["objective"] > 0


def test_simulate_rows_and_determinism(inst_file, tmp_path):
    outs = []
    for n in range(2):
        out = tmp_path / f"sim{n}.csv"
        argv = ["simulate", "--instance", str(inst_file), "--policies", "samp:eta=1,alpha=1",
                "greedy:delta=0.5", "--episodes", "1000", "--seed", "1", "--out", str(out)]
        assert main(argv) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    table = rows(outs[0].decode())
    assert table[0] == ["policy", "episodes", "mean_reward", "std_error", "lp_objective", "competitive_ratio"]
    assert [r[0] for r in table[1:]] == ["samp:eta=1,alpha=1,removal=all", "greedy:delta=0.5"]


def test_simulate_degenerate_instance(tmp_path, capsys):
    path = tmp_path / "one.json"
    path.write_text(dumps(make_instance([("int", 5)], e2=[(0, 0, 1.0, {0: 1.0})])))
    assert main(["simulate", "--instance", str(path), "--policies", "samp:eta=1,alpha=1", "--episodes", "50"]) == 0
    (row,) = rows(capsys.readouterr().out)[1:]
    assert float(row[5]) == 1.0


def test_simulate_json_format(inst_file, capsys):
    argv = ["simulate", "--instance", str(inst_file), "--policies", "greedy-uniform", "--episodes", "5", "--format", "json"]
    assert main(argv) == 0
    (rec,) = json.loads(capsys.readouterr().out)
    assert rec["policy"] == "greedy-uniform" and rec["episodes"] == 5


def test_simulate_rejects_bad_inputs(tmp_path, inst_file, capsys):
    assert main(["simulate", "--instance", str(tmp_path / "missing.json")]) == 2
    assert main(["simulate", "--instance", str(inst_file), "--policies", "nope"]) == 2
    free = tmp_path / "free.json"
    free.write_text(dumps(make_instance([("int", 1)], e1=[(0, 0, 1.0, {})])))
    assert main(["simulate", "--instance", str(free), "--policies", "greedy:delta=1"]) == 2


POLICIES6 = ["samp:eta=1,alpha=1", "samp:eta=0.8,alpha=1", "greedy:delta=0.2", "greedy:delta=0.6",
             "greedy:delta=1", "greedy-uniform"]


def test_sweep_lambda_rows(capsys):
    argv = ["sweep", "--synthetic", "--shape", "2,2,4,20", "--parameter", "lambda",
            "--values", "1.5,2,2.5,3", "--episodes", "20", "--policies", *POLICIES6]
    assert main(argv) == 0
    table = rows(capsys.readouterr().out)
    assert table[0][0] == "parameter_value"
    assert len(table) == 1 + 24
    assert [r[0] for r in table[1::6]] == ["1.5", "2.0", "2.5", "3.0"]


def test_single_value_sweep_matches_simulate(tmp_path, capsys):
    inst = tmp_path / "inst.json"
    assert main(["gen", "--synthetic", "--shape", "2,2,4,20", "--lambda", "2", "--seed", "3", "--out", str(inst)]) == 0
    capsys.readouterr()
    pols = ["samp:eta=1,alpha=1", "greedy:delta=0.4"]
    assert main(["simulate", "--instance", str(inst), "--episodes", "30", "--seed", "3", "--policies", *pols]) == 0
    sim = rows(capsys.readouterr().out)
    argv = ["sweep", "--synthetic", "--shape", "2,2,4,20", "--parameter", "lambda", "--values", "2",
            "--episodes", "30", "--seed", "3", "--policies", *pols]
    assert main(argv) == 0
    sweep = rows(capsys.readouterr().out)
    assert [r[1:] for r in sweep] == sim


def test_sweep_reports_failed_points(capsys):
    argv = ["sweep", "--synthetic", "--shape", "1,1,1,5", "--parameter", "gamma", "--values", "0.0001,2",
            "--episodes", "5", "--policies", "greedy:delta=1"]
    assert main(argv) == 2
    captured = capsys.readouterr()
    assert len(rows(captured.out)) == 2
    assert "gamma=0.0001 failed" in captured.err


def test_sweep_spec_validation():
    with pytest.raises(ValueError):
        SweepSpec("lambda", (2.0, 1.5), (Greedy(1.0),), 10, 0)
    with pytest.raises(ValueError):
        SweepSpec("rho", (1.0,), (Greedy(1.0),), 10, 0)
    with pytest.raises(ValueError):
        SweepSpec("beta", (), (Greedy(1.0),), 10, 0)
    with pytest.raises(ValueError):
        SweepSpec("beta", (1.0,), (Greedy(1.0),), 0, 0)


def test_oracle_command(tmp_path, capsys):
    path = tmp_path / "ex.json"
    path.write_text(dumps(make_instance([("int", 1)], e1=[(0, 0, 2.0, {0: 1.0})], e2=[(0, 0, 1.0, {0: 1.0})])))
    assert main(["oracle", "--instance", str(path), "--format", "json"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out == {"lp_objective": 2.0, "offline_opt": 2.0, "lp_upper_bound_holds": True}


def test_oracle_too_large(inst_file):
    assert main(["oracle", "--instance", str(inst_file), "--max-enumeration", "100"]) == 2
