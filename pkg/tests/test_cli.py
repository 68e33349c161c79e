import json
import random

import pytest

from mergelab.cli import main, parse_run_lengths, UsageError


def run(capsys, *argv, stdin=None, monkeypatch=None):
    if stdin is not None:
        import io
        import sys
        monkeypatch.setattr(sys, "stdin", io.StringIO(stdin))
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_simulate_file(tmp_path, capsys):
    f = tmp_path / "runs.txt"
    f.write_text("# three runs\n3 1\n8\n")
    code, out, _ = run(capsys, "simulate", str(f), "--policy", "shivers")
    assert code == 0
    assert "total_cost: 21" in out and "m: 3" in out and "n: 12" in out
    assert "normalized_cost: 1.104127" in out


def test_simulate_single_run(capsys):
    code, out, _ = run(capsys, "simulate", "--runs", "5", "--policy", "timsort")
    assert code == 0 and "total_cost: 0" in out


def test_simulate_parse_error_names_line(tmp_path, capsys):
    f = tmp_path / "bad.txt"
    f.write_text("3\n0 4\n")
    code, _, err = run(capsys, "simulate", str(f))
    assert code == 1 and ":2:" in err and ">= 1" in err
    f.write_text("3 x\n")
    code, _, err = run(capsys, "simulate", str(f))
    assert code == 1 and ":1:" in err


def test_simulate_events_and_instrument(capsys):
    code, out, _ = run(capsys, "simulate", "--runs", "3", "1", "8", "--policy", "shivers",
                       "--events", "--instrument", "shivers-weights")
    assert code == 0
    assert "3 YZ 1 8" in out and "3 YZ 3 9" in out
    assert "check shivers-weights: ok" in out


def test_simulate_violation_exit_code(capsys, monkeypatch):
    from mergelab.errors import InstrumentationViolation
    import mergelab.engine as engine

    def broken(*a, **k):
        raise InstrumentationViolation("alpha-counter", 3, "forced")

    monkeypatch.setattr(engine, "simulate", broken)
    code, _, err = run(capsys, "simulate", "--runs", "1", "2")
    assert code == 2 and "invariant" in err


def test_simulate_overflow_exit_code(capsys):
    code, _, err = run(capsys, "simulate", "--runs", str(2**63), str(2**63))
    assert code == 1


def test_adversary_outputs(capsys):
    assert run(capsys, "adversary", "rtim", "6")[:2] == (0, "3 2 1\n")
    assert run(capsys, "adversary", "rshivers", "4")[:2] == (0, "7 3 1 16\n")
    assert run(capsys, "adversary", "ramerge", "9", "--alpha", "2")[:2] == (0, "3 2 4\n")


def test_adversary_verify(capsys):
    code, out, err = run(capsys, "adversary", "rastack", "5", "--alpha", "2", "--verify")
    assert code == 0 and "PASS" in err
    code, _, err = run(capsys, "adversary", "rshivers", "99")
    assert code == 1
    code, _, err = run(capsys, "adversary", "rfoo", "3")
    assert code == 1


def test_bounds_table(capsys):
    code, out, _ = run(capsys, "bounds", "2", "1.7", "1.5")
    assert code == 0
    lines = out.splitlines()
    assert "1.08897369" in lines[1] and "1.911026" in lines[1]
    assert lines[2].split()[:4] == ["1.7", "1.05157331", "3", "220.428571"]
    assert "undefined" in lines[3]
    assert run(capsys, "bounds", "2.5")[0] == 1
    assert run(capsys, "bounds", "x")[0] == 1


def test_sort_file(tmp_path, capsys):
    f = tmp_path / "in.txt"
    out_f = tmp_path / "out.txt"
    f.write_text("5\n")
    code, out, _ = run(capsys, "sort", str(f), "--out", str(out_f))
    assert code == 0 and out_f.read_text() == "5\n" and "total_cost: 0" in out
    f.write_text("\n".join(map(str, range(100, 0, -1))) + "\n")
    code, out, _ = run(capsys, "sort", str(f), "--out", str(out_f))
    assert "total_cost: 0" in out and "m: 1" in out
    rng = random.Random(0)
    values = [rng.randrange(-2**63, 2**63) for _ in range(10**5)]
    f.write_text("\n".join(map(str, values)) + "\n")
    code, _, _ = run(capsys, "sort", str(f), "--out", str(out_f), "--policy", "two-merge")
    assert code == 0
    assert [int(v) for v in out_f.read_text().split()] == sorted(values)


def test_sort_parse_error(tmp_path, capsys):
    f = tmp_path / "in.txt"
    f.write_text("1\n2\nthree\n")
    code, _, err = run(capsys, "sort", str(f))
    assert code == 1 and ":3:" in err
    f.write_text(f"{2**64}\n")
    assert run(capsys, "sort", str(f))[0] == 1


def test_experiment_csv_and_determinism(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["experiment", "--policy", "two-merge", "--m-grid", "1000", "--trials", "5",
            "--seed", "42"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b), "--jobs", "2"]) == 0
    assert a.read_bytes() == b.read_bytes()
    lines = [ln for ln in a.read_text().splitlines() if not ln.startswith("#")]
    assert lines[0] == "m,policy,alpha,trials,mean_normalized_cost,stddev,seed"
    assert lines[1].startswith("1000,two-merge,,5,") and lines[1].endswith(",42")


def test_experiment_seed_env(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("MERGELAB_SEED", "42")
    args = ["experiment", "--policy", "shivers", "--m-grid", "50,60", "--trials", "2"]
    code, out, _ = run(capsys, *args)
    assert code == 0 and out.strip().endswith(",42")
    code, out2, _ = run(capsys, *args, "--seed", "42")
    assert out == out2


def test_experiment_config_file(tmp_path, capsys):
    cfg = tmp_path / "spec.json"
    cfg.write_text(json.dumps({"policies": ["alpha-stack:2"], "distribution": "mixture",
                               "m_grid": "100:300:100", "trials": 2, "seed": 1}))
    code, out, _ = run(capsys, "experiment", "--config", str(cfg))
    assert code == 0
    assert "# distribution: mixture:0.95:1:100:10000:100000" in out
    assert [ln.split(",")[0] for ln in out.splitlines() if ln[0].isdigit()] == ["100", "200", "300"]
    cfg.write_text("{\n  bad json")
    code, _, err = run(capsys, "experiment", "--config", str(cfg))
    assert code == 1 and ":2:" in err


def test_experiment_errors(tmp_path, capsys):
    assert run(capsys, "experiment", "--out", str(tmp_path / "no" / "x.csv"))[0] == 1
    assert run(capsys, "experiment", "--dist", "gauss", "--trials", "1")[0] == 1
    assert run(capsys, "experiment", "--policy", "alpha-merge:1.5")[0] == 1
    assert run(capsys, "experiment", "--trials", "0")[0] == 1


def test_usage_errors(capsys):
    assert run(capsys)[0] == 1
    assert run(capsys, "frobnicate")[0] == 1
    assert run(capsys, "simulate", "--runs", "1", "--policy", "nope")[0] == 1
    assert run(capsys, "--help")[0] == 0


def test_parse_run_lengths():
    assert parse_run_lengths("1 2\n# c\n3 # tail\n") == [1, 2, 3]
    with pytest.raises(UsageError):
        parse_run_lengths("# only comments\n")
