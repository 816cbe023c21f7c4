import csv
import io
import subprocess
import sys

import pytest

from mbl import cli
from mbl.families import build_threshold_family, dump_family


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def read_csv(text):
    lines = text.splitlines()
    assert lines[0] == "# mbl-csv v1"
    return list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))


def test_run_threshold_summary(capsys):
    code, out, err = run(["run", "--F", "8", "--seed", "7"], capsys)
    assert code == 0
    rows = read_csv(out)
    assert len(rows) == 3 and all(r["mistake"] == "1" for r in rows)
    assert "mistakes=3" in err and "cap=3" in err


def test_run_insertion_on_s4(capsys):
    code, out, err = run(["run", "--family", "permutation", "--n", "4", "--model", "order", "--r", "2",
                          "--adversary", "insertion", "--seed", "1"], capsys)
    assert code == 0
    assert int(err.split("mistakes=")[1].split()[0]) >= 4


def test_run_repetitions_write_every_run(capsys, tmp_path):
    out = tmp_path / "t.csv"
    code, stdout, _ = run(["run", "--F", "8", "--seed", "3", "--repetitions", "5", "--out", str(out)], capsys)
    assert code == 0
    rows = read_csv(out.read_text())
    assert {r["repetition"] for r in rows} == {"0", "1", "2", "3", "4"}
    assert len(stdout.strip().splitlines()) == 5


def test_config_file_and_flag_override(capsys, tmp_path):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("# experiment\nmodel = cart_weak\nF = 16\nr = 2\nseed = 4\nadversary.min_survivors = 2\n")
    code, _, err = run(["run", "--config", str(cfg), "--r", "1"], capsys)
    assert code == 0
    assert "cart_weak_log=4" in err


def test_run_with_learner_parameter(capsys):
    code, _, err = run(["run", "--F", "8", "--model", "amb", "--r", "2", "--learner", "expert-pool",
                        "--adversary", "amb-median", "--set", "learner.base=eliminate-one", "--seed", "1"], capsys)
    assert code == 0


def test_run_from_family_file(capsys, tmp_path):
    path = tmp_path / "fam.txt"
    path.write_text(dump_family(build_threshold_family(6, [1, 3, 5, 7])))
    code, _, err = run(["run", "--family", "file", "--path", str(path), "--seed", "0"], capsys)
    assert code == 0 and "lower=" in err


@pytest.mark.parametrize("argv, key", [
    (["run", "--F", "8"], "seed"),
    (["run", "--F", "8", "--seed", "1", "--learner", "nope"], "learner"),
    (["run", "--F", "8", "--seed", "1", "--set", "bogus=1"], "bogus"),
    (["run", "--seed", "1"], "F"),
    (["run", "--F", "8", "--seed", "1", "--r", "x"], "r"),
])
def test_config_errors_name_the_key(capsys, argv, key):
    code, _, err = run(argv, capsys)
    assert code == 2
    assert f"config error: {key}" in err


def test_sweep_rows_in_grid_order(capsys):
    code, out, _ = run(["sweep", "--grid", "F=4,8,16,32", "--grid", "r=1,2", "--seed", "3"], capsys)
    assert code == 0
    rows = read_csv(out)
    assert [(r["F"], r["r"]) for r in rows] == [(F, r) for F in ("4", "8", "16", "32") for r in ("1", "2")]
    assert all(int(r["mistakes"]) <= int(r["cap"]) for r in rows)
    assert all(int(r["mistakes"]) >= int(r["lower"]) for r in rows)


def test_sweep_parallel_matches_serial(capsys):
    argv = ["sweep", "--grid", "F=4,8", "--grid", "r=1,2,3", "--adversary", "random", "--seed", "5"]
    _, serial, _ = run(argv, capsys)
    _, parallel, _ = run(argv + ["--jobs", "2"], capsys)
    assert serial == parallel


def test_sweep_empty_grid_has_header(capsys):
    code, out, _ = run(["sweep", "--grid", "F=", "--seed", "1"], capsys)
    assert code == 0
    assert out.splitlines()[1].startswith("model,r,family")
    assert len(out.splitlines()) == 2


def test_sweep_cap(capsys):
    code, _, err = run(["sweep", "--grid", "F=4,8,16", "--seed", "1", "--cap", "2"], capsys)
    assert code == 3


def test_solve(capsys):
    code, out, _ = run(["solve", "--family", "linear", "--p", "3", "--n", "2", "--model", "standard"], capsys)
    assert code == 0 and out.strip() == "2"
    code, out, _ = run(["solve", "--F", "4", "--tree"], capsys)
    assert out.splitlines()[0] == "2" and len(out.splitlines()) > 2
    code, _, _ = run(["solve", "--F", "40"], capsys)
    assert code == 3


@pytest.mark.parametrize("argv", [
    ["verify", "pn", "--max", "100000"],
    ["verify", "uniformity", "--p", "3", "--n", "2", "--draws", "3"],
    ["verify", "conditional", "--p", "5", "--n", "2", "--r", "2", "--draws", "3"],
    ["verify", "buckets", "--p", "5", "--n", "3"],
    ["verify", "ceil"],
    ["verify", "bounds", "--F", "16", "--k", "3"],
])
def test_verify_targets_pass(capsys, argv):
    code, out, _ = run(argv, capsys)
    assert code == 0
    assert out.startswith("PASS")


def test_verify_bounds_flags_negative_pool_value(capsys, tmp_path):
    out = tmp_path / "v.csv"
    code, text, _ = run(["verify", "bounds", "--F", "16", "--out", str(out)], capsys)
    assert code == 1
    assert "FAIL expert_pool" in text
    assert read_csv(out.read_text())[0]["target"] == "bounds"


def test_bounds_order_row(capsys):
    code, out, _ = run(["bounds", "--F", "6", "--r", "2", "--model", "order"], capsys)
    rows = read_csv(out)
    assert code == 0
    assert rows[0]["name"] == "order_log" and rows[0]["cap"] == "2"


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "mbl", "bounds", "--F", "4"], capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.startswith("# mbl-csv v1")
