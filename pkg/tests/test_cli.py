import csv
import io
import json
import subprocess
import sys

import pytest

from arity_lab import cli
from arity_lab.reproduce import REGISTRY, TOPICS


def run(argv, capsys):
    code = cli.run(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_unknown_flag_exits_2_with_usage(capsys):
    with pytest.raises(SystemExit) as info:
        cli.run(["setsys", "--l", "2", "--frobnicate"])
    assert info.value.code == 2
    assert "usage" in capsys.readouterr().err


def test_missing_structure_file(capsys, tmp_path):
    code, out, err = run(["arity", "--structure", str(tmp_path / "missing.json"), "--l", "3"], capsys)
    assert code == 2 and "not found" in err
    assert json.loads(out)["verdict"] == "input_error"


def test_gen_search_verify_pipeline(capsys, tmp_path):
    s = tmp_path / "j.json"
    w = tmp_path / "w.json"
    code, out, _ = run(["gen", "johnson", "--n", "4", "--k", "2", "-o", str(s)], capsys)
    assert code == 0
    data = json.loads(s.read_text())
    assert data["universe"] == 6 and {e["name"] for e in data["signature"]} >= {"E_2_1", "E_3_0"}
    code, out, _ = run(["arity", "--structure", str(s), "--l", "3", "--mode", "drop-one", "-o", str(w)], capsys)
    assert code == 0
    report = json.loads(w.read_text())
    assert report["result"]["status"] == "witness"
    assert report["result"]["verification"]["passed"]
    code, out, _ = run(["arity", "--structure", str(s), "--verify", str(w)], capsys)
    assert code == 0 and json.loads(out)["verdict"] == "verified"
    other = tmp_path / "j5.json"
    run(["gen", "johnson", "--n", "5", "--k", "2", "-o", str(other)], capsys)
    code, out, err = run(["arity", "--structure", str(other), "--verify", str(w)], capsys)
    assert code == 2 and "witness was built for structure" in err


def test_arity_exit_codes(capsys):
    code, out, _ = run(["arity", "--family", "johnson", "--n", "9", "--k", "3", "--l", "4", "--exhaustive"], capsys)
    assert code == 3 and json.loads(out)["result"]["status"] == "exhausted_no_witness"
    code, out, _ = run(["arity", "--family", "johnson", "--n", "9", "--k", "3", "--l", "4", "--budget", "5"], capsys)
    assert code == 4
    code, _, _ = run(["arity", "--family", "johnson", "--n", "9", "--l", "4"], capsys)
    assert code == 2


def test_seed_echo_and_env_override(capsys, monkeypatch):
    monkeypatch.setenv(cli.SEED_ENV, "77")
    _, out, _ = run(["distal", "parity", "--k", "2", "--n", "6"], capsys)
    assert json.loads(out)["config"]["seed"] == 77
    _, out, _ = run(["distal", "parity", "--k", "2", "--n", "6", "--seed", "5"], capsys)
    assert json.loads(out)["config"]["seed"] == 5
    monkeypatch.setenv(cli.SEED_ENV, "not-a-number")
    code, _, err = run(["setsys", "--l", "2"], capsys)
    assert code == 2 and cli.SEED_ENV in err
    monkeypatch.delenv(cli.SEED_ENV)
    _, out, _ = run(["setsys", "--l", "2"], capsys)
    assert json.loads(out)["config"]["seed"] == cli.DEFAULT_SEED


def test_reports_are_byte_stable(capsys):
    _, a, _ = run(["distal", "parity", "--k", "3", "--n", "9", "--samples", "500", "--seed", "3"], capsys)
    _, b, _ = run(["distal", "parity", "--k", "3", "--n", "9", "--samples", "500", "--seed", "3"], capsys)
    assert a == b
    assert "time" not in json.loads(a)["result"]


def test_formats(capsys):
    _, out, _ = run(["setsys", "--l", "3", "--format", "csv"], capsys)
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["field", "value"]
    assert ["result.pair.k", "2"] in rows
    _, out, _ = run(["setsys", "--l", "3", "--format", "text"], capsys)
    assert out.startswith("arity-lab setsys: verified (exit 0)")
    assert "pair.k: 2" in out


def test_setsys_output(capsys, tmp_path):
    out_file = tmp_path / "pair.json"
    code, _, _ = run(["setsys", "--l", "4", "-o", str(out_file)], capsys)
    report = json.loads(out_file.read_text())
    assert code == 0 and report["result"]["pair"]["k"] == 7
    assert report["result"]["verification"]["full_intersections"] == [1, 0]


def test_cherlin_lachlan_orbit_csv(capsys, tmp_path):
    orbits = tmp_path / "orbits.csv"
    code, out, _ = run(["gen", "cherlin-lachlan", "--n", "6", "--max-arity", "2", "--orbits-csv", str(orbits)],
                       capsys)
    assert code == 0 and json.loads(out)["result"]["orbits"] == 9
    rows = list(csv.reader(orbits.open()))
    assert rows[0] == ["code", "arity", "representative"] and len(rows) == 10


def test_goode(capsys, tmp_path):
    code, out, _ = run(["goode", "--n", "1", "--labels", "2", "--depth", "2", "--radius", "1", "--tables"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["result"]["phi_b"] and not rep["result"]["phi_b_prime"]
    assert all("table" in e for e in rep["result"]["agreement"]["per_drop"])
    code, out, err = run(["goode", "--n", "2", "--labels", "3", "--depth", "3", "--radius", "2"], capsys)
    assert code == 4 and "resource" in err
    code, _, _ = run(["goode", "--n", "1", "--depth", "2", "--radius", "5"], capsys)
    assert code == 2
    code, _, _ = run(["goode", "--n", "2", "--depth", "2,3,4"], capsys)
    assert code == 2


def test_johnson_extend(capsys, tmp_path):
    good = tmp_path / "iso.json"
    good.write_text(json.dumps({"S": [[0, 1, 2], [0, 3, 4]], "T": [[5, 6, 7], [5, 8, 9]], "alpha": [0, 1]}))
    code, out, _ = run(["johnson-extend", "--n", "20", "--k", "3", "--instance", str(good)], capsys)
    rep = json.loads(out)["result"]
    assert code == 0 and rep["injective"] and rep["sigma"]["0"] == 5
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"S": [[0, 1, 2], [0, 3, 4]], "T": [[5, 6, 7], [1, 8, 9]], "alpha": [0, 1]}))
    code, out, _ = run(["johnson-extend", "--n", "20", "--k", "3", "--instance", str(bad)], capsys)
    assert code == 2 and json.loads(out)["verdict"] == "not_an_isomorphism"


def test_distal_subcommands(capsys):
    code, out, _ = run(["distal", "witness", "--k", "3"], capsys)
    assert code == 0 and json.loads(out)["result"]["ok"]
    code, out, _ = run(["distal", "strong-check", "--k", "2", "--instances", "100"], capsys)
    assert code == 0 and json.loads(out)["result"]["theorem_violations"] == 0
    code, _, _ = run(["distal", "parity", "--k", "3", "--n", "4"], capsys)
    assert code == 2


def test_registry_completeness():
    covered = {item.topic for item in REGISTRY.values()}
    assert covered == set(TOPICS)
    for name in ("johnson_triples", "setsys_l4", "goode_n2"):
        assert name in REGISTRY


def test_reproduce_items(capsys):
    code, out, _ = run(["reproduce", "johnson_triples", "setsys_l4"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["result"]["summary"] == {"items": 2, "passed": 2, "failed": []}
    code, _, _ = run(["reproduce", "no_such_item"], capsys)
    assert code == 2
    code, _, _ = run(["reproduce"], capsys)
    assert code == 2
    code, out, _ = run(["reproduce", "--list"], capsys)
    assert set(json.loads(out)["result"]["items"]) == set(REGISTRY)


def test_reproduce_parallel_matches_serial(capsys):
    names = ["johnson_triples", "setsys_l3", "kaygraph_reduct"]
    _, serial, _ = run(["reproduce", *names], capsys)
    _, parallel, _ = run(["reproduce", *names, "--jobs", "2"], capsys)
    a, b = json.loads(serial), json.loads(parallel)
    assert a["result"] == b["result"]


def test_reproduce_time_budget(capsys):
    code, out, _ = run(["reproduce", "goode_n2", "setsys_l2", "--time-budget", "0.001"], capsys)
    rep = json.loads(out)["result"]
    assert code == 4
    assert rep["items"][0]["passed"] and rep["items"][1]["error"] == "resource"


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "arity_lab.cli", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "arity-lab" in proc.stdout
