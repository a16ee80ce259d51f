import csv
import io
import json

import numpy as np
import pytest

from lindblad_lab import cli, serialize
from lindblad_lab.casimir import sl2_matrices
from lindblad_lab.fermion import FermionSystem, build_fermi_generator


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_g0_table_markdown(capsys):
    code, out, _ = run(capsys, "g0-table")
    assert code == 0
    rows = {line.split("|")[1].strip(): line.split("|")[2].strip() for line in out.splitlines()[2:]}
    assert rows["B5"] == "5/9" and rows["F4"] == "2/3" and rows["G2"] == "1/2" and rows["E7"] == "1"


def test_g0_table_csv_parses(capsys):
    code, out, _ = run(capsys, "g0-table", "--format", "csv", "--max-rank", "4")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0
    assert {r["type"]: r["g0"] for r in rows}["C4"] == "4/5"
    assert {r["type"]: r["minimizer"] for r in rows}["A2"] == "1,1"


def test_casimir_scalar(capsys):
    code, out, _ = run(capsys, "casimir", "--type", "F4", "--mu", "0,0,0,1")
    assert code == 0
    assert json.loads(out)["results"]["casimir_scalar"] == "2/3"


def test_casimir_reports(capsys):
    code, out, _ = run(capsys, "casimir", "--algebra", "sl2", "--n", "4",
                       "--report", "spectrum,gap,norm-bound,gamma", "--samples", "20")
    data = json.loads(out)
    assert code == 0 and data["passed"]
    assert [e["multiplicity"] for e in data["results"]["spectrum"]] == [1, 3, 5, 7]
    assert data["results"]["gap"]["gap"] == pytest.approx(1.0)
    assert data["tolerances"]["value"] == 1e-8


def test_casimir_rep_file(tmp_path, capsys):
    path = tmp_path / "rep.json"
    path.write_text(serialize.dumps({"matrices": [serialize.operator_to_json(m) for m in sl2_matrices(3)],
                                     "type": "A1", "highest_weight": [2]}))
    code, out, _ = run(capsys, "casimir", "--rep-file", str(path))
    assert code == 0
    assert json.loads(out)["results"]["prediction"]["matches"]


def test_casimir_bad_report_is_usage_error(capsys):
    code, _, err = run(capsys, "casimir", "--algebra", "sl2", "--n", "3", "--report", "bogus")
    assert code == 2 and "bogus" in err


def test_fermion_report(capsys):
    code, out, _ = run(capsys, "fermion", "--N", "3", "--beta", "1", "--omegas", "1,1,1", "--t", "2")
    data = json.loads(out)
    assert code == 0
    res = data["results"]
    assert set(res) >= {"eigenvalues", "gap", "bound", "mixing_time", "sampled_max_4dtr2"}
    assert res["sampled_max_4dtr2"] <= res["bound"]
    assert sum(e["multiplicity"] for e in res["eigenvalues"]) == 64
    assert data["version"] and data["inputs"]["omegas"] == [1.0, 1.0, 1.0]


def test_boson_check_eigen_csv(capsys):
    code, out, _ = run(capsys, "boson", "--beta", "1", "--omegas", "1", "--check-eigen", "--max-degree", "4")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0
    assert len(rows) == 15
    assert max(float(r["residual"]) for r in rows) < 1e-10


def test_boson_bound_json(capsys):
    code, out, _ = run(capsys, "boson", "--bound", "--K", "4", "--t", "3")
    res = json.loads(out)["results"]
    assert code == 0
    assert res["A"] == pytest.approx(96.0)


def test_divergence(capsys):
    code, out, _ = run(capsys, "divergence", "--dims", "2,3", "--pairs", "30")
    assert code == 0
    assert all(d["violations"] == 0 for d in json.loads(out)["results"]["per_dim"])


def test_lindblad_spectrum(tmp_path, capsys):
    sys = FermionSystem(1, 1.0, (1.0,))
    gen, sig = tmp_path / "g.json", tmp_path / "s.json"
    gen.write_text(serialize.dumps(serialize.spec_to_json(build_fermi_generator(sys))))
    sig.write_text(serialize.dumps(serialize.operator_to_json(sys.gibbs_state().op)))
    code, out, _ = run(capsys, "lindblad-spectrum", "--generator", str(gen), "--sigma", str(sig))
    data = json.loads(out)
    assert code == 0
    assert data["results"]["gap"] == pytest.approx(2 * np.cosh(0.5))
    # wrong reference state: detailed balance fails, numerical exit status
    code, _, _ = run(capsys, "lindblad-spectrum", "--generator", str(gen))
    assert code == 1


def test_missing_file_is_usage_error(capsys):
    code, _, err = run(capsys, "lindblad-spectrum", "--generator", "/nonexistent.json")
    assert code == 2 and "cannot read" in err


def test_usage_errors(capsys):
    assert run(capsys, "nonsense")[0] == 2
    assert run(capsys, "fermion", "--N", "2", "--beta", "1", "--omegas", "1,2,3")[0] == 2
    assert run(capsys, "casimir", "--type", "F4")[0] == 2
    assert run(capsys, "g0-table", "--max-rank", "1")[0] == 2
    assert run(capsys, "fermion", "--N", "1", "--beta", "1", "--omegas", "x")[0] == 2
    assert run(capsys, "casimir", "--type", "F4", "--mu", "1,0", "--format", "json")[0] == 2


def test_verify_is_byte_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert cli.main(["verify", "--suite", "core", "--seed", "7", "-o", str(a)]) == 0
    assert cli.main(["verify", "--suite", "core", "--seed", "7", "-o", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    data = json.loads(a.read_text())
    assert data["passed"] and len(data["results"]["checks"]) == 16
    assert data["tolerances"]["detailed-balance"] == 1e-10


def test_verify_thread_count_does_not_change_output(tmp_path, monkeypatch):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    monkeypatch.setenv("LINDBLAD_LAB_THREADS", "1")
    cli.main(["verify", "--seed", "3", "-o", str(a)])
    monkeypatch.setenv("LINDBLAD_LAB_THREADS", "4")
    cli.main(["verify", "--seed", "3", "-o", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_bad_thread_env(monkeypatch, capsys):
    monkeypatch.setenv("LINDBLAD_LAB_THREADS", "many")
    assert run(capsys, "verify")[0] == 2


def test_strict_halves_tolerances(capsys):
    code, out, _ = run(capsys, "verify", "--strict")
    data = json.loads(out)
    assert code == 0
    assert data["tolerances"]["detailed-balance"] == 5e-11


def test_timing_only_on_request(capsys):
    _, out, _ = run(capsys, "g0-table", "--format", "json", "--max-rank", "3")
    assert "timing" not in json.loads(out)["results"]
    _, out, _ = run(capsys, "g0-table", "--format", "json", "--max-rank", "3", "--timing")
    assert json.loads(out)["results"]["timing"]["total_seconds"] >= 0


def _curve(out):
    lines = [l for l in out.splitlines() if not l.startswith("#")]
    return lines[0], [[float(x) for x in l.split(",")] for l in lines[1:]]


@pytest.mark.parametrize("system", ["fermion", "casimir"])
def test_decay_curve(system, capsys):
    code, out, _ = run(capsys, "decay-curve", "--system", system, "--times", "0:5:1", "--samples", "40")
    header, rows = _curve(out)
    assert code == 0
    assert header == "t,bound,sampled_sup_dtr"
    assert [r[0] for r in rows] == [0, 1, 2, 3, 4, 5]
    bounds = [r[1] for r in rows]
    assert all(b2 <= b1 for b1, b2 in zip(bounds, bounds[1:]))
    assert all(r[2] <= r[1] + 1e-9 for r in rows)
    assert rows[0][1] >= rows[0][2]


def test_decay_curve_boson_has_caveat(capsys):
    code, out, _ = run(capsys, "decay-curve", "--system", "boson", "--times", "0,2,4", "--samples", "10",
                       "--cutoff", "25")
    assert code == 0
    assert out.startswith("# truncation caveat")
    _, rows = _curve(out)
    assert all(r[2] <= r[1] for r in rows)
    code, out, _ = run(capsys, "decay-curve", "--system", "boson", "--times", "0,2", "--samples", "5",
                       "--cutoff", "25", "--format", "json")
    assert "caveat" in json.loads(out)["results"]


def test_decay_curve_rejects_large_boson_space(capsys):
    assert run(capsys, "decay-curve", "--system", "boson", "--N", "2", "--cutoff", "30")[0] == 2


def test_time_ranges():
    assert cli._times("0:1:0.25") == (0.0, 0.25, 0.5, 0.75, 1.0)
    assert cli._times("0,2") == (0.0, 2.0)
