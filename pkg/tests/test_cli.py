import json
import subprocess
import sys

import pytest

from polyaproc.cli import run


def call(capsys, *argv):
    code = run(list(argv))
    return code, capsys.readouterr().out


def doc(capsys, *argv):
    code, out = call(capsys, *argv)
    return code, json.loads(out)


def test_analyze_json_envelope(capsys):
    code, d = doc(capsys, "analyze", "triangular")
    assert code == 0 and d["schema_version"] == 1
    m = d["manifest"]
    assert m["subcommand"] == "analyze" and m["arithmetic_mode"] == "exact" and m["tool_version"]
    sp = d["result"]["spectral"]
    assert sp["eigenvalues"] == ["1", "3/4"] and sp["jordan_forms"][0] == ["1", "1"]


def test_fixture_parameters_and_manifest(capsys):
    code, d = doc(capsys, "classify", "cyclic", "--s", "7")
    assert code == 0 and d["manifest"]["fixture_parameters"] == {"s": "7"}
    assert d["result"]["classification"]["size_class"] == "Large"


def test_csv_has_manifest_line(capsys):
    code, out = call(capsys, "moment", "triangular", "--alpha", "0,1", "--n", "1,2", "--format", "csv")
    lines = out.splitlines()
    assert code == 0 and lines[0].startswith("# manifest: ")
    assert json.loads(lines[0][len("# manifest: "):])["subcommand"] == "moment"
    assert lines[1] == "n,value,value_re,value_im" and lines[2].startswith("1,1,")


def test_pin_basis_round_trip(capsys, tmp_path):
    out = tmp_path / "a.json"
    assert run(["analyze", "jordan-3d", "--out", str(out)]) == 0
    first = json.loads(out.read_text())["result"]["spectral"]
    code, d = doc(capsys, "analyze", "jordan-3d", "--pin-basis", str(out))
    assert code == 0
    assert d["result"]["spectral"]["jordan_forms"] == first["jordan_forms"]
    assert d["result"]["spectral"]["eps"] == first["eps"]


def test_pin_form_flag(capsys):
    code, d = doc(capsys, "reduce", "conjugate-general", "--alpha", "0,2", "--pin-form", "2:1/4,-1/5")
    assert code == 0 and d["result"]["reduced_polynomial"]["text"] == "u2^2 + 11/400·u2 + 121/800·u1"


def test_spec_file_source(capsys, tmp_path):
    path = tmp_path / "urn.json"
    path.write_text(json.dumps({"replacement_matrix": [[4, 0], [1, 3]], "initial": [4, 4]}))
    code, d = doc(capsys, "reduce", str(path), "--alpha", "0,2")
    assert code == 0 and d["result"]["reduced_polynomial"]["text"] == "u2^2 + 3/4·u2"


def test_cone_and_a_alpha(capsys):
    code, d = doc(capsys, "cone", "jordan-3d", "--test", "1,1,-1", "--test=-1,0,0", "--a-alpha", "0,0,2")
    assert code == 0
    assert [t["in_sigma"] for t in d["result"]["tests"]] == [True, False]
    assert all(t["in_sigma"] == t["by_generators"] for t in d["result"]["tests"])
    assert d["result"]["a_alpha"]["points"] == [[0, 0, 2], [0, 1, 1], [0, 2, 0]]


def test_asymptotics(capsys):
    code, d = doc(capsys, "asymptotics", "jordan-3d", "--alpha", "0,0,2", "--alpha", "0,2,0")
    terms = d["result"]["terms"]
    assert code == 0 and terms[0]["asymptotic"]["log_power"] == 2
    assert terms[0]["limit_w_moment"] is None and terms[1]["limit_w_moment"] is not None


def test_simulate_deterministic_across_workers(capsys):
    args = ["simulate", "triangular", "--n", "200", "--trials", "64", "--seed", "4", "--estimate", "w:2"]
    outs = [call(capsys, *args, "--workers", str(w))[1] for w in (1, 2, 8)]
    assert outs[0] == outs[1] == outs[2]
    assert "workers" not in json.loads(outs[0])["manifest"]["parameters"]


def test_verify_passes(capsys):
    code, d = doc(capsys, "verify", "triangular", "--degree", "2")
    assert code == 0 and d["result"]["all_passed"]


@pytest.mark.parametrize("argv, code, kind", [
    (["analyze", "no-such-fixture"], 2, "UnknownFixture"),
    (["analyze", "triangular", "--bogus", "1"], 2, "SpecError"),
    (["moment", "triangular", "--alpha", "1,2,3", "--n", "2"], 2, "SpecError"),
    (["simulate", "two-three-tree", "--n", "10", "--trials", "2", "--seed", "0", "--estimate", "w:2"], 2,
     "SmallProcess"),
    (["simulate", "triangular", "--n", str(2 ** 53), "--trials", "1", "--seed", "0"], 4, "ScaleOverflow"),
])
def test_error_exit_codes(capsys, argv, code, kind):
    got, out = call(capsys, *argv)
    assert got == code
    assert json.loads(out)["error"] == kind


def test_invalid_spec_file_exit_code(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"replacement_matrix": [[1, 0], [0, 2]], "initial": [1, 1], "balance": 1}))
    code, out = call(capsys, "analyze", str(path))
    assert code == 2


def test_numeric_ambiguity_exit_code(capsys, tmp_path):
    path = tmp_path / "close.json"
    R = [[1.0, 0.0, 0.0], [0.5, 0.5, 0.0], [0.0, 0.4999, 0.5001]]
    path.write_text(json.dumps({"replacement_matrix": R, "initial": [1.0, 1.0, 1.0]}))
    code, out = call(capsys, "analyze", str(path))
    assert code == 3 and json.loads(out)["error"] == "ClusterAmbiguity"


def test_argparse_errors_exit_two():
    with pytest.raises(SystemExit) as exc:
        run(["moment", "triangular"])
    assert exc.value.code == 2


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "polyaproc", "classify", "two-three-tree", "--format", "csv"],
                         capture_output=True, text=True, check=True)
    assert out.stdout.splitlines()[2].startswith("Small,-6,")
