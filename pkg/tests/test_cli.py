import csv
import io
import json

import pytest

from conftest import rf
from mrext.cli import (EXIT_CHECK_FAILED, EXIT_OK, EXIT_POLE, EXIT_USAGE, SpecError, load_spec, main, parse_spec,
                       reports_from_json)
from mrext.verify import FAIL


@pytest.fixture
def write(tmp_path):
    def _write(data, name="m.json"):
        path = tmp_path / name
        path.write_text(data if isinstance(data, str) else json.dumps(data))
        return str(path)
    return _write


# -- manifold files ---------------------------------------------------------------------

def test_gamma_key_fills_symmetric_partner(write):
    geom = load_spec(write({"dim": 2, "gamma": {"1,1,2": "x2"}, "c": {"1,2": "x1"}})).geometry
    assert geom.gamma[0, 0, 1] == geom.gamma[0, 1, 0] == rf("x2")
    assert geom.c[1, 0] == rf("x1")


def test_derived_connection(write):
    geom = load_spec(write({"dim": 2, "metric": {"1,1": "1", "2,2": "x1^2"}, "derive_connection": True})).geometry
    assert geom.gamma[0, 1, 1] == rf("-x1")
    assert geom.gamma[1, 0, 1] == rf("1/x1")


def test_key_order_is_irrelevant():
    a = parse_spec({"dim": 2, "c": {"1,1": "x1", "2,2": "x2"}, "gamma": {"1,2,2": "x1"}}).geometry
    b = parse_spec({"gamma": {"1,2,2": "x1"}, "c": {"2,2": "x2", "1,1": "x1"}, "dim": 2}).geometry
    assert a.gamma.equals(b.gamma) and a.c.equals(b.c)


@pytest.mark.parametrize("data, message", [
    ({"dim": 2, "c": {"1,1": "p1"}}, "fiber variable p1"),
    ({"dim": 2, "c": {"1,2": "x1", "2,1": "x2"}}, "conflicting"),
    ({"dim": 2, "c": {"1,1": "x1+*"}}, r"c\['1,1'\]"),
    ({"dim": 2, "c": {"1,3": "1"}}, "1..2"),
    ({"dim": 2, "J": {"1,2": "1", "2,1": "1"}}, "J"),
    ({"dim": 2, "torsion": {}}, "unknown key"),
    ({"dim": 0}, "dim"),
    ({"dim": 2, "derive_connection": True}, "metric"),
    ({"dim": 2, "metric": {"1,1": "1", "2,2": "1"}, "gamma": {"1,1,1": "1"}, "derive_connection": True}, "either"),
])
def test_rejected_files(data, message):
    with pytest.raises(SpecError, match=message):
        parse_spec(data)


def test_invalid_json_reports_location(write):
    with pytest.raises(SpecError, match="line 1"):
        load_spec(write("{\"dim\": 2,"))


# -- commands --------------------------------------------------------------------------------

def test_check_passes_on_flat_base(write, capsys):
    assert main(["check", write({"dim": 2})]) == EXIT_OK
    assert capsys.readouterr().out.strip().endswith("all checks passed")


def test_tensor_scalar_prints_zero(write, capsys):
    assert main(["tensor", write({"dim": 2, "gamma": {"1,2,2": "x1"}}), "--object", "scalar"]) == EXIT_OK
    assert capsys.readouterr().out.strip().endswith("0")


def test_tensor_json(write, capsys):
    path = write({"dim": 2, "gamma": {"1,2,2": "x1"}})
    assert main(["tensor", path, "--object", "ricci", "--format", "json", "--frame", "induced"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)


def test_conditions_fail_with_witness_and_round_trip(write, capsys):
    code = main(["conditions", write({"dim": 2, "c": {"1,1": "x2^2"}}), "--format", "json"])
    assert code == EXIT_CHECK_FAILED
    payload = json.loads(capsys.readouterr().out)
    assert payload["all_passed"] is False
    reports = reports_from_json(payload["conditions"])
    flat = next(r for r in reports if r.name == "local-flatness")
    assert flat.verdict == FAIL and not flat.witness.value.is_zero()
    assert [r.to_dict() for r in reports] == payload["conditions"]


def test_kahler_needs_complex_structure(write, capsys):
    assert main(["kahler", write({"dim": 2})]) == EXIT_USAGE
    assert "J" in capsys.readouterr().err


def test_kahler_witness(write, capsys):
    spec = {"dim": 4, "metric": {"1,1": "1", "2,2": "-1", "3,3": "1", "4,4": "-1"},
            "c": {"1,1": "x2", "2,2": "-x2"}, "J": {"2,1": "1", "1,2": "-1", "4,3": "1", "3,4": "-1"}}
    assert main(["kahler", write(spec)]) == EXIT_CHECK_FAILED
    assert "extension metric holomorphic" in capsys.readouterr().out


def test_geodesic_csv(write, tmp_path, capsys):
    out = tmp_path / "curve.csv"
    args = ["geodesic", write({"dim": 2, "gamma": {"1,2,2": "x1"}, "c": {"1,1": "x2"}}),
            "--x0", "0.1", "0.2", "--v0", "0.5", "0.3", "--steps", "10", "--out", str(out)]
    assert main(args) == EXIT_OK
    rows = list(csv.reader(io.StringIO(out.read_text())))
    assert rows[0][0] == "t" and rows[0][-1] == "energy"
    assert len(rows) == 12
    assert "energy drift" in capsys.readouterr().err


def test_geodesic_pole_exit_code(write, capsys):
    args = ["geodesic", write({"dim": 2, "gamma": {"1,1,1": "1/x1"}}), "--x0", "1", "0", "--v0", "-1", "0",
            "--step", "0.01", "--steps", "300"]
    assert main(args) == EXIT_POLE
    assert "last good state" in capsys.readouterr().err


def test_geodesic_wrong_vector_length(write, capsys):
    assert main(["geodesic", write({"dim": 2}), "--x0", "1"]) == EXIT_USAGE


def test_random_spec_is_seeded(capsys):
    main(["tensor", "random:2", "--seed", "4", "--object", "curvature"])
    first = capsys.readouterr().out
    main(["tensor", "random:2", "--seed", "4", "--object", "curvature"])
    assert capsys.readouterr().out == first
    assert main(["check", "random:x"]) == EXIT_USAGE


def test_report_sections(write, capsys):
    main(["report", write({"dim": 2, "c": {"1,1": "2*x1*x2", "1,2": "x2^2"}}), "--format", "json"])
    payload = json.loads(capsys.readouterr().out)
    assert set(payload) == {"check", "conditions", "ricci-flatness", "remarks", "all_passed"}
