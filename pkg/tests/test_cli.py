import csv
import io
import json
import math

import jsonschema
import pytest

from cli.app import EXIT_FAILURE, EXIT_OK, EXIT_REFUSED, MdzApp
from cli.components.output_format import (
    CSV_COLUMNS,
    render_json,
    render_text,
    result_document,
    round_significant,
    spec_id,
    validate_result,
)
from services.series_service import SumResult


@pytest.fixture
def mdz(tmp_path, monkeypatch):
    """Run the app against a config path that does not exist."""
    monkeypatch.delenv("MDZ_THREADS", raising=False)
    config = str(tmp_path / "mdz.ini")

    def run(*argv):
        out, err = io.StringIO(), io.StringIO()
        code = MdzApp(stdout=out, stderr=err).run(list(argv) + ["--config", config])
        return code, out.getvalue(), err.getvalue()

    run.config = config
    return run


def test_eval_defaults_to_zeta_two(mdz):
    code, out, _ = mdz("eval")
    assert code == EXIT_OK
    document = json.loads(out)
    validate_result(document)
    assert document["spec"]["field"] == "Q"
    assert abs(document["value_re"] - math.pi ** 2 / 6) < 1e-10
    assert document["converged"]


def test_eval_divergent_is_refused(mdz):
    code, out, err = mdz("eval", "--exp", "1")
    assert code == EXIT_REFUSED
    assert out == ""
    assert "error" in err


@pytest.mark.parametrize("argv", [
    ("eval", "--bound", "0"),
    ("eval", "--field", "d=4"),
    ("eval", "--cones", "1,0"),
    ("eval", "--exp", "two"),
    ("frobnicate",),
])
def test_bad_usage_exits_one(mdz, argv):
    code, _, err = mdz(*argv)
    assert code == EXIT_FAILURE
    assert err.startswith("mdz: error:")


def test_eval_csv_row(mdz):
    code, out, _ = mdz("eval", "--exp", "3", "--format", "csv")
    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(out)))
    assert list(rows[0].keys()) == CSV_COLUMNS
    assert len(rows) == 1
    assert abs(float(rows[0]["value_re"]) - 1.2020569031595942) < 1e-10


def test_eval_text(mdz):
    code, out, _ = mdz("eval", "--format", "text")
    assert code == EXIT_OK
    assert "spec.field: Q" in out.splitlines()


def test_eval_gaussian_norm_power(mdz):
    code, out, _ = mdz("eval", "--field", "d=-1", "--cones", "1,0;0,1", "--exp", "3;3",
                       "--bound", "256", "--tol", "1e-4")
    assert code == EXIT_OK
    document = json.loads(out)
    assert document["spec"]["bound"] == 256
    assert document["heuristic"]


def test_eval_output_independent_of_threads(mdz):
    argv = ("eval", "--field", "d=-1", "--cones", "1,0;0,1", "--exp", "3;3", "--bound", "128",
            "--tol", "1e-4")
    _, one, _ = mdz(*argv, "--threads", "1")
    _, many, _ = mdz(*argv, "--threads", "4")
    assert one == many


def test_eval_saves_config(mdz):
    code, _, _ = mdz("eval", "--exp", "3", "--bound", "512", "--save-config")
    assert code == EXIT_OK
    with open(mdz.config, encoding="utf-8") as handle:
        text = handle.read()
    assert "exp = 3" in text
    assert "bound = 512" in text


def test_field_command(mdz):
    code, out, _ = mdz("field", "--field", "d=5")
    assert code == EXIT_OK
    document = json.loads(out)
    assert document["discriminant"] == 5
    assert document["signature"] == "real"
    assert document["fundamental_unit"] == "0,1"
    code, out, _ = mdz("field", "--field", "d=-3")
    assert len(json.loads(out)["units"]) == 6


def test_cone_command(mdz):
    code, out, _ = mdz("cone", "--field", "d=-1", "--gens", "1,0;0,2")
    assert code == EXIT_OK
    document = json.loads(out)
    assert document["unimodular"] is False
    assert document["simple_operative"] is True
    code, out, _ = mdz("cone", "--field", "d=-1", "--gens", "1,0;-1,0")
    document = json.loads(out)
    assert document["simple_operative"] is False
    assert document["epsilon"] is None


def test_decompose_with_partition_check(mdz):
    code, out, _ = mdz("decompose", "--field", "d=-1", "--check", "8")
    assert code == EXIT_OK
    document = json.loads(out)
    assert len(document["cones"]) == 2
    assert document["partition"]["passed"]


def test_verify_partition_quick(mdz):
    code, out, _ = mdz("verify", "partition", "--quick")
    assert code == EXIT_OK
    document = json.loads(out)
    assert document["passed"]
    assert len(document["checks"]) == 5


def test_verify_shuffles_quick_csv(mdz):
    code, out, _ = mdz("verify", "shuffles", "--quick", "--format", "csv")
    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [row["suite"] for row in rows] == ["shuffles", "shuffles"]
    assert all(row["passed"] == "True" for row in rows)


# Output formatting

def test_round_significant():
    assert round_significant(1.0 / 3.0) == 0.333333333333333
    assert round_significant({"a": [2.0 / 3.0, True, 7]}) == {"a": [0.666666666666667, True, 7]}


def test_non_finite_tail_bound_is_null():
    spec = {"field": "Q", "cones": ["1"], "exp": "2", "mode": "sum", "bound": None, "tol": 1e-8}
    document = result_document(spec, SumResult(1.5 + 0j, math.inf, 10, False, raw_value=1.5 + 0j))
    assert document["tail_bound"] is None
    validate_result(document)
    text = render_json(document)
    assert "Infinity" not in text
    assert json.loads(text)["tail_bound"] is None
    assert round_significant([math.nan, -math.inf, 2.0]) == [None, None, 2.0]


def test_help_states_config_precedence():
    epilog = MdzApp().build_parser().epilog
    assert "MDZ_THREADS" in epilog
    assert epilog.index("config file") < epilog.index("MDZ_THREADS")


def test_spec_id_is_stable():
    spec = {"field": "Q", "cones": ["1"], "exp": "2", "mode": "sum", "bound": None, "tol": 1e-8}
    reordered = dict(reversed(list(spec.items())))
    assert spec_id(spec) == spec_id(reordered)
    assert len(spec_id(spec)) == 12
    assert spec_id(spec) != spec_id(dict(spec, exp="3"))


def test_schema_rejects_incomplete_documents(mdz):
    _, out, _ = mdz("eval")
    document = json.loads(out)
    del document["tail_bound"]
    with pytest.raises(jsonschema.ValidationError):
        validate_result(document)
    document = json.loads(out)
    document["spec"]["field"] = "Q(i)"
    with pytest.raises(jsonschema.ValidationError):
        validate_result(document)


def test_render_text_flattens_lists_of_documents():
    text = render_text({"checks": [{"name": "a", "passed": True}], "suite": "x"})
    assert text.splitlines() == ["checks[0].name: a", "checks[0].passed: True", "suite: x"]
