"""
End-to-end checks at full size. Run with `pytest -m slow`.
"""

import io
import json

import pytest
from hypothesis import given, settings, strategies as st

from cli.app import MdzApp
from cli.components.verify_suites import (
    SUITES,
    gaussian_norm_chain,
    gaussian_sigma_chain,
    run_suites,
)
from services.cone_service import Cone, fundamental_domain
from services.field_service import QuadField
from services.mdzv_service import ExponentMatrix, MdzvSpec, mdzv_eval, multiple_eisenstein
from services.series_service import EvalParams, SectorPoint, dedekind_zeta_via_cones, fm

pytestmark = pytest.mark.slow

FIELDS = [QuadField.quadratic(d) for d in (-1, -3, -2, 2, 3)]


@pytest.mark.parametrize("suite", SUITES)
def test_verify_suite_passes(suite):
    rows = run_suites(suite)
    failed = [(r.name, r.deviation, r.tolerance) for r in rows if not r.passed]
    assert rows
    assert failed == []


@settings(max_examples=50, deadline=None)
@given(st.sampled_from(FIELDS), st.integers(min_value=0, max_value=3),
       st.floats(min_value=0.3, max_value=2.5), st.integers(min_value=4, max_value=32),
       st.data())
def test_tail_bound_sound_on_random_specs(f, m, radius, bound, data):
    cone = data.draw(st.sampled_from(fundamental_domain(f).cones))
    point = SectorPoint.center([cone], radius)
    small = fm(cone, m, point, A=bound)
    large = fm(cone, m, point, A=4 * bound)
    slack = 1e-13 * max(1.0, abs(large.value))
    assert abs(small.value - large.value) <= small.tail_bound + slack


def test_dedekind_zeta_independent_of_threads():
    gaussian = QuadField.quadratic(-1)
    results = [dedekind_zeta_via_cones(gaussian, 2, EvalParams(bound=1024, threads=t)).to_dict()
               for t in (1, 2, 8)]
    assert results[0] == results[1] == results[2]


def test_cli_json_independent_of_threads(tmp_path, monkeypatch):
    monkeypatch.delenv("MDZ_THREADS", raising=False)
    outputs = []
    for threads in ("1", "2", "8"):
        out = io.StringIO()
        code = MdzApp(stdout=out, stderr=io.StringIO()).run([
            "eval", "--field", "d=-1", "--cones", "1,0;0,1|1,0;0,1", "--exp", "1,2;1,2",
            "--bound", "48", "--threads", threads, "--config", str(tmp_path / "none.ini")])
        outputs.append((code, out.getvalue()))
    assert outputs[0] == outputs[1] == outputs[2]
    assert "\"1,0;0,1\"" in outputs[0][1]


def test_documented_double_sum_reaches_default_tol(tmp_path, monkeypatch):
    monkeypatch.delenv("MDZ_THREADS", raising=False)
    out = io.StringIO()
    code = MdzApp(stdout=out, stderr=io.StringIO()).run([
        "eval", "--field", "d=-1", "--cones", "1,0;0,1|1,0;0,1", "--exp", "1,2;1,2",
        "--config", str(tmp_path / "none.ini")])
    document = json.loads(out.getvalue())
    assert code == 0
    assert document["converged"]
    assert document["tail_bound"] <= 1e-8
    assert abs(document["value_re"] - gaussian_norm_chain(1, 2, 2048).real) < 1e-7


@pytest.mark.parametrize("k, l", [(1, 2), (2, 2)])
def test_double_sum_limits_at_default_bound(k, l):
    gaussian = QuadField.quadratic(-1)
    square = Cone.of(gaussian, 1, (0, 1))
    spec = MdzvSpec(gaussian, (square, square), ExponentMatrix.uniform(2, (k, l)))
    assert abs(mdzv_eval(spec).value - gaussian_norm_chain(k, l, 2048)) < 1e-7


def test_multiple_eisenstein_limit_at_default_bound():
    gaussian = QuadField.quadratic(-1)
    square = Cone.of(gaussian, 1, (0, 1))
    value = multiple_eisenstein(gaussian, square, 3, 3).value
    assert abs(value - gaussian_sigma_chain(3, 3, 2048)) < 1e-6
