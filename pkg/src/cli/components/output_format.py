"""
Output Format - Rendering of command results

JSON (sorted keys, schema-checked for evaluation results), CSV rows for
evaluation results and plain "key: value" text. Floats are printed with
15 significant digits.
"""

import csv
import hashlib
import io
import json
import math
from typing import Any, Dict, List

import jsonschema

from services.series_service import SumResult

SIGNIFICANT_DIGITS = 15

CSV_COLUMNS = ["spec_id", "value_re", "value_im", "tail_bound", "terms", "seconds"]

# JSON schema for the echoed evaluation spec
JSON_SPEC = {
    "title": "spec",
    "description": "Evaluation spec as given on the command line",
    "type": "object",
    "properties": {
        "field": {"type": "string", "pattern": "^(Q|d=-?[0-9]+)$"},
        "cones": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        "exp": {"type": "string"},
        "mode": {"type": "string", "enum": ["sum", "quadrature"]},
        "bound": {"type": ["integer", "null"], "minimum": 1},
        "tol": {"type": "number", "exclusiveMinimum": 0},
    },
    "required": ["field", "cones", "exp", "mode", "bound", "tol"],
    "additionalProperties": False,
}

# JSON schema for an evaluation result
JSON_RESULT = {
    "title": "mdz result",
    "description": "One evaluated multiple Dedekind zeta value",
    "type": "object",
    "properties": {
        "version": {"type": "string", "const": "1"},
        "spec_id": {"type": "string", "pattern": "^[0-9a-f]{12}$"},
        "spec": JSON_SPEC,
        "value_re": {"type": "number"},
        "value_im": {"type": "number"},
        "raw_value_re": {"type": "number"},
        "raw_value_im": {"type": "number"},
        "tail_bound": {"type": ["number", "null"], "minimum": 0},
        "terms_used": {"type": "integer", "minimum": 0},
        "converged": {"type": "boolean"},
        "heuristic": {"type": "boolean"},
        "bound": {"type": "integer", "minimum": 0},
    },
    "required": [
        "version", "spec_id", "spec", "value_re", "value_im", "raw_value_re",
        "raw_value_im", "tail_bound", "terms_used", "converged", "heuristic", "bound",
    ],
    "additionalProperties": False,
}


def round_significant(value: Any) -> Any:
    """Round floats (recursively) to 15 significant digits; inf and nan become None."""
    if isinstance(value, bool):
        return value
    if isinstance(value, float):
        if not math.isfinite(value):
            return None
        return float(f"{value:.{SIGNIFICANT_DIGITS}g}")
    if isinstance(value, dict):
        return {k: round_significant(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [round_significant(v) for v in value]
    return value


def spec_id(spec: Dict[str, Any]) -> str:
    canonical = json.dumps(spec, sort_keys=True, separators=(',', ':'))
    return hashlib.sha1(canonical.encode('utf-8')).hexdigest()[:12]


def result_document(spec: Dict[str, Any], result: SumResult) -> Dict[str, Any]:
    """
    The JSON document of one evaluation; independent of thread count and timing.

    Args:
        spec: Spec echo (MdzvSpec.describe())
        result: The evaluation result

    Returns:
        Document matching JSON_RESULT
    """
    document = {"version": "1", "spec_id": spec_id(spec), "spec": dict(spec)}
    document.update(result.to_dict())
    return round_significant(document)


def validate_result(document: Dict[str, Any]):
    """Validate an evaluation document with its schema."""
    jsonschema.validate(instance=document, schema=JSON_RESULT)


def render_json(document: Any) -> str:
    return json.dumps(round_significant(document), sort_keys=True, indent=2, allow_nan=False)


def _flatten(prefix: str, value: Any, lines: List[str]):
    if isinstance(value, dict):
        for key in sorted(value):
            _flatten(f"{prefix}.{key}" if prefix else key, value[key], lines)
    elif isinstance(value, list) and value and isinstance(value[0], dict):
        for i, item in enumerate(value):
            _flatten(f"{prefix}[{i}]", item, lines)
    else:
        lines.append(f"{prefix}: {json.dumps(value) if isinstance(value, list) else value}")


def render_text(document: Any) -> str:
    lines: List[str] = []
    _flatten("", round_significant(document), lines)
    return "\n".join(lines)


def render_csv(rows: List[Dict[str, Any]], columns: List[str]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=columns, extrasaction='ignore', lineterminator='\n')
    writer.writeheader()
    for row in rows:
        writer.writerow(round_significant(row))
    return buffer.getvalue().rstrip("\n")


def result_csv(document: Dict[str, Any], seconds: float) -> str:
    row = {
        "spec_id": document["spec_id"],
        "value_re": document["value_re"],
        "value_im": document["value_im"],
        "tail_bound": document["tail_bound"],
        "terms": document["terms_used"],
        "seconds": round(seconds, 3),
    }
    return render_csv([row], CSV_COLUMNS)


def render(document: Any, fmt: str) -> str:
    """json or text rendering of any command document."""
    if fmt == "text":
        return render_text(document)
    return render_json(document)
