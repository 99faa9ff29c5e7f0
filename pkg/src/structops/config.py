"""Run configuration: JSON schema, default tolerance table, and loader."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema

from .discretization import Variant
from .errors import InvalidSpecError
from .matfun import MatrixFunctionSpec, spec_from_dict

# Every default threshold used by the CLI lives here.
DEFAULT_TOLERANCES = {
    "min_order": 1.5,
    "exact_floor": 1e-11,
    "skew_slack": 1e-8,
    "reconstruction": 1e-9,
    "nesting_ratio_min": 1.5,
    "nesting_ratio_max": 3.0,
    "crosscheck_bound": 0.05,
    "crosscheck_floor": 1e-10,
    "eig_oracle": 2e-3,
}

_number_or_complex = {
    "anyOf": [
        {"type": "number"},
        {"type": "string"},
        {"type": "object", "properties": {"re": {"type": "number"}, "im": {"type": "number"}},
         "additionalProperties": False},
    ]
}

# scalar, row or nested rows; shapes are checked against (m2, m1) when the spec is built
_matrix = {"anyOf": [_number_or_complex, {"type": "array"}]}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["function"],
    "properties": {
        "function": {
            "type": "object",
            "additionalProperties": False,
            "required": ["family"],
            "properties": {
                "family": {"enum": ["zero", "constant", "linear", "trig", "polynomial", "fourier_random"]},
                "m1": {"type": "integer", "minimum": 1},
                "m2": {"type": "integer", "minimum": 1},
                "coefficients": {"type": "array", "items": _matrix},
                "omega": {"type": "number"},
                "num_terms": {"type": "integer", "minimum": 1},
                "decay": {"type": "number", "exclusiveMinimum": 0},
                "seed": {"type": "integer", "minimum": 0},
            },
        },
        "l": {"type": "number", "exclusiveMinimum": 0},
        "variant": {"enum": ["selfadjoint", "skew"]},
        "N_list": {"type": "array", "items": {"type": "integer", "minimum": 2}, "minItems": 1},
        "num_radii": {"type": "integer", "minimum": 1},
        "epsilons": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0, "maximum": 1}},
        "l_hat": {"type": "number", "exclusiveMinimum": 0},
        "h": {"type": "number", "exclusiveMinimum": 0},
        "expected_min_eig": {"type": "number"},
        "tolerances": {
            "type": "object",
            "additionalProperties": False,
            "properties": {k: {"type": "number"} for k in DEFAULT_TOLERANCES},
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"path": {"type": "string"}, "format": {"enum": ["csv", "json"]}},
        },
    },
}


@dataclass
class RunConfig:
    function: MatrixFunctionSpec
    l: float = 1.0
    variant: Variant = Variant.SELFADJOINT
    N_list: list = field(default_factory=lambda: [32, 64, 128])
    num_radii: int = 8
    epsilons: list = field(default_factory=lambda: [0.25, 0.5, 0.75])
    l_hat: float | None = None
    h: float | None = None
    expected_min_eig: float | None = None
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    output_path: str | None = None
    output_format: str = "json"
    raw: dict = field(default_factory=dict, repr=False)


def parse_config(doc: dict) -> RunConfig:
    try:
        jsonschema.validate(doc, SCHEMA)
    except jsonschema.ValidationError as exc:
        raise InvalidSpecError(f"invalid config: {exc.message}") from exc
    spec = spec_from_dict(doc["function"])
    N_list = list(doc.get("N_list", [32, 64, 128]))
    if any(b <= a for a, b in zip(N_list, N_list[1:])):
        raise InvalidSpecError("N_list must be strictly increasing")
    tol = dict(DEFAULT_TOLERANCES)
    tol.update(doc.get("tolerances", {}))
    out = doc.get("output", {})
    return RunConfig(
        function=spec,
        l=float(doc.get("l", 1.0)),
        variant=Variant(doc.get("variant", "selfadjoint")),
        N_list=N_list,
        num_radii=int(doc.get("num_radii", 8)),
        epsilons=list(doc.get("epsilons", [0.25, 0.5, 0.75])),
        l_hat=doc.get("l_hat"),
        h=doc.get("h"),
        expected_min_eig=doc.get("expected_min_eig"),
        tolerances=tol,
        output_path=out.get("path"),
        output_format=out.get("format", "json"),
        raw=doc,
    )


def load_config(path: str | Path) -> RunConfig:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidSpecError(f"cannot read config {path}: {exc}") from exc
    return parse_config(doc)
