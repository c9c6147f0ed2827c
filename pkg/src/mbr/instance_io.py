"""JSON instance files: schema, loading with located errors, and writing.

Three instance kinds are understood::

    {"kind": "general", "prior": [...], "initial_state": [[...]],
     "transition": (S, A, Theta, S'), "outcome": (S, Theta, Y), "reward": (Y, A), "horizon": T}
    {"kind": "partial_feedback", "prior": [...], "outcome": (Theta, Y'^A),
     "preference": [...], "full_reveal": false, "horizon": T}
    {"kind": "bernoulli_bandit", "prior": [...], "means": (A, Theta), "horizon": T}

An optional ``"bounds"`` object may carry metrics (``ys``, ``y``, ``pf``),
``lipschitz_L`` and ``sigma2``.
"""

from __future__ import annotations

import json
import re
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .bounds import BoundConfig
from .environment import EnvironmentSpec, PartialFeedbackSpec, bernoulli_bandit, check, partial_feedback
from .errors import MBRError, ParseError, ValidationError
from .info import FiniteMetric

INSTANCE_SCHEMA_VERSION = 1

_num_array = {"type": "array"}
INSTANCE_SCHEMA = {
    "type": "object",
    "required": ["kind", "prior", "horizon"],
    "properties": {
        "schema_version": {"type": "integer"},
        "name": {"type": "string"},
        "kind": {"enum": ["general", "partial_feedback", "bernoulli_bandit"]},
        "prior": {"type": "array", "items": {"type": "number"}, "minItems": 1},
        "horizon": {"type": "integer", "minimum": 1},
        "initial_state": _num_array,
        "transition": _num_array,
        "outcome": _num_array,
        "reward": _num_array,
        "preference": {"type": "array", "items": {"type": "number"}},
        "full_reveal": {"type": "boolean"},
        "means": _num_array,
        "bounds": {
            "type": "object",
            "properties": {
                "ys": _num_array,
                "y": _num_array,
                "pf": _num_array,
                "lipschitz_L": {"type": ["number", "null"]},
                "sigma2": {"type": "array", "items": {"type": "number"}},
            },
            "additionalProperties": False,
        },
    },
    "allOf": [
        {
            "if": {"properties": {"kind": {"const": "general"}}},
            "then": {"required": ["initial_state", "transition", "outcome", "reward"]},
        },
        {
            "if": {"properties": {"kind": {"const": "partial_feedback"}}},
            "then": {"required": ["outcome", "preference"]},
        },
        {
            "if": {"properties": {"kind": {"const": "bernoulli_bandit"}}},
            "then": {"required": ["means"]},
        },
    ],
}


def _line_of(text: str, path) -> int | None:
    """Best-effort line of the first key on ``path`` that appears in ``text``."""
    for key in reversed([p for p in path if isinstance(p, str)]):
        m = re.search(r'"%s"\s*:' % re.escape(key), text)
        if m:
            return text.count("\n", 0, m.start()) + 1
    return None


def parse_instance(text: str, source: str = "<string>"):
    """Return ``(spec, BoundConfig)`` from JSON text; errors carry the file and line."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(source, exc.msg, exc.lineno) from None
    try:
        jsonschema.validate(doc, INSTANCE_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "document"
        raise ParseError(source, f"{where}: {exc.message}", _line_of(text, list(exc.absolute_path))) from None
    try:
        spec = _build(doc)
        config = _bound_config(doc.get("bounds", {}))
    except MBRError:
        raise
    except (ValueError, IndexError, TypeError) as exc:
        # ragged or non-numeric arrays surface here from numpy
        raise ParseError(source, str(exc)) from None
    return check(spec), config


def _build(doc: dict) -> EnvironmentSpec:
    kind, name, T = doc["kind"], doc.get("name", ""), doc["horizon"]
    prior = np.asarray(doc["prior"], dtype=float)
    if kind == "bernoulli_bandit":
        return bernoulli_bandit(np.asarray(doc["means"], dtype=float), prior, T, name=name)
    if kind == "partial_feedback":
        return partial_feedback(doc["outcome"], doc["preference"], T, prior,
                                full_reveal=doc.get("full_reveal", False),
                                initial_state=doc.get("initial_state"), name=name)
    return EnvironmentSpec(prior=prior, initial_state=doc["initial_state"], trans=doc["transition"],
                           outcome=doc["outcome"], reward=doc["reward"], horizon=T, name=name)


def _bound_config(section: dict) -> BoundConfig:
    def metric(key):
        if key not in section:
            return None
        d = np.asarray(section[key], dtype=float)
        return FiniteMetric(d.shape[0], d)

    sigma2 = section.get("sigma2")
    return BoundConfig(metric_ys=metric("ys"), metric_y=metric("y"), metric_pf=metric("pf"),
                       lipschitz_L=section.get("lipschitz_L"),
                       sigma2_schedule=None if sigma2 is None else np.asarray(sigma2, dtype=float))


def load_instance(path):
    path = Path(path)
    try:
        return parse_instance(path.read_text(), str(path))
    except ValidationError as exc:
        raise ValidationError([f"{path}: {v}" for v in exc.violations]) from None


def canonical_instance_path(name: str) -> Path:
    """Path of a bundled instance, e.g. ``"bernoulli2x2"``."""
    return Path(str(resources.files("mbr") / "instances" / f"{name}.json"))


def load_canonical(name: str):
    return load_instance(canonical_instance_path(name))


def spec_to_dict(spec: EnvironmentSpec) -> dict:
    doc = {"schema_version": INSTANCE_SCHEMA_VERSION, "name": spec.name, "horizon": spec.horizon,
           "prior": spec.prior.tolist()}
    if isinstance(spec, PartialFeedbackSpec):
        doc.update(kind="partial_feedback", outcome=spec.outcome[0].tolist(),
                   preference=spec.preference.tolist(), full_reveal=spec.full_reveal,
                   initial_state=spec.initial_state.tolist())
    else:
        doc.update(kind="general", initial_state=spec.initial_state.tolist(), transition=spec.trans.tolist(),
                   outcome=spec.outcome.tolist(), reward=spec.reward.tolist())
    return doc


def dump_instance(spec: EnvironmentSpec) -> str:
    return json.dumps(spec_to_dict(spec), indent=1, sort_keys=True) + "\n"
