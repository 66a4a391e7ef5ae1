"""Experiment configuration: JSON schema, loading and defaults.

A config is a JSON or YAML mapping.  It is validated against :data:`SCHEMA`
(unknown keys are rejected at every level) before anything is computed, and
then merged over :data:`DEFAULTS`.
"""

from __future__ import annotations

import copy
import hashlib
import json
from pathlib import Path

import jsonschema
import yaml

from .errors import ConfigError
from .geometry import FAMILIES, POTENTIALS
from .quantum.packets import PACKET_FAMILIES
from .quantum.waveop import BORDERLINE_CASES

SCHEMA_VERSION = 1
SUITES = ("conditions", "classical", "cook", "wave", "borderline", "all")

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_pair = {"type": "array", "items": _num, "minItems": 2, "maxItems": 2}


def _obj(props, required=()):
    return {"type": "object", "properties": props, "required": list(required), "additionalProperties": False}


_t_grid = _obj({
    "kind": {"enum": ["geometric", "uniform"]},
    "t0": _pos, "t1": _pos,
    "points": {"type": "integer", "minimum": 3},
})

SCHEMA = _obj({
    "schema_version": {"const": SCHEMA_VERSION},
    "suite": {"enum": list(SUITES)},
    "output": {"type": "string"},
    "seed": {"type": "integer", "minimum": 0},
    "metric": _obj({
        "family": {"enum": [k for k in FAMILIES if k != "table"]},
        "params": {"type": "array", "items": _num},
        "d": {"type": "integer", "minimum": 2},
        "r_max": _pos,
        "pole_regular": {"type": "boolean"},
    }, ["family"]),
    "potential": _obj({
        "kind": {"enum": list(POTENTIALS)},
        "params": {"type": "array", "items": _num},
    }, ["kind"]),
    "ell": {"type": "integer", "minimum": 0},
    "packet": _obj({
        "family": {"enum": list(PACKET_FAMILIES)},
        "params": _obj({"center": _num, "width": _pos, "beta": _pos}),
        "support": _pair,
        "k": _num,
    }),
    "conditions": _obj({
        "probe": _obj({"r_min": _pos, "r_max": _pos, "points": {"type": "integer", "minimum": 8}}),
        "requested": {"type": "array", "items": _num, "minItems": 3, "maxItems": 3},
    }),
    "classical": _obj({
        "n_initial": {"type": "integer", "minimum": 1},
        "t_grid": _t_grid,
        "r_range": _pair, "xi_range": _pair, "ell_range": _pair,
        "method": {"enum": ["DOP853", "verlet"]},
    }),
    "cook": _obj({
        "t_grid": _t_grid,
        "modified": {"type": "boolean"},
        "c": {"type": ["number", "null"]},
    }),
    "wave": _obj({
        "T_list": {"type": "array", "items": _pos, "minItems": 1},
        "spec_kind": {"enum": ["free", "dollard"]},
        "c": {"type": ["number", "null"]},
        "grid": _obj({"r_min": _pos, "r_max": _pos, "n": {"type": "integer", "minimum": 3},
                      "dt": _pos, "dx": _pos}),
        "cook_nodes": {"type": "integer", "minimum": 3},
    }),
    "borderline": _obj({
        "case": {"enum": list(BORDERLINE_CASES)},
        "c": _num,
        "t_grid": _t_grid,
    }),
}, ["schema_version", "suite"])

DEFAULTS = {
    "schema_version": SCHEMA_VERSION,
    "suite": "conditions",
    "output": "endscat-out",
    "seed": 0,
    "metric": {"family": "euclidean", "params": [], "d": 3, "r_max": 1e7, "pole_regular": True},
    "potential": {"kind": "zero", "params": []},
    "ell": 0,
    "packet": {"family": "gaussian_bump", "params": {"center": 2.5, "width": 0.5, "beta": 1.0},
               "support": [1.0, 4.0], "k": 0.0},
    "conditions": {"probe": {"r_min": 0.1, "r_max": 1e4, "points": 200}, "requested": [0.0, 0.0, 0.0]},
    "classical": {"n_initial": 8, "t_grid": {"kind": "geometric", "t0": 1.0, "t1": 1e4, "points": 200},
                  "r_range": [0.5, 3.0], "xi_range": [-1.0, 2.0], "ell_range": [0.2, 2.0], "method": "DOP853"},
    "cook": {"t_grid": {"kind": "geometric", "t0": 1e3, "t1": 1e6, "points": 16}, "modified": False, "c": None},
    "wave": {"T_list": [10.0, 20.0, 40.0], "spec_kind": "free", "c": None,
             "grid": {"r_min": 1e-3, "dt": 0.005, "dx": 0.02}, "cook_nodes": 17},
    "borderline": {"case": "eta0", "c": 0.3,
                   "t_grid": {"kind": "geometric", "t0": 1e3, "t1": 1e6, "points": 16}},
}


def _merge(base, override):
    out = copy.deepcopy(base)
    for key, val in override.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def validate(raw):
    """Raise :class:`ConfigError` unless ``raw`` satisfies the schema."""
    try:
        jsonschema.validate(raw, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {where}: {exc.message}") from exc
    metric = raw.get("metric")
    if metric is not None:
        need = FAMILIES[metric["family"]]["n_params"]
        if len(metric.get("params", [])) != need:
            raise ConfigError(f"metric family {metric['family']!r} takes {need} parameter(s)")
    pot = raw.get("potential")
    if pot is not None:
        need = POTENTIALS[pot["kind"]]["n_params"]
        if len(pot.get("params", [])) != need:
            raise ConfigError(f"potential {pot['kind']!r} takes {need} parameter(s)")


def resolve(raw):
    """Validate and merge over the defaults."""
    validate(raw)
    return _merge(DEFAULTS, raw)


def load(path):
    """Read a JSON or YAML config file; returns ``(resolved_config, raw_text)``."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        raw = json.loads(text) if path.suffix == ".json" else yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping")
    return resolve(raw), text


def config_hash(cfg):
    """SHA-256 of the canonical JSON form of a resolved config."""
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()
