"""
JSON configuration files, validated against a versioned schema.

Example::

    {"version": 1, "family": "dot", "c": 2.0, "K": 8, "theta": 0.1,
     "sample_rate_hz": 360, "mode": "spiking"}

Either ``c`` or ``f_range`` (Hz) must be present. Floors on c and on the
integrator time constants are checked at load time.
"""

from __future__ import annotations

import json
from pathlib import Path

import jsonschema

from .frames import DesignError
from .harness import ExperimentConfig
from .kernels import C_MIN, StabilityError
from .wavelets import make_bank

__all__ = ["SCHEMA", "ConfigError", "load_config", "parse_config", "to_experiment"]

SCHEMA_VERSION = 1

_pos = {"type": "number", "exclusiveMinimum": 0}
SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["version", "K", "sample_rate_hz"],
    "properties": {
        "version": {"const": SCHEMA_VERSION},
        "family": {"enum": ["dog", "doe", "dot", "haar", "morlet", "szu"]},
        "families": {"type": "array", "minItems": 1, "items": {
            "enum": ["dog", "doe", "dot", "haar", "morlet", "szu"]}},
        "c": {"type": "number", "minimum": C_MIN},
        "f_range": {"type": "array", "items": _pos, "minItems": 2, "maxItems": 2},
        "K": {"type": "integer", "minimum": 1},
        "n": {"type": "integer", "minimum": 1},
        "theta": _pos,
        "thetas": {"type": "array", "items": _pos, "minItems": 4},
        "sample_rate_hz": _pos,
        "window_seconds": _pos,
        "sigma1_samples": _pos,
        "mode": {"enum": ["exact", "spiking"]},
        "reset": {"enum": ["soft", "hard"]},
        "decode_mode": {"enum": ["lstsq", "identity"]},
        "seed": {"type": "integer", "minimum": 0},
        "omega_range": {"type": "array", "items": _pos, "minItems": 2, "maxItems": 2},
        "source": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["ecgBurst", "chirp", "boxcar", "bandlimitedNoise",
                                  "file"]},
                "path": {"type": "string"},
                "rate_hz": _pos,
                "count": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer", "minimum": 0},
                "band": {"type": "array", "items": _pos, "minItems": 2, "maxItems": 2},
            },
        },
    },
    "oneOf": [{"required": ["c"]}, {"required": ["f_range"]}],
}


class ConfigError(ValueError):
    """Invalid configuration; ``path`` is a JSON-path-like field locator."""

    def __init__(self, message, path="$"):
        super().__init__(f"{path}: {message}")
        self.path = path


def _path(err):
    p = "$"
    for part in err.absolute_path:
        p += f"[{part}]" if isinstance(part, int) else f".{part}"
    return p


def parse_config(doc, base_dir=None):
    """Validate a config mapping and return it with defaults resolved."""
    v = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(v.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        msg = e.message
        if e.validator == "oneOf" and not e.absolute_path:
            msg = "exactly one of 'c' or 'f_range' is required"
        elif e.validator == "minimum" and list(e.absolute_path) == ["c"]:
            msg = f"{e.instance} is below the scale-ratio floor c >= {C_MIN}"
        raise ConfigError(msg, _path(e))
    doc = dict(doc)
    if "f_range" in doc and not doc["f_range"][0] < doc["f_range"][1]:
        raise ConfigError("f_range must be increasing", "$.f_range")
    src = doc.get("source")
    if src and src.get("kind") == "file":
        if "path" not in src:
            raise ConfigError("file source needs a path", "$.source.path")
        if base_dir is not None and not Path(src["path"]).is_absolute():
            doc["source"] = {**src, "path": str(Path(base_dir) / src["path"])}
    # floors are enforced here, not at first use
    to_experiment(doc)
    return doc


def to_experiment(doc, **overrides):
    fams = doc.get("families") or [doc.get("family", "dot")]
    kw = dict(
        families=tuple(fams), c=doc.get("c"), K=doc["K"],
        f_range=tuple(doc["f_range"]) if "f_range" in doc else None,
        theta=doc.get("theta", 0.1), mode=doc.get("mode", "spiking"),
        window_seconds=doc.get("window_seconds", 1.0),
        sample_rate_hz=doc["sample_rate_hz"], seed=doc.get("seed", 0),
        sigma1_samples=doc.get("sigma1_samples", 2.0), n=doc.get("n"),
        reset=doc.get("reset", "soft"), decode_mode=doc.get("decode_mode", "lstsq"),
    )
    if "source" in doc:
        kw["source"] = dict(doc["source"])
    kw.update({k: v for k, v in overrides.items() if v is not None})
    try:
        cfg = ExperimentConfig(**kw)
        for fam in cfg.families:
            if fam in ("dog", "doe", "dot"):
                make_bank(fam, cfg.sigma1, cfg.c, cfg.K, cfg.dt, n=cfg.n, theta=cfg.theta)
    except StabilityError as exc:
        raise ConfigError(str(exc), "$.n" if exc.stage else "$.sigma1_samples") from None
    except DesignError as exc:
        raise ConfigError(str(exc), "$.K") from None
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None
    return cfg


def load_config(path):
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"config file not found: {p}")
    try:
        doc = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno} column {exc.colno}: "
                          f"{exc.msg}") from None
    return parse_config(doc, base_dir=p.parent)
