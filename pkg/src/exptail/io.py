"""JSON round-trip for report dataclasses and config loading.

Non-finite floats are written as the strings "inf", "-inf" and "nan".
Dataclasses carry a ``__type__`` tag and numpy arrays an ``__ndarray__`` tag
so that a report re-parses into the type that produced it.
"""
import dataclasses
import datetime
import json
import math

import numpy as np

SCHEMA_VERSION = 1
_NONFINITE = {"inf": math.inf, "-inf": -math.inf, "nan": math.nan}
_REGISTRY = {}


def register(*classes):
    for cls in classes:
        _REGISTRY[cls.__name__] = cls
    return classes[0] if len(classes) == 1 else classes


def _float(x):
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def encode(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        out = {"__type__": type(obj).__name__}
        for f in dataclasses.fields(obj):
            out[f.name] = encode(getattr(obj, f.name))
        return out
    if isinstance(obj, np.ndarray):
        return {"__ndarray__": encode(obj.tolist()), "dtype": str(obj.dtype)}
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _float(float(obj))
    if isinstance(obj, dict):
        return {str(k): encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [encode(v) for v in obj]
    return obj


def decode(obj):
    if isinstance(obj, dict):
        if "__ndarray__" in obj:
            return np.array(decode(obj["__ndarray__"]), dtype=obj.get("dtype", "float64"))
        if "__type__" in obj:
            cls = _REGISTRY.get(obj["__type__"])
            if cls is None:
                raise ValueError(f"unknown report type {obj['__type__']!r}")
            kw = {f.name: decode(obj[f.name]) for f in dataclasses.fields(cls) if f.name in obj}
            return cls(**kw)
        return {k: decode(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [decode(v) for v in obj]
    if isinstance(obj, str) and obj in _NONFINITE:
        return _NONFINITE[obj]
    return obj


def dumps(obj, command=None, metadata=None):
    """Report document: result plus a metadata block holding everything run-dependent."""
    doc = {"schema_version": SCHEMA_VERSION, "command": command, "result": encode(obj)}
    if metadata is not False:
        meta = {"created": datetime.datetime.now(datetime.timezone.utc).isoformat()}
        meta.update(metadata or {})
        doc["metadata"] = meta
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False)


def loads(text):
    doc = json.loads(text)
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema_version {doc.get('schema_version')!r}")
    return decode(doc["result"])


def equal(a, b):
    """Field-for-field equality treating NaN as equal to NaN."""
    if dataclasses.is_dataclass(a) and dataclasses.is_dataclass(b):
        return type(a) is type(b) and all(
            equal(getattr(a, f.name), getattr(b, f.name)) for f in dataclasses.fields(a))
    if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
        a, b = np.asarray(a), np.asarray(b)
        return a.shape == b.shape and bool(np.all((a == b) | (np.isnan(a.astype(float)) & np.isnan(b.astype(float)))))
    if isinstance(a, dict) and isinstance(b, dict):
        return a.keys() == b.keys() and all(equal(a[k], b[k]) for k in a)
    if isinstance(a, (list, tuple)) and isinstance(b, (list, tuple)):
        return len(a) == len(b) and all(equal(x, y) for x, y in zip(a, b))
    if isinstance(a, float) and isinstance(b, float) and math.isnan(a) and math.isnan(b):
        return True
    return a == b


def load_config(path, kind):
    """Read a JSON object config, checking its schema version and kind."""
    with open(path) as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise ValueError(f"{path}: config must be a JSON object")
    if cfg.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"{path}: missing or unsupported schema_version")
    if cfg.get("kind", kind) != kind:
        raise ValueError(f"{path}: expected kind {kind!r}, found {cfg.get('kind')!r}")
    return cfg


def _register_defaults():
    from . import certify, norms, tails, verify
    register(norms.NormReport, norms.NormEstimate, tails.TailEstimate, tails.TailBound,
             tails.BoundCurve, certify.IntegralResult, verify.EvidenceRow, verify.EvidenceTable,
             verify.PredicateResult, verify.EquivalenceReport, verify.LadderRun,
             verify.CheckResult, verify.VarianceReport)


_register_defaults()
