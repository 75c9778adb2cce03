"""JSON persistence for distributions and reports.

Floats are written with 17 significant digits so that every IEEE double
survives a write/read cycle bit for bit.
"""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any, Union

import numpy as np

from .distributions import Distribution, JointDistribution
from .errors import ValidationError

PathLike = Union[str, Path]


def _fmt_float(v: float) -> str:
    if math.isnan(v):
        return '"nan"'
    if math.isinf(v):
        return '"inf"' if v > 0 else '"-inf"'
    s = format(v, ".17g")
    if "e" not in s and "." not in s:
        s += ".0"
    return s


def encode(obj: Any, indent: int = 2, _level: int = 0) -> str:
    """Serialise nested dicts/lists/numbers/strings to JSON text."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {encode(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(encode(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + encode(v, indent, _level + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def write_json(obj: Any, path: PathLike) -> None:
    Path(path).write_text(encode(obj) + "\n", encoding="utf-8")


def read_json(path: PathLike) -> Any:
    text = Path(path).read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def _field(doc: dict, name: str, kind, pointer: str = ""):
    if not isinstance(doc, dict):
        raise ValidationError(f"field '{pointer or '/'}': expected an object")
    if name not in doc:
        raise ValidationError(f"field '{pointer}/{name}': missing")
    value = doc[name]
    if kind is int and (isinstance(value, bool) or not isinstance(value, int)):
        raise ValidationError(f"field '{pointer}/{name}': expected an integer, got {value!r}")
    if kind is list and not isinstance(value, list):
        raise ValidationError(f"field '{pointer}/{name}': expected an array")
    return value


def _prob_array(values: list, pointer: str) -> np.ndarray:
    for i, v in enumerate(values):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ValidationError(f"field '{pointer}/{i}': expected a number, got {v!r}")
        if v < 0:
            raise ValidationError(f"field '{pointer}/{i}': negative probability {v!r}")
    return np.array(values, dtype=np.float64)


def distribution_from_doc(doc: dict) -> Distribution:
    n = _field(doc, "n", int)
    probs = _prob_array(_field(doc, "probs", list), "/probs")
    support = doc.get("support")
    if support is not None:
        if not isinstance(support, list):
            raise ValidationError("field '/support': expected an array")
        return Distribution(n, probs, np.array([int(s) for s in support], dtype=np.uint64))
    if n <= 20 and probs.size != 1 << n:
        raise ValidationError(f"field '/probs': expected {1 << n} entries for n={n}, got {probs.size}")
    return Distribution(n, probs)


def joint_from_doc(doc: dict) -> JointDistribution:
    n = _field(doc, "n", int)
    m = _field(doc, "m", int)
    probs = _prob_array(_field(doc, "probs", list), "/probs")
    if n + m <= 20 and probs.size != 1 << (n + m):
        raise ValidationError(f"field '/probs': expected {1 << (n + m)} entries for n={n}, m={m}, got {probs.size}")
    return JointDistribution(n, m, probs)


def distribution_to_doc(X: Distribution) -> dict:
    doc = {"n": X.n, "probs": [float(v) for v in X.probs]}
    if not X.is_dense:
        doc["support"] = [int(s) for s in X.support]
    return doc


def joint_to_doc(XZ: JointDistribution) -> dict:
    return {"n": XZ.n, "m": XZ.m, "probs": [float(v) for v in XZ.probs]}


def load_distribution(path: PathLike) -> Distribution:
    return distribution_from_doc(read_json(path))


def load_joint(path: PathLike) -> JointDistribution:
    return joint_from_doc(read_json(path))


def load_any(path: PathLike) -> Union[Distribution, JointDistribution]:
    """Joint when the document carries an ``m`` field, plain distribution otherwise."""
    doc = read_json(path)
    if isinstance(doc, dict) and "m" in doc:
        return joint_from_doc(doc)
    return distribution_from_doc(doc)


def save(obj: Union[Distribution, JointDistribution], path: PathLike) -> None:
    if isinstance(obj, JointDistribution):
        write_json(joint_to_doc(obj), path)
    else:
        write_json(distribution_to_doc(obj), path)
