"""
JSON helpers for CLI output.

Exact rationals are emitted as {"num", "den", "approx"} objects and big integers as
strings when they exceed the IEEE-754 exact-integer range.
"""

import io
import json
from fractions import Fraction
from typing import Any

import numpy as np
import pandas as pd
import sympy as sp

from src.utils.config_loader import config

_MAX_SAFE_INT = 2**53


def rational_to_json(value: Fraction | int) -> dict:
    """Encode an exact rational without losing precision."""
    value = Fraction(value)
    return {
        "num": _int_to_json(value.numerator),
        "den": _int_to_json(value.denominator),
        "approx": float(value),
    }


def _int_to_json(value: int) -> int | str:
    return value if abs(value) < _MAX_SAFE_INT else str(value)


def to_jsonable(obj: Any) -> Any:
    """
    Recursively convert results into JSON-ready structures.

    Args:
        obj: Any nesting of dicts, lists, tuples, Fractions, ints, numpy scalars/arrays,
             sympy expressions, or objects exposing to_dict()

    Returns:
        Structure that json.dumps accepts
    """
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, Fraction):
        return rational_to_json(obj)
    if isinstance(obj, int):
        return _int_to_json(obj)
    if isinstance(obj, float):
        return obj
    if isinstance(obj, np.integer):
        return _int_to_json(int(obj))
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return [to_jsonable(x) for x in obj.tolist()]
    if isinstance(obj, sp.Basic):
        return str(obj)
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [to_jsonable(x) for x in items]
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    raise TypeError(f"Cannot serialise {type(obj).__name__}")


def dump_document(payload: dict) -> str:
    """
    Serialise a CLI result document with a schema version and stable key order.

    Identical payloads give byte-identical text.
    """
    document = {"schema_version": str(config.get("cli.schema_version", "1.0"))}
    document.update(to_jsonable(payload))
    return json.dumps(document, indent=2, sort_keys=True) + "\n"


def dump_csv(frame: pd.DataFrame) -> str:
    """
    Serialise a table as CSV led by a '# schema_version=...' comment line.

    Read it back with pandas.read_csv(..., comment="#").
    """
    buffer = io.StringIO()
    buffer.write(f"# schema_version={config.get('cli.schema_version', '1.0')}\n")
    frame.to_csv(buffer, index=False, float_format="%.12g", lineterminator="\n")
    return buffer.getvalue()
