"""JSON documents for chains and test functions.

Chain document::

    {"family": "reflected_srw" | "mm1_embedded" | "birth_death" | "explicit",
     "params": {"p": 0.75} | {"rho": 0.5} | {"b": [...], "d": [...]} | {"rows": [[...], ...]},
     "description": "..."}

Test-function document::

    {"values": {"0": 1.0, "3": -0.5}, "default": 0.0, "bound": 1.0}
"""

from __future__ import annotations

import json
import re
from pathlib import Path

from .chains import BirthDeath, ExplicitChain, MM1Embedded, ReflectedSRW, SingleBirthChain
from .errors import ChainError, InvalidParameter
from .poisson import TestFunction

FAMILIES = {
    "reflected_srw": (ReflectedSRW, ("p",)),
    "mm1_embedded": (MM1Embedded, ("rho",)),
    "birth_death": (BirthDeath, ("b", "d")),
    "explicit": (ExplicitChain, ("rows",)),
}


class ConfigError(ChainError):
    """A document could not be parsed or violates a type invariant."""


def _line_of(text: str, key: str) -> int:
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else 1


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InvalidParameter(f"{where} must be a number, got {value!r}")
    return float(value)


def chain_from_dict(doc: dict, text: str = "", source: str = "<config>") -> SingleBirthChain:
    def fail(key, msg):
        raise ConfigError(f"{source}:{_line_of(text, key)}: {msg}")

    if not isinstance(doc, dict):
        raise ConfigError(f"{source}:1: top level must be an object")
    family = doc.get("family")
    if family not in FAMILIES:
        fail("family", f"unknown family {family!r}; expected one of {sorted(FAMILIES)}")
    params = doc.get("params")
    if not isinstance(params, dict):
        fail("params", "params must be an object")
    cls, keys = FAMILIES[family]
    missing = [k for k in keys if k not in params]
    if missing:
        fail("params", f"params missing {missing}")
    extra = sorted(set(params) - set(keys))
    if extra:
        fail(extra[0], f"unexpected parameter {extra[0]!r} for family {family}")
    description = doc.get("description", "")
    if not isinstance(description, str):
        fail("description", "description must be a string")

    key = keys[0]
    try:
        if family == "birth_death":
            args = [[_number(v, f"{k}[{i}]") for i, v in enumerate(params[k])] for k in keys]
        elif family == "explicit":
            key = "rows"
            args = [[[_number(v, f"rows[{i}][{j}]") for j, v in enumerate(r)] for i, r in enumerate(params["rows"])]]
        else:
            args = [_number(params[key], key)]
        return cls(*args, description=description)
    except (InvalidParameter, TypeError) as exc:
        fail(key, str(exc))


def load_chain(path) -> SingleBirthChain:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}: {exc.msg}") from exc
    return chain_from_dict(doc, text, str(path))


def test_function_from_dict(doc: dict) -> TestFunction:
    if not isinstance(doc, dict):
        raise ConfigError("test function must be an object")
    values = doc.get("values", {})
    try:
        return TestFunction(
            {int(k): _number(v, f"values[{k}]") for k, v in values.items()},
            _number(doc.get("default", 0.0), "default"),
            None if doc.get("bound") is None else _number(doc["bound"], "bound"),
        )
    except (InvalidParameter, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


test_function_from_dict.__test__ = False


def load_test_function(path) -> TestFunction:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return test_function_from_dict(doc)


load_test_function.__test__ = False
