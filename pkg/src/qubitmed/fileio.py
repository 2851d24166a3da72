"""JSON problem and POVM files.

Problem file::

    {
      "states": [
        {"prior": 0.5, "bloch": [0, 0, 1], "label": "zero"},
        {"prior": 0.5, "bloch": [1, 0, 0]}
      ],
      "tolerances": {"equality": 1e-9}
    }

POVM file (a ``solve`` report is accepted too; its ``"povm"`` member is used)::

    {
      "elements": [
        {"state": 0, "alpha": 1.0, "n": [0, 0, 1]},
        {"state": 1, "alpha": 1.0, "n": [0, 0, -1], "full_operator": false}
      ]
    }
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import QubitMedError
from .model import Ensemble, Povm, PovmElement, make_ensemble, make_povm


class FileFormatError(QubitMedError, ValueError):
    """Malformed input file; the message names the offending field."""


def _read_json(path) -> Any:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise FileFormatError(f"{path}: cannot read ({exc.strerror})") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise FileFormatError(f"{where}: expected a number, got {value!r}")
    if not math.isfinite(value):
        raise FileFormatError(f"{where}: expected a finite number, got {value!r}")
    return float(value)


def _vector(value, where: str) -> np.ndarray:
    if not isinstance(value, list) or len(value) != 3:
        raise FileFormatError(f"{where}: expected a list of 3 numbers")
    return np.array([_number(x, f"{where}[{k}]") for k, x in enumerate(value)])


def parse_problem(data: Any, tol: Tolerances = DEFAULT_TOLERANCES) -> tuple[Ensemble, Tolerances]:
    if not isinstance(data, dict) or "states" not in data:
        raise FileFormatError("problem: expected an object with a 'states' list")
    if "tolerances" in data:
        overrides = data["tolerances"]
        if not isinstance(overrides, dict):
            raise FileFormatError("tolerances: expected an object")
        try:
            tol = tol.override({k: _number(v, f"tolerances.{k}") for k, v in overrides.items()})
        except KeyError as exc:
            raise FileFormatError(f"tolerances: {exc.args[0]}") from exc
    states = data["states"]
    if not isinstance(states, list) or not states:
        raise FileFormatError("states: expected a nonempty list")
    entries, labels = [], []
    for i, st in enumerate(states):
        where = f"states[{i}]"
        if not isinstance(st, dict):
            raise FileFormatError(f"{where}: expected an object")
        for key in ("prior", "bloch"):
            if key not in st:
                raise FileFormatError(f"{where}.{key}: missing")
        prior = _number(st["prior"], f"{where}.prior")
        if not 0.0 <= prior <= 1.0:
            raise FileFormatError(f"{where}.prior: {prior!r} outside [0, 1]")
        vec = _vector(st["bloch"], f"{where}.bloch")
        label = st.get("label")
        if label is not None and not isinstance(label, str):
            raise FileFormatError(f"{where}.label: expected a string")
        entries.append((prior, vec))
        labels.append(label)
    try:
        ensemble = make_ensemble(entries, tol, labels)
    except ValueError as exc:
        raise FileFormatError(f"states: {exc}") from exc
    return ensemble, tol


def load_problem(path, tol: Tolerances = DEFAULT_TOLERANCES) -> tuple[Ensemble, Tolerances]:
    """Read a problem file; returns the ensemble and the effective tolerances."""
    return parse_problem(_read_json(path), tol)


def parse_povm(data: Any, tol: Tolerances = DEFAULT_TOLERANCES) -> Povm:
    if isinstance(data, dict) and "povm" in data:
        data = data["povm"]
    if not isinstance(data, dict) or not isinstance(data.get("elements"), list):
        raise FileFormatError("povm: expected an object with an 'elements' list")
    elements = []
    for k, el in enumerate(data["elements"]):
        where = f"elements[{k}]"
        if not isinstance(el, dict):
            raise FileFormatError(f"{where}: expected an object")
        for key in ("state", "alpha", "n"):
            if key not in el:
                raise FileFormatError(f"{where}.{key}: missing")
        state = el["state"]
        if isinstance(state, bool) or not isinstance(state, int) or state < 0:
            raise FileFormatError(f"{where}.state: expected a nonnegative integer")
        full = el.get("full_operator", False)
        if not isinstance(full, bool):
            raise FileFormatError(f"{where}.full_operator: expected true or false")
        try:
            elements.append(
                PovmElement(_number(el["alpha"], f"{where}.alpha"), _vector(el["n"], f"{where}.n"), state, full)
            )
        except ValueError as exc:
            raise FileFormatError(f"{where}: {exc}") from exc
    try:
        return make_povm(elements, tol)
    except ValueError as exc:
        raise FileFormatError(f"povm: {exc}") from exc


def load_povm(path, tol: Tolerances = DEFAULT_TOLERANCES) -> Povm:
    return parse_povm(_read_json(path), tol)


def povm_to_json(povm: Povm) -> dict:
    """Full-precision representation, so that a written POVM re-reads exactly."""
    return {
        "elements": [
            {
                "state": e.state_index,
                "alpha": float(e.alpha),
                "n": [float(x) for x in e.n_hat],
                "full_operator": e.full_operator,
            }
            for e in povm.elements
        ]
    }


def ensemble_to_json(ensemble: Ensemble) -> dict:
    states = []
    for s in ensemble.states:
        entry = {"prior": float(s.prior), "bloch": [float(x) for x in s.v]}
        if s.label is not None:
            entry["label"] = s.label
        states.append(entry)
    return {"states": states}
