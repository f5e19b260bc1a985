"""JSON model files and equilibrium output files.

Model file layout (indices are 1-based)::

    {
      "states": 2, "actions": 2, "beta": 0.5, "delta": 1e-6,
      "state_names": ["1", "2"],            # optional
      "action_names": ["change", "stay"],   # optional
      "rates": [
        {"i": 1, "j": 2, "a": 1, "poly": [{"coef": 1.0, "powers": [0, 0]}]}
      ],
      "rewards": [
        {"i": 1, "a": 1, "terms": [
          {"kind": "reglog", "coef": 1.0, "state_index": 1, "offset": -0.5},
          {"kind": "poly", "poly": [{"coef": 2.0, "powers": [1, 0]}]}
        ]}
      ]
    }

Omitted rates are zero. Omitted diagonal rates are completed so that rows
sum to zero.
"""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

from .errors import MalformedModel
from .model import ModelSpec, Monomial, Polynomial, PolyTerm, RegLogTerm

__all__ = [
    "model_to_dict",
    "model_from_dict",
    "load_model",
    "save_model",
    "round_sig",
]


def _poly_to_list(poly: Polynomial) -> list[dict]:
    return [{"coef": t.coef, "powers": list(t.powers)} for t in poly.terms]


def _poly_from_list(items, where: str) -> Polynomial:
    if not isinstance(items, list):
        raise MalformedModel(f"{where}: 'poly' must be a list of monomials")
    terms = []
    for n, item in enumerate(items):
        try:
            terms.append(Monomial(float(item["coef"]), tuple(int(p) for p in item["powers"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedModel(f"{where}: monomial #{n + 1} needs numeric 'coef' and integer 'powers'") from exc
    return Polynomial(tuple(terms))


def model_to_dict(model: ModelSpec) -> dict[str, Any]:
    """Serialize a model. Auto-completed diagonals are left out again."""
    rates = []
    for (i, j, a), poly in sorted(model.rates.items()):
        if i == j and (i, a) in model.autocompleted:
            continue
        rates.append({"i": i + 1, "j": j + 1, "a": a + 1, "poly": _poly_to_list(poly)})
    rewards = []
    for (i, a), terms in sorted(model.rewards.items()):
        out = []
        for term in terms:
            if isinstance(term, PolyTerm):
                out.append({"kind": "poly", "poly": _poly_to_list(term.poly)})
            else:
                out.append(
                    {"kind": "reglog", "coef": term.coef, "state_index": term.state + 1, "offset": term.offset}
                )
        rewards.append({"i": i + 1, "a": a + 1, "terms": out})
    data: dict[str, Any] = {
        "states": model.num_states,
        "actions": model.num_actions,
        "beta": model.beta,
        "delta": model.delta,
    }
    if model.state_names:
        data["state_names"] = list(model.state_names)
    if model.action_names:
        data["action_names"] = list(model.action_names)
    data["rates"] = rates
    data["rewards"] = rewards
    return data


def _require(data: dict, key: str, kind, where: str = "model"):
    if key not in data:
        raise MalformedModel(f"{where}: missing field '{key}'")
    try:
        return kind(data[key])
    except (TypeError, ValueError) as exc:
        raise MalformedModel(f"{where}: field '{key}' has invalid value {data[key]!r}") from exc


def _index(record: dict, key: str, upper: int, where: str) -> int:
    value = _require(record, key, int, where)
    if not 1 <= value <= upper:
        raise MalformedModel(f"{where}: field '{key}' = {value} out of range 1..{upper}")
    return value - 1


def model_from_dict(data: dict[str, Any]) -> ModelSpec:
    if not isinstance(data, dict):
        raise MalformedModel("model file must contain a JSON object")
    S = _require(data, "states", int)
    A = _require(data, "actions", int)
    beta = _require(data, "beta", float)
    delta = float(data.get("delta", 1e-6))
    if S <= 1 or A < 1:
        raise MalformedModel("field 'states' must be > 1 and 'actions' >= 1")

    rates = {}
    for n, rec in enumerate(data.get("rates", [])):
        where = f"rates[{n}]"
        key = (_index(rec, "i", S, where), _index(rec, "j", S, where), _index(rec, "a", A, where))
        poly = _poly_from_list(rec.get("poly"), where)
        rates[key] = rates[key] + poly if key in rates else poly

    rewards: dict[tuple[int, int], list] = {}
    for n, rec in enumerate(data.get("rewards", [])):
        where = f"rewards[{n}]"
        key = (_index(rec, "i", S, where), _index(rec, "a", A, where))
        terms = rewards.setdefault(key, [])
        for k, term in enumerate(rec.get("terms", [])):
            twhere = f"{where}.terms[{k}]"
            kind = term.get("kind")
            if kind == "poly":
                terms.append(PolyTerm(_poly_from_list(term.get("poly"), twhere)))
            elif kind == "reglog":
                terms.append(
                    RegLogTerm(
                        _require(term, "coef", float, twhere),
                        _index(term, "state_index", S, twhere),
                        float(term.get("offset", 0.0)),
                    )
                )
            else:
                raise MalformedModel(f"{twhere}: field 'kind' must be 'poly' or 'reglog', got {kind!r}")

    return ModelSpec.create(
        S,
        A,
        beta,
        rates,
        rewards,
        delta=delta,
        state_names=data.get("state_names"),
        action_names=data.get("action_names"),
    )


def load_model(path) -> ModelSpec:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise MalformedModel(f"{path}: invalid JSON ({exc})") from exc
    return model_from_dict(data)


def save_model(model: ModelSpec, path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), indent=2) + "\n", encoding="utf-8")


def round_sig(value, digits: int = 12):
    """Round floats (recursively through lists/dicts) to ``digits`` significant digits."""
    if isinstance(value, float):
        if value == 0.0 or not math.isfinite(value):
            return value
        return float(f"{value:.{digits}g}")
    if isinstance(value, dict):
        return {k: round_sig(v, digits) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [round_sig(v, digits) for v in value]
    return value
