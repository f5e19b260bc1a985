import json

import numpy as np
import pytest

from helpers import random_model
from statmfg import (
    ConsumerParams,
    CorruptionParams,
    MalformedModel,
    consumer_model,
    corruption_model,
    load_model,
    model_from_dict,
    model_to_dict,
    save_model,
)
from statmfg.serialization import round_sig


def _roundtrip(model, tmp_path):
    path = tmp_path / "model.json"
    save_model(model, path)
    return load_model(path)


@pytest.mark.parametrize(
    "make",
    [
        lambda rng: consumer_model(ConsumerParams(c=0.7, s1=0.3, s2=-0.1)),
        lambda rng: corruption_model(CorruptionParams()),
        lambda rng: random_model(rng, S=3, A=3),
        lambda rng: random_model(rng, S=2, A=2),
    ],
)
def test_roundtrip_preserves_evaluations(make, rng, tmp_path):
    model = make(rng)
    clone = _roundtrip(model, tmp_path)
    ms = rng.dirichlet(np.ones(model.num_states), size=100)
    np.testing.assert_array_equal(clone.rates_many(ms), model.rates_many(ms))
    np.testing.assert_array_equal(clone.rewards_many(ms), model.rewards_many(ms))
    assert clone.autocompleted == model.autocompleted
    assert clone.delta == model.delta and clone.beta == model.beta


def test_file_uses_one_based_indices():
    data = model_to_dict(consumer_model(ConsumerParams()))
    assert data["states"] == 2 and data["actions"] == 2
    assert {(r["i"], r["j"], r["a"]) for r in data["rates"]} == {(1, 2, 1), (1, 2, 2), (2, 1, 1), (2, 1, 2)}
    term = data["rewards"][0]["terms"][0]
    assert term["kind"] == "reglog" and term["state_index"] == 1
    assert data["action_names"] == ["change", "stay"]


def test_omitted_diagonal_is_completed():
    data = {
        "states": 2,
        "actions": 1,
        "beta": 0.5,
        "rates": [{"i": 1, "j": 2, "a": 1, "poly": [{"coef": 2.0, "powers": [1, 0]}]}],
        "rewards": [],
    }
    model = model_from_dict(data)
    Q = model.rates_at([0.25, 0.75])
    np.testing.assert_allclose(Q[0, :, 0], [-0.5, 0.5])
    assert model.delta == 1e-6


@pytest.mark.parametrize(
    "patch, field",
    [
        (lambda d: d.pop("beta"), "beta"),
        (lambda d: d.update(states="three"), "states"),
        (lambda d: d["rates"][0].update(i=5), "'i'"),
        (lambda d: d["rates"][0]["poly"][0].pop("coef"), r"rates\[0\]"),
        (lambda d: d["rewards"][0]["terms"][0].update(kind="exp"), "kind"),
        (lambda d: d["rewards"][0]["terms"][0].update(state_index=0), "state_index"),
        (lambda d: d["rates"][0]["poly"][0].update(powers=[1, 0, 0]), "exponents"),
    ],
)
def test_malformed_input_names_the_field(patch, field):
    data = model_to_dict(consumer_model(ConsumerParams()))
    patch(data)
    with pytest.raises(MalformedModel, match=field):
        model_from_dict(data)


def test_invalid_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(MalformedModel, match="invalid JSON"):
        load_model(path)


def test_round_sig():
    assert round_sig(1 / 3) == 0.333333333333
    assert round_sig({"a": [2 / 3, 0.0, 5]}) == {"a": [0.666666666667, 0.0, 5]}
    assert json.loads(json.dumps(round_sig(1e-20 / 3))) == pytest.approx(3.33333333333e-21, rel=1e-11)
