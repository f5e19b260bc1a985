import json
import subprocess
import sys

import numpy as np
import pytest

from statmfg import ConsumerParams, ModelSpec, Monomial, Polynomial, consumer_reference, save_model
from statmfg.cli import main

FAST = ["--grid", "20", "--multistart", "4"]


@pytest.fixture
def consumer_file(tmp_path):
    path = tmp_path / "consumer.json"
    assert main(["example", "consumer", "--c", "0.5", "-o", str(path)]) == 0
    return path


@pytest.fixture
def corruption_file(tmp_path):
    path = tmp_path / "corruption.json"
    assert main(["example", "corruption", "-o", str(path)]) == 0
    return path


def test_example_writes_model_and_reference(consumer_file):
    ref = json.loads(consumer_file.with_name("consumer.reference.json").read_text())
    assert ref["case"] == "v"
    assert len(ref["equilibria"]) == 5
    assert ref["d1"] == pytest.approx(consumer_reference(ConsumerParams(c=0.5)).d1, rel=1e-11)


def test_solve_then_verify(consumer_file, tmp_path, capsys):
    out = tmp_path / "eq.json"
    assert main(["solve", str(consumer_file), "-o", str(out)] + FAST) == 0
    data = json.loads(out.read_text())
    kinds = [r["kind"] for r in data["equilibria"]]
    assert kinds == ["pure", "mixed", "pure", "mixed", "pure"]
    assert data["failed_starts"] >= 0 and isinstance(data["warnings"], list)
    capsys.readouterr()
    assert main(["verify", str(consumer_file), str(out)]) == 0
    assert "5/5 records verified" in capsys.readouterr().out


def test_solve_defaults_to_stdout(corruption_file, capsys):
    assert main(["solve", str(corruption_file)] + FAST) == 0
    data = json.loads(capsys.readouterr().out)
    np.testing.assert_allclose(data["equilibria"][0]["m"], [0, 1, 0])
    assert len(data["equilibria"]) == 4


def test_tampered_record_fails_verification(consumer_file, tmp_path, capsys):
    out = tmp_path / "eq.json"
    main(["solve", str(consumer_file), "-o", str(out)] + FAST)
    data = json.loads(out.read_text())
    data["equilibria"][0]["m"] = [0.3, 0.7]
    out.write_text(json.dumps(data))
    capsys.readouterr()
    assert main(["verify", str(consumer_file), str(out)]) == 1
    assert "[FAIL] #0" in capsys.readouterr().out


def test_value_on_corruption_threshold(corruption_file, capsys):
    assert main(["value", str(corruption_file), "--m", "0.3,0.4,0.3"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["action_sets"] == {"C": ["change", "stay"], "H": ["change", "stay"], "R": ["change", "stay"]}
    assert data["num_optimal_strategies"] == 8
    assert len(data["optimal_strategies"]) == 8
    assert main(["value", str(corruption_file), "--m", "0.3 0.2 0.5", "--max-list", "1"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["action_sets"]["C"] == ["stay"] and data["action_sets"]["H"] == ["change"]
    assert "optimal_strategies" not in data


def test_malformed_inputs_exit_2(tmp_path, consumer_file, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"states": 2}')
    assert main(["solve", str(bad)]) == 2
    assert "error" in capsys.readouterr().err
    assert main(["solve", str(tmp_path / "missing.json")]) == 2
    assert main(["value", str(consumer_file), "--m", "0.5,0.6"]) == 2
    assert main(["value", str(consumer_file), "--m", "a,b"]) == 2
    assert main(["example", "consumer", "--epsilon", "2", "-o", str(tmp_path / "x.json")]) == 2
    assert main(["solve", str(consumer_file), "--damping", "3"]) == 2


def _nonconservative(tmp_path):
    S = 2
    rates = {(0, 1, 0): Polynomial((Monomial(-1.0, (1, 0)),)), (1, 0, 0): Polynomial.constant(1.0, S)}
    path = tmp_path / "neg.json"
    save_model(ModelSpec.create(S, 1, 0.5, rates, {}), path)
    return path


def test_validate_exit_codes(tmp_path, consumer_file, capsys):
    assert main(["validate", str(consumer_file)]) == 0
    neg = _nonconservative(tmp_path)
    assert main(["validate", str(neg)]) == 1
    assert "negative off-diagonal" in capsys.readouterr().out
    # solve refuses a model that is not a generator
    assert main(["solve", str(neg)]) == 2


def test_mfg_threads_overrides_workers(corruption_file, monkeypatch, capsys):
    monkeypatch.setenv("MFG_THREADS", "2")
    assert main(["solve", str(corruption_file), "--workers", "1"] + FAST) == 0
    assert len(json.loads(capsys.readouterr().out)["equilibria"]) == 4
    monkeypatch.setenv("MFG_THREADS", "zero")
    assert main(["solve", str(corruption_file)] + FAST) == 2


def test_module_entry_point(consumer_file):
    proc = subprocess.run(
        [sys.executable, "-m", "statmfg", "value", str(consumer_file), "--m", "0.5,0.5"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0, proc.stderr
    assert json.loads(proc.stdout)["action_sets"] == {"1": ["stay"], "2": ["stay"]}
