import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from fairgm.gmconfig import MAX_ITER_CEILING, FitConfig, PenaltyKind, worker_count


def test_defaults():
    config = FitConfig()
    assert config.lam == 0.01
    assert config.tau == 0.01
    assert config.eps == 1e-5
    assert config.ell0 == 1e-2
    assert (config.step0, config.step_shrink) == (1.0, 0.5)
    assert config.penalty == "square"
    assert config.gamma is None


@pytest.mark.parametrize(
    "kwargs",
    [
        {"lam": -1.0},
        {"tau": 0.0},
        {"gamma": -0.1},
        {"step0": 0.0},
        {"step0": 1e-13},
        {"step_shrink": 1.0},
        {"ell0": 0.0},
        {"ell_growth": 1.0},
        {"ell_max": 1e-3},
        {"eps": 0.0},
        {"max_iter": 0},
        {"max_iter": MAX_ITER_CEILING + 1},
        {"penalty": "huber"},
        {"stop_rule": "never"},
        {"init": "random"},
    ],
)
def test_invalid_config(kwargs):
    with pytest.raises(ValueError, match="Invalid value"):
        FitConfig(**kwargs)


def test_replace_and_dict_round_trip():
    config = FitConfig().replace(lam=0.03, penalty="exp")
    assert config.lam == 0.03
    assert FitConfig.from_dict(config.to_dict()) == config


def test_unknown_keys_are_rejected():
    with pytest.raises(ValueError, match="Invalid keys"):
        FitConfig.from_dict({"lambda": 0.1})


def test_from_file(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"lam": 0.1, "tau": 0.05, "max_iter": 100}), encoding="utf-8")
    config = FitConfig.from_file(path)
    assert (config.lam, config.tau, config.max_iter) == (0.1, 0.05, 100)


def test_penalties():
    x = np.array([-1.0, 0.0, 2.0])
    assert_allclose(PenaltyKind("square").value(x), [0.5, 0.0, 2.0])
    assert_allclose(PenaltyKind("square").derivative(x), x)
    assert_allclose(PenaltyKind("exp").derivative(x), np.exp(x))
    assert_allclose(PenaltyKind("abs").value(x), [1.0, 0.0, 2.0])
    assert not PenaltyKind("abs").smooth
    with pytest.raises(ValueError):
        PenaltyKind("abs").derivative(x)
    with pytest.raises(ValueError):
        PenaltyKind("cube")


def test_worker_count(monkeypatch):
    monkeypatch.delenv("FAIRGM_THREADS", raising=False)
    assert worker_count() == 1
    monkeypatch.setenv("FAIRGM_THREADS", "4")
    assert worker_count() == 4
    monkeypatch.setenv("FAIRGM_THREADS", "0")
    assert worker_count() == 1
    monkeypatch.setenv("FAIRGM_THREADS", "many")
    with pytest.raises(ValueError):
        worker_count()
