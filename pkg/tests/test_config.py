import pytest
from pydantic import ValidationError

from src.config import BUDGET_SCALE_ENV, SolverConfig, parse_box


def test_defaults():
    config = SolverConfig()
    assert config.max_modulus == 64
    assert config.probe_box == (-100, 100)
    assert config.probe_budget == 10**6
    assert config.enum_budget == 10**8


def test_budget_scale_from_environment(monkeypatch):
    monkeypatch.setenv(BUDGET_SCALE_ENV, "0.5")
    config = SolverConfig.from_env(timeout_ms=2000)
    assert config.timeout_ms == 1000
    assert config.probe_budget == 500_000
    assert config.max_modulus == 64
    assert config.pell_max_d == 10**6


@pytest.mark.parametrize("raw", ["", "fast", "-2", "0"])
def test_bad_budget_scale_is_ignored(monkeypatch, raw):
    monkeypatch.setenv(BUDGET_SCALE_ENV, raw)
    assert SolverConfig.from_env() == SolverConfig()


def test_zero_probe_budget_stays_zero():
    assert SolverConfig(probe_budget=0).scaled(3).probe_budget == 0


def test_config_is_frozen_and_validated():
    config = SolverConfig()
    with pytest.raises(ValidationError):
        config.max_modulus = 10
    with pytest.raises(ValidationError):
        SolverConfig(max_modulus=1)
    with pytest.raises(ValidationError):
        SolverConfig(probe_box=(5, -5))


@pytest.mark.parametrize("text, box", [("-50..50", (-50, 50)), ("0..0", (0, 0)), ("3..10", (3, 10))])
def test_parse_box(text, box):
    assert parse_box(text) == box


@pytest.mark.parametrize("text", ["5", "5..-5", "a..b", "-5:5"])
def test_parse_box_rejects(text):
    with pytest.raises(ValueError):
        parse_box(text)
