import pytest

from app import core
from app.config import Config
from app.errors import ConfigError


def test_defaults(monkeypatch):
    monkeypatch.delenv("MCM_SEED", raising=False)
    cfg = Config.from_env()
    assert (cfg.p, cfg.cap, cfg.max_cap, cfg.seed) == (32003, 7, 10, 42)
    assert cfg.window is None


def test_seed_from_environment(monkeypatch):
    monkeypatch.setenv("MCM_SEED", "1234")
    assert Config.from_env().seed == 1234
    monkeypatch.setenv("MCM_SEED", "abc")
    with pytest.raises(ConfigError):
        Config.from_env()


@pytest.mark.parametrize(
    "flags",
    [
        {"p": 32001},
        {"p": 1 << 25},
        {"cap": 10},
        {"cap": 1},
        {"fmt": "xml"},
        {"seeds": 0},
    ],
)
def test_overrides_are_validated(flags):
    with pytest.raises(ConfigError):
        Config().with_overrides(**flags)


def test_none_means_unset():
    cfg = Config().with_overrides(cap=None, seed=5)
    assert cfg.cap == 7
    assert cfg.seed == 5


def test_command_registry_rejects_duplicates():
    from app.commands import register_commands

    register_commands()
    assert {"hilbert", "depth", "classify", "verify"} <= set(core.commands)
    with pytest.raises(RuntimeError):
        core.command("verify")(lambda inst, cfg: None)
