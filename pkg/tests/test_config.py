"""key=value config parsing and validation."""

import pytest

from fedgpl.config import Config, apply_setting, load_config, parse_config
from fedgpl.errors import ConfigError


def test_defaults_are_valid():
    cfg = Config().validate()
    assert cfg.mode == "fedgpl"
    assert cfg.rounds == 50
    assert cfg.tasks == ("node", "edge", "graph")
    assert not cfg.privacy.enabled


def test_parse_overrides_types_and_comments():
    text = """
    # experiment shape
    mode = fedavg
    rounds=7            # trailing comment
    lr = 0.05
    tasks = node, graph
    freeze_encoder = true
    privacy.enabled = yes
    privacy.epsilon = 0.5
    """
    cfg = parse_config(text)
    assert cfg.mode == "fedavg"
    assert cfg.rounds == 7
    assert cfg.lr == 0.05
    assert cfg.tasks == ("node", "graph")
    assert cfg.freeze_encoder is True
    assert cfg.privacy.enabled and cfg.privacy.epsilon == 0.5
    cfg.validate()


def test_bool_spellings():
    for text, value in (("on", True), ("0", False), ("False", False), ("YES", True)):
        cfg = apply_setting(Config(), "freeze_encoder", text)
        assert cfg.freeze_encoder is value
    with pytest.raises(ConfigError):
        apply_setting(Config(), "freeze_encoder", "maybe")


def test_unknown_key_rejected():
    with pytest.raises(ConfigError):
        parse_config("momentum = 0.9")
    with pytest.raises(ConfigError):
        parse_config("privacy.delta = 1e-5")
    with pytest.raises(ConfigError):
        parse_config("privacy = off")


def test_bad_value_and_bad_line():
    with pytest.raises(ConfigError):
        parse_config("rounds = soon")
    with pytest.raises(ConfigError):
        parse_config("just a line")


def test_validation_failures():
    with pytest.raises(ConfigError):
        Config(mode="gossip").validate()
    with pytest.raises(ConfigError):
        Config(dataset="file").validate()
    with pytest.raises(ConfigError):
        Config(tasks=("node", "cluster")).validate()
    with pytest.raises(ConfigError):
        Config(test_fraction=1.0).validate()
    with pytest.raises(ConfigError):
        Config(lr=0.0).validate()
    cfg = Config()
    apply_setting(cfg, "privacy.epsilon", "0")
    apply_setting(cfg, "privacy.enabled", "true")
    with pytest.raises(ConfigError):
        cfg.validate()


def test_load_config_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("seed=3\nkappa=2\nsynth_nodes=120\n")
    cfg = load_config(path)
    assert (cfg.seed, cfg.kappa, cfg.synth_nodes) == (3, 2, 120)
