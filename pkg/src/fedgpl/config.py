"""Run configuration: typed defaults plus a key=value file/override parser."""

import dataclasses
from dataclasses import dataclass, field

from .errors import ConfigError
from .privacy import PrivacyConfig

MODES = ("fedgpl", "fedavg", "local")
PROMPT_KINDS = ("vpg", "gpf")


@dataclass
class Config:
    # data
    dataset: str = "synth"          # "synth" or "file"
    node_file: str = ""
    edge_file: str = ""
    synth_nodes: int = 600
    synth_classes: int = 3
    synth_feature_dim: int = 16
    synth_homophily: float = 0.9
    synth_avg_degree: float = 8.0
    synth_noise: float = 0.25
    # task construction
    tasks: tuple = ("node", "edge", "graph")
    clients_per_task: int = 3
    kappa: int = 5
    samples_per_client: int = 400
    partition_alpha: float = 1.0
    test_fraction: float = 0.2
    few_shot: int = 0               # 0 = use every training sample
    # model
    d: int = 100
    gnn_layers: int = 2
    lr: float = 0.1
    freeze_encoder: bool = False
    # prompting
    prompt_kind: str = "vpg"
    gamma: float = 0.5
    alpha_n: float = 0.5
    alpha_e: float = 0.5
    k_prime: int = 10
    learnable_candidates: bool = False
    attach_below_threshold: bool = True
    # federation
    mode: str = "fedgpl"
    rounds: int = 50
    seed: int = 0
    norm_fn: str = "sigmoid"
    direct_intra_task: bool = False
    early_stop_tol: float = 0.0     # 0 disables early stopping
    early_stop_window: int = 5
    # privacy
    privacy: PrivacyConfig = field(default_factory=PrivacyConfig)

    def validate(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.prompt_kind not in PROMPT_KINDS:
            raise ConfigError(f"prompt_kind must be one of {PROMPT_KINDS}")
        if self.dataset not in ("synth", "file"):
            raise ConfigError("dataset must be 'synth' or 'file'")
        if self.dataset == "file" and not (self.node_file and self.edge_file):
            raise ConfigError("dataset=file requires node_file and edge_file")
        if not self.tasks:
            raise ConfigError("at least one task level required")
        for level in self.tasks:
            if level not in ("node", "edge", "graph"):
                raise ConfigError(f"unknown task level {level!r}")
        if self.clients_per_task < 1:
            raise ConfigError("clients_per_task must be >= 1")
        if self.rounds < 0:
            raise ConfigError("rounds must be >= 0")
        if not 0.0 <= self.test_fraction < 1.0:
            raise ConfigError("test_fraction must lie in [0, 1)")
        if self.lr <= 0:
            raise ConfigError("lr must be positive")
        if self.norm_fn not in ("sigmoid", "relu"):
            raise ConfigError("norm_fn must be 'sigmoid' or 'relu'")
        if self.privacy.enabled and not self.privacy.epsilon > 0:
            raise ConfigError("privacy.epsilon must be positive when enabled")
        return self


_CONFIG_FIELDS = {f.name: f for f in dataclasses.fields(Config)}
_PRIVACY_FIELDS = {f.name: f for f in dataclasses.fields(PrivacyConfig)}
_TRUE = {"true", "1", "yes", "on"}
_FALSE = {"false", "0", "no", "off"}


def _coerce(name, text, target_type):
    text = text.strip()
    if target_type is bool:
        low = text.lower()
        if low in _TRUE:
            return True
        if low in _FALSE:
            return False
        raise ConfigError(f"{name}: expected a boolean, got {text!r}")
    try:
        if target_type is int:
            return int(text)
        if target_type is float:
            return float(text)
    except ValueError:
        raise ConfigError(f"{name}: expected {target_type.__name__}, got {text!r}") from None
    if target_type is tuple:
        return tuple(part.strip() for part in text.split(",") if part.strip())
    return text


def _sample_type(field_obj):
    default = field_obj.default
    if default is dataclasses.MISSING:
        return tuple
    return type(default)


def apply_setting(cfg, key, value):
    """Set one dotted key=value pair on a Config in place."""
    if key.startswith("privacy."):
        sub = key[len("privacy."):]
        if sub not in _PRIVACY_FIELDS:
            raise ConfigError(f"unknown config key {key!r}")
        setattr(cfg.privacy, sub, _coerce(key, value, _sample_type(_PRIVACY_FIELDS[sub])))
        return cfg
    if key not in _CONFIG_FIELDS or key == "privacy":
        raise ConfigError(f"unknown config key {key!r}")
    setattr(cfg, key, _coerce(key, value, _sample_type(_CONFIG_FIELDS[key])))
    return cfg


def parse_config(text, base=None):
    """Parse key=value lines (# comments, blank lines ignored) over `base`."""
    cfg = base if base is not None else Config()
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, value = stripped.split("=", 1)
        apply_setting(cfg, key.strip(), value)
    return cfg


def load_config(path, base=None):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read(), base=base)
