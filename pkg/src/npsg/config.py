"""Training configuration and flat key = value config-file parsing."""

from __future__ import annotations

from dataclasses import dataclass, fields


@dataclass
class TrainConfig:
    """Every training knob, defaulted to the published setup.

    hidden_sizes are the MLP layer widths after the projection input; the
    last entry is the representation dimension (and the baseline skip-gram
    embedding size).
    """

    negatives_k: int = 25
    reg_lambda: float = 0.01
    batch_size: int = 1024
    learning_rate: float = 0.001
    clip_norm: float = 5.0
    weight_decay: float = 0.0005
    epochs: int = 10
    window_max: int = 5
    subsample_t: float = 1e-5
    perturb_prob: float = 0.4
    seed: int = 1
    hidden_sizes: tuple[int, ...] = (2048, 100)
    dropout_p: float = 0.65

    def __post_init__(self):
        if isinstance(self.hidden_sizes, list):
            self.hidden_sizes = tuple(self.hidden_sizes)
        for name in ("negatives_k", "batch_size", "window_max"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        for name in ("learning_rate", "clip_norm", "subsample_t"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.reg_lambda < 0:
            raise ValueError("reg_lambda must be >= 0")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be >= 0")
        if not 0.0 <= self.perturb_prob <= 1.0:
            raise ValueError("perturb_prob must be in [0, 1]")
        if not 0.0 <= self.dropout_p < 1.0:
            raise ValueError("dropout_p must be in [0, 1)")
        if not self.hidden_sizes or any(h < 1 for h in self.hidden_sizes):
            raise ValueError("hidden_sizes must be nonempty positive ints")

    @property
    def output_dim(self) -> int:
        return self.hidden_sizes[-1]


_BOOL_WORDS = {"true": True, "false": False, "1": True, "0": False, "yes": True, "no": False}


def _parse_value(raw: str, kind: type):
    raw = raw.strip()
    if kind is bool:
        try:
            return _BOOL_WORDS[raw.lower()]
        except KeyError:
            raise ValueError(f"expected a boolean, got {raw!r}") from None
    if kind is int:
        return int(raw)
    if kind is float:
        return float(raw)
    if kind is tuple:
        return tuple(int(part) for part in raw.replace(",", " ").split())
    return raw


def parse_config_text(text: str, extra_keys: dict[str, type] | None = None) -> dict:
    """Parse flat ``key = value`` configuration text.

    Keys mirror TrainConfig field names; extra_keys maps additional accepted
    names to their types (used by the CLI for projection settings). Blank
    lines and lines starting with '#' are ignored. Unknown keys are errors.
    """
    type_names = {"int": int, "float": float, "bool": bool, "tuple[int, ...]": tuple}
    known = {f.name: type_names[f.type] for f in fields(TrainConfig)}
    if extra_keys:
        known.update(extra_keys)

    values: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ValueError(f"line {lineno}: expected 'key = value', got {stripped!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        if key not in known:
            raise ValueError(f"line {lineno}: unknown configuration key {key!r}")
        try:
            values[key] = _parse_value(raw, known[key])
        except ValueError as exc:
            raise ValueError(f"line {lineno}: bad value for {key!r}: {exc}") from None
    return values
