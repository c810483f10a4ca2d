"""Run configuration: one key=value file plus command-line overrides."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, fields
from pathlib import Path

SUITES = ("kernel", "oneil", "annuli", "msi", "ruf", "seqlemma", "circstar", "sharpness", "constants", "all")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class HarnessConfig:
    suite: str = "all"
    grid_points: int = 20  # cells per e-fold of radius
    tolerance: float = 1e-6
    tau_ladder: tuple[float, ...] = (1e-6, 1e-5, 1e-4, 1e-3, 1e-2)
    epsilon_ladder: tuple[float, ...] = (1e-2, 3e-3, 1e-3, 3e-4, 1e-4)
    seed: int = 0
    samples: int = 20  # random instances per randomized suite
    workers: int = 1
    extra: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.suite not in SUITES:
            raise ConfigError(f"unknown suite {self.suite!r}; choose from {', '.join(SUITES)}")
        if self.grid_points < 2:
            raise ConfigError("grid_points must be at least 2")
        if not self.tolerance > 0:
            raise ConfigError("tolerance must be positive")
        if self.samples < 1 or self.workers < 1:
            raise ConfigError("samples and workers must be positive")
        for name in ("tau_ladder", "epsilon_ladder"):
            lad = getattr(self, name)
            if not lad or any(not 0 < x < 1 for x in lad):
                raise ConfigError(f"{name} entries must lie in (0, 1)")

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["tau_ladder"] = list(self.tau_ladder)
        d["epsilon_ladder"] = list(self.epsilon_ladder)
        return d


def _convert(name: str, raw: str):
    kinds = {f.name: f.type for f in fields(HarnessConfig)}
    if name not in kinds or name == "extra":
        raise ConfigError(f"unknown configuration key {name!r}")
    kind = kinds[name]
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind.startswith("tuple"):
            return tuple(float(x) for x in raw.replace(" ", "").split(",") if x)
    except ValueError as exc:
        raise ConfigError(f"bad value for {name}: {raw!r}") from exc
    return raw.strip()


def parse_config_text(text: str) -> dict:
    """key = value lines; '#' starts a comment; keys may use dashes or underscores."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        out[key] = _convert(key, value)
    return out


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> HarnessConfig:
    values: dict = {}
    if path is not None:
        p = Path(path)
        try:
            text = p.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {p}: {exc}") from exc
        values.update(parse_config_text(text))
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        key = key.replace("-", "_")
        values[key] = _convert(key, value) if isinstance(value, str) else value
    return HarnessConfig(**values)
