"""Run configuration: fixed defaults, key=value file, flag overrides.

Environment variables are deliberately not consulted; reproducing a run
must require only the config file and the command line.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .errors import FormatError, InputError

DEFAULT_SEEDS = (42, 123, 2024, 7, 31415)
DEFAULT_RATIOS = (0.7, 0.1, 0.2)
DEFAULT_TAU = 0.5

_PATH_KEYS = ("dump", "corpus", "split", "predictions", "out_dir")


@dataclass
class RunConfig:
    dump: str | None = None
    corpus: str | None = None
    split: str | None = None
    predictions: str | None = None
    out_dir: str | None = None
    seeds: tuple[int, ...] = DEFAULT_SEEDS
    ratios: tuple[float, float, float] = DEFAULT_RATIOS
    tau: float = DEFAULT_TAU


def load_config(path: str | Path) -> RunConfig:
    """Parse a ``key = value`` config file ('#' starts a comment)."""
    path = Path(path)
    if not path.is_file():
        raise InputError(f"no such config file: {path}")
    config = RunConfig()
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FormatError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        try:
            if key in _PATH_KEYS:
                setattr(config, key, value)
            elif key == "seeds":
                config.seeds = tuple(int(s) for s in value.split(","))
            elif key == "ratios":
                parts = tuple(float(r) for r in value.split(","))
                if len(parts) != 3:
                    raise ValueError("need exactly three ratios")
                config.ratios = parts
            elif key == "tau":
                config.tau = float(value)
            else:
                raise ValueError(f"unknown key {key!r}")
        except ValueError as exc:
            raise FormatError(f"{path}:{lineno}: {exc}") from exc
    return config
