"""Experiment configuration: a flat key-value file plus CLI overrides."""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path

from ..core import DEFAULT_ENUMERATION_CAP

DOMAINS = ("simplex", "ball")
SCHEDULES = ("adaptive", "offset")
FAMILIES = ("random-vertices", "hypercube", "knapsack", "dag")
GAP_MODES = ("none", "integral", "margin")


@dataclass(frozen=True)
class ExperimentConfig:
    """All knobs of one experiment.  The seed is mandatory.

    gap_mode "integral" draws integral vertices and an integral objective
    (rescaled into the prediction domain) and regenerates sets until the
    optimum is unique; "margin" regenerates sets until the certified
    per-round gap reaches gap_margin.  agent_noise is the probability of
    replacing the optimal choice with a uniformly random feasible point.
    fresh_sets=False draws one feasible set per stream and repeats it every
    round (the repeated-decision-problem regime).
    """

    seed: int
    dimension: int = 5
    rounds: int = 1000
    domain: str = "simplex"
    schedule: str = "adaptive"
    family: str = "random-vertices"
    agent_noise: float = 0.0
    gap_mode: str = "none"
    gap_margin: float = 0.0
    holdout: int = 0
    num_vertices: int = 32
    integral_vertices: bool = False
    fresh_sets: bool = True
    ball_radius: float = 1.0
    enumeration_cap: int = DEFAULT_ENUMERATION_CAP
    retry_cap: int = 100_000
    plateau_burn_in: int = 1000
    save_stream: bool = False
    out: str | None = None

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be at least 1")
        if self.rounds < 1:
            raise ValueError("rounds must be at least 1")
        if self.domain not in DOMAINS:
            raise ValueError(f"domain must be one of {DOMAINS}")
        if self.schedule not in SCHEDULES:
            raise ValueError(f"schedule must be one of {SCHEDULES}")
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}")
        if self.gap_mode not in GAP_MODES:
            raise ValueError(f"gap mode must be one of {GAP_MODES}")
        if not 0.0 <= self.agent_noise <= 1.0:
            raise ValueError("agent_noise must be in [0, 1]")
        if self.gap_mode == "margin" and not self.gap_margin > 0.0:
            raise ValueError("gap_margin must be positive in margin mode")
        if self.holdout < 0:
            raise ValueError("holdout must be nonnegative")
        if self.num_vertices < 1:
            raise ValueError("num_vertices must be at least 1")
        if self.ball_radius <= 0.0:
            raise ValueError("ball_radius must be positive")
        if self.retry_cap < 1 or self.enumeration_cap < 1:
            raise ValueError("caps must be positive")
        if self.domain == "simplex" and self.dimension < 2:
            raise ValueError("the simplex domain needs dimension >= 2")


_BOOL_WORDS = {"true": True, "false": False, "1": True, "0": False,
               "yes": True, "no": False}


def _coerce(name: str, kind, raw: str):
    if kind == "bool":
        word = raw.strip().lower()
        if word not in _BOOL_WORDS:
            raise ValueError(f"{name}: expected a boolean, got {raw!r}")
        return _BOOL_WORDS[word]
    if kind == "int":
        return int(raw)
    if kind == "float":
        return float(raw)
    return raw


def _field_kinds() -> dict[str, str]:
    kinds: dict[str, str] = {}
    for f in fields(ExperimentConfig):
        t = str(f.type)
        if "bool" in t:
            kinds[f.name] = "bool"
        elif "int" in t:
            kinds[f.name] = "int"
        elif "float" in t:
            kinds[f.name] = "float"
        else:
            kinds[f.name] = "str"
    return kinds


def load_config_file(path) -> dict:
    """Parse ``key = value`` lines; '#' starts a comment, blanks are skipped."""
    kinds = _field_kinds()
    values: dict = {}
    text = Path(path).read_text()
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        if key not in kinds:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = _coerce(key, kinds[key], raw)
    return values


def build_config(file_values: dict | None = None, **overrides) -> ExperimentConfig:
    """Merge file values with overrides (overrides win) into a config."""
    merged = dict(file_values or {})
    for key, value in overrides.items():
        if value is not None:
            merged[key] = value
    if "seed" not in merged:
        raise ValueError("a seed is mandatory (set it in the file or with --seed)")
    return ExperimentConfig(**merged)
