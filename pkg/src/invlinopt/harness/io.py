"""Flat-file outputs: trace CSV, key-value summaries, stream and vector files.

All decimals are printed with 17 significant digits so files round-trip
float64 exactly and identical runs produce bitwise-identical bytes.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np

from ..core import ExplicitVertices, Observation, as_vector

TRACE_COLUMNS = (
    "t",
    "ell_sub",
    "ell_est",
    "total",
    "regret",
    "regret_sub",
    "beta",
    "grad_norm",
    "bound_adaptive_grad",
    "bound_adaptive_horizon",
    "bound_offset_horizon",
    "bound_gap_constant",
)

STREAM_MAGIC = "# invlinopt stream v1"


def fmt(value) -> str:
    """17-significant-digit decimal text; None becomes the empty field."""
    if value is None:
        return ""
    return format(float(value), ".17g")


def write_trace(path, rows: Sequence[Sequence[str]]) -> None:
    lines = [",".join(TRACE_COLUMNS)]
    lines.extend(",".join(row) for row in rows)
    Path(path).write_text("\n".join(lines) + "\n")


def read_trace(path) -> list[dict[str, str]]:
    lines = Path(path).read_text().splitlines()
    header = lines[0].split(",")
    return [dict(zip(header, line.split(","))) for line in lines[1:]]


def write_summary(path, entries: dict) -> None:
    """One ``key = value`` line per entry, in insertion order."""
    lines = []
    for key, value in entries.items():
        if isinstance(value, bool):
            text = "true" if value else "false"
        elif isinstance(value, float):
            text = fmt(value)
        else:
            text = str(value)
        lines.append(f"{key} = {text}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_summary(path) -> dict[str, str]:
    entries: dict[str, str] = {}
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        key, value = line.split(" = ", 1)
        entries[key] = value
    return entries


def write_vector(path, vector) -> None:
    Path(path).write_text(" ".join(fmt(v) for v in np.asarray(vector)) + "\n")


def read_vector(path) -> np.ndarray:
    return as_vector([float(tok) for tok in Path(path).read_text().split()])


def write_stream(path, observations: Sequence[Observation], c_star=None,
                 cap: int | None = None) -> None:
    """Store observations as dimension-tagged explicit vertex lists.

    Line format:
        # invlinopt stream v1
        dim <n>
        c_star <n floats>            (optional)
        obs <round_index> <m>
        <m vertex lines of n floats>
        choice <n floats>
    Non-explicit feasible sets are enumerated (subject to the cap), so a
    reloaded stream always uses ExplicitVertices.
    """
    from ..core import DEFAULT_ENUMERATION_CAP

    if cap is None:
        cap = DEFAULT_ENUMERATION_CAP
    lines = [STREAM_MAGIC]
    dim = observations[0].feasible_set.dimension
    lines.append(f"dim {dim}")
    if c_star is not None:
        lines.append("c_star " + " ".join(fmt(v) for v in c_star))
    for obs in observations:
        members = obs.feasible_set.members(cap)
        lines.append(f"obs {obs.round_index} {members.shape[0]}")
        for row in members:
            lines.append(" ".join(fmt(v) for v in row))
        lines.append("choice " + " ".join(fmt(v) for v in obs.agent_choice))
    Path(path).write_text("\n".join(lines) + "\n")


def read_stream(path) -> tuple[list[Observation], np.ndarray | None]:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != STREAM_MAGIC:
        raise ValueError(f"{path}: not a stream file")
    idx = 1
    if not lines[idx].startswith("dim "):
        raise ValueError(f"{path}: missing dim line")
    dim = int(lines[idx].split()[1])
    idx += 1
    c_star = None
    if idx < len(lines) and lines[idx].startswith("c_star "):
        c_star = as_vector([float(t) for t in lines[idx].split()[1:]])
        idx += 1
    observations: list[Observation] = []
    while idx < len(lines):
        if not lines[idx].strip():
            idx += 1
            continue
        parts = lines[idx].split()
        if parts[0] != "obs":
            raise ValueError(f"{path}: expected an obs line, got {lines[idx]!r}")
        round_index, count = int(parts[1]), int(parts[2])
        idx += 1
        vertices = []
        for _ in range(count):
            row = [float(t) for t in lines[idx].split()]
            if len(row) != dim:
                raise ValueError(f"{path}: vertex of wrong dimension")
            vertices.append(row)
            idx += 1
        if not lines[idx].startswith("choice "):
            raise ValueError(f"{path}: missing choice line")
        choice = [float(t) for t in lines[idx].split()[1:]]
        idx += 1
        observations.append(
            Observation(ExplicitVertices(vertices), choice, round_index)
        )
    if not observations:
        raise ValueError(f"{path}: stream holds no observations")
    return observations, c_star
