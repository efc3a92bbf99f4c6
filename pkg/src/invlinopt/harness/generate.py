"""Seeded instance-stream generation with optional gap control.

Randomness is split into independent, documented streams so parts can be
reproduced in isolation: [seed, 2] draws the true objective, [seed, 3] the
fixed feasible set when fresh_sets is off, [seed, 0] drives the training
stream, and [seed, 1] drives holdout sampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..core import (
    Ball,
    DagPaths,
    ExplicitVertices,
    FeasibleSet,
    Hypercube,
    Knapsack,
    Observation,
    PredictionDomain,
    Simplex,
    as_vector,
)
from ..learner import RegularizerConfig
from ..oracle import argmax
from .config import ExperimentConfig


class GenerationFailedError(RuntimeError):
    """The rejection-sampling retry budget ran out."""


@dataclass(frozen=True, eq=False)
class StreamBundle:
    """Everything a run needs: the stream, the truth, and the learner setup.

    c_star_integral is the pre-rescaling integral objective in integral gap
    mode (None otherwise); the agent and all regret accounting use c_star,
    which lies in the prediction domain.
    """

    config: ExperimentConfig
    domain: PredictionDomain
    reg_config: RegularizerConfig
    c_star: np.ndarray
    c_star_integral: np.ndarray | None
    observations: tuple[Observation, ...]


def build_domain(cfg: ExperimentConfig) -> PredictionDomain:
    if cfg.domain == "simplex":
        return Simplex(cfg.dimension)
    r = cfg.ball_radius
    center = np.full(cfg.dimension, 2.0 * r / math.sqrt(cfg.dimension))
    return Ball(center, r)


def diameter_bound(cfg: ExperimentConfig) -> float:
    """Primal-norm diameter bound K for the configured family.

    All families keep actions inside [0, 1]^n, so the sup-norm diameter is
    at most 1 and the Euclidean diameter at most sqrt(n).
    """
    if cfg.domain == "simplex":
        return 1.0
    return math.sqrt(cfg.dimension)


def build_reg_config(cfg: ExperimentConfig) -> RegularizerConfig:
    if cfg.domain == "simplex":
        return RegularizerConfig.for_simplex(cfg.dimension, diameter_bound(cfg))
    return RegularizerConfig.for_ball(cfg.ball_radius, diameter_bound(cfg))


def _draw_integral_objective(
    cfg: ExperimentConfig, domain: PredictionDomain, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Integral objective plus its rescaling into the prediction domain.

    A positive scalar rescaling never changes the agent's maximizers, so the
    gap structure of the integral objective carries over (scaled by the same
    factor).
    """
    if isinstance(domain, Simplex):
        z = rng.integers(1, 11, size=cfg.dimension).astype(np.float64)
        return as_vector(z), as_vector(z / z.sum())
    assert isinstance(domain, Ball)
    for _ in range(cfg.retry_cap):
        z = rng.integers(5, 11, size=cfg.dimension).astype(np.float64)
        alpha = float(np.dot(z, domain.center) / np.dot(z, z))
        if alpha <= 0.0:
            continue
        candidate = alpha * z
        if np.linalg.norm(candidate - domain.center) <= 0.999 * domain.radius:
            return as_vector(z), as_vector(candidate)
    raise GenerationFailedError("no integral objective ray meets the ball")


def draw_objective(cfg: ExperimentConfig) -> tuple[np.ndarray, np.ndarray | None]:
    """The true objective (and its integral pre-image in integral gap mode)."""
    domain = build_domain(cfg)
    rng = np.random.default_rng([cfg.seed, 2])
    if cfg.gap_mode == "integral":
        integral, scaled = _draw_integral_objective(cfg, domain, rng)
        return scaled, integral
    return domain.sample(rng), None


def _sample_feasible_set(
    cfg: ExperimentConfig, rng: np.random.Generator
) -> FeasibleSet:
    # the hypercube family is handled as a per-stream fixed set
    n = cfg.dimension
    if cfg.family == "random-vertices":
        if cfg.integral_vertices or cfg.gap_mode == "integral":
            verts = rng.integers(0, 2, size=(cfg.num_vertices, n)).astype(np.float64)
        else:
            verts = rng.random((cfg.num_vertices, n))
        return ExplicitVertices(verts)
    if cfg.family == "knapsack":
        weights = rng.integers(0, 10, size=n)
        capacity = int(rng.integers(0, int(weights.sum()) + 1))
        return Knapsack(weights, capacity)
    num_nodes = min(n + 1, 8)
    arcs = [(i, i + 1) for i in range(num_nodes - 1)]
    while len(arcs) < n:
        u = int(rng.integers(0, num_nodes - 1))
        v = int(rng.integers(u + 1, num_nodes))
        arcs.append((u, v))
    return DagPaths(num_nodes, arcs)


def _has_unique_optimum(X: FeasibleSet, c: np.ndarray, cap: int) -> bool:
    values = X.members(cap) @ c
    best = values.max()
    return int(np.sum(values == best)) == 1


def _round_gap(X: FeasibleSet, c_star: np.ndarray, cfg: ExperimentConfig) -> float | None:
    """Gap margin of one set under c_star, or None when the optimum ties."""
    members = X.members(cfg.enumeration_cap)
    values = members @ c_star
    best_idx = int(np.argmax(values))
    best = values[best_idx]
    rest = np.delete(np.arange(members.shape[0]), best_idx)
    if rest.size == 0:
        return math.inf
    if np.any(values[rest] == best):
        return None
    diffs = members[best_idx][None, :] - members[rest]
    if cfg.domain == "simplex":
        dists = np.max(np.abs(diffs), axis=1)
    else:
        dists = np.sqrt(np.sum(diffs * diffs, axis=1))
    return float(np.min((best - values[rest]) / dists))


def uniform_member(
    X: FeasibleSet, rng: np.random.Generator, cap: int
) -> np.ndarray:
    """A uniformly random element; hypercubes avoid enumeration entirely."""
    if isinstance(X, Hypercube):
        return as_vector(rng.integers(0, 2, size=X.dimension).astype(np.float64))
    members = X.members(cap)
    return as_vector(members[int(rng.integers(0, members.shape[0]))])


def _accepts_gap(
    cfg: ExperimentConfig,
    X: FeasibleSet,
    c_star: np.ndarray,
    gap_reference: np.ndarray,
) -> bool:
    if cfg.gap_mode == "none":
        return True
    if cfg.gap_mode == "integral":
        return _has_unique_optimum(X, gap_reference, cfg.enumeration_cap)
    gap = _round_gap(X, c_star, cfg)
    return gap is not None and gap >= cfg.gap_margin


def _draw_set(
    cfg: ExperimentConfig,
    c_star: np.ndarray,
    gap_reference: np.ndarray,
    rng: np.random.Generator,
    budget: list[int],
    shared: FeasibleSet | None,
) -> FeasibleSet:
    while True:
        budget[0] -= 1
        if budget[0] < 0:
            raise GenerationFailedError("retry budget exhausted drawing sets")
        X = shared if shared is not None else _sample_feasible_set(cfg, rng)
        if _accepts_gap(cfg, X, c_star, gap_reference):
            return X
        if shared is not None:
            # the set cannot be redrawn, so the gap target is unreachable
            raise GenerationFailedError(
                "the fixed feasible set misses the gap target"
            )


def _fixed_set(
    cfg: ExperimentConfig,
    c_star: np.ndarray,
    gap_reference: np.ndarray,
) -> FeasibleSet | None:
    """The per-stream constant feasible set, or None for fresh draws.

    Derived from its own seed stream so samplers can rebuild it without
    replaying the observation draws.
    """
    if cfg.family == "hypercube":
        cube = Hypercube(cfg.dimension)
        if not _accepts_gap(cfg, cube, c_star, gap_reference):
            raise GenerationFailedError("the hypercube misses the gap target")
        return cube
    if cfg.fresh_sets:
        return None
    rng = np.random.default_rng([cfg.seed, 3])
    budget = [cfg.retry_cap]
    return _draw_set(cfg, c_star, gap_reference, rng, budget, None)


def _draw_round(
    cfg: ExperimentConfig,
    c_star: np.ndarray,
    gap_reference: np.ndarray,
    rng: np.random.Generator,
    budget: list[int],
    round_index: int,
    shared: FeasibleSet | None,
) -> Observation:
    X = (
        shared
        if shared is not None
        else _draw_set(cfg, c_star, gap_reference, rng, budget, None)
    )
    choice = argmax(X, c_star).maximizer
    if cfg.agent_noise > 0.0 and rng.random() < cfg.agent_noise:
        choice = uniform_member(X, rng, cfg.enumeration_cap)
    return Observation(X, choice, round_index)


def generate_instance_stream(cfg: ExperimentConfig) -> StreamBundle:
    """Draw the objective and the full observation stream for one run.

    Deterministic given the config: a repeated call produces bitwise-equal
    vectors.  Raises GenerationFailedError when gap-controlled rejection
    sampling exceeds the retry cap.
    """
    domain = build_domain(cfg)
    reg_config = build_reg_config(cfg)
    c_star, c_star_integral = draw_objective(cfg)
    gap_reference = c_star_integral if c_star_integral is not None else c_star
    shared = _fixed_set(cfg, c_star, gap_reference)
    rng = np.random.default_rng([cfg.seed, 0])
    budget = [cfg.retry_cap]
    observations = tuple(
        _draw_round(cfg, c_star, gap_reference, rng, budget, t, shared)
        for t in range(1, cfg.rounds + 1)
    )
    return StreamBundle(
        config=cfg,
        domain=domain,
        reg_config=reg_config,
        c_star=c_star,
        c_star_integral=c_star_integral,
        observations=observations,
    )


def make_observation_sampler(
    cfg: ExperimentConfig,
    c_star: np.ndarray,
    c_star_integral: np.ndarray | None,
) -> Callable[[np.random.Generator], Observation]:
    """Sampler drawing i.i.d. observations from the stream's distribution."""
    gap_reference = c_star_integral if c_star_integral is not None else c_star
    shared = _fixed_set(cfg, c_star, gap_reference)

    def sampler(rng: np.random.Generator) -> Observation:
        budget = [min(cfg.retry_cap, 10_000)]
        return _draw_round(cfg, c_star, gap_reference, rng, budget, 1, shared)

    return sampler
