"""Experiment harness: configuration, generation, execution, and flat files."""

from .config import ExperimentConfig, build_config, load_config_file
from .generate import (
    GenerationFailedError,
    StreamBundle,
    generate_instance_stream,
    make_observation_sampler,
)
from .runner import RunResult, run_experiment, run_sweep, simulate

__all__ = [
    "ExperimentConfig",
    "GenerationFailedError",
    "RunResult",
    "StreamBundle",
    "build_config",
    "generate_instance_stream",
    "load_config_file",
    "make_observation_sampler",
    "run_experiment",
    "run_sweep",
    "simulate",
]
