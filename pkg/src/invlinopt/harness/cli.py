"""Command-line interface: run, sweep, certify, and eval subcommands."""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .. import analysis
from ..core import NormPair
from .config import build_config, load_config_file
from .generate import draw_objective, make_observation_sampler
from .io import fmt, read_stream, read_vector, write_summary
from .runner import run_experiment, run_sweep


def _add_experiment_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key-value config file")
    parser.add_argument("--seed", type=int, help="base RNG seed (mandatory)")
    parser.add_argument("--dimension", type=int)
    parser.add_argument("--rounds", type=int)
    parser.add_argument("--domain", choices=("simplex", "ball"))
    parser.add_argument("--schedule", choices=("adaptive", "offset"))
    parser.add_argument(
        "--family",
        choices=("random-vertices", "hypercube", "knapsack", "dag"),
    )
    parser.add_argument("--gap", dest="gap_mode", choices=("none", "integral", "margin"))
    parser.add_argument("--gap-margin", dest="gap_margin", type=float)
    parser.add_argument("--agent-noise", dest="agent_noise", type=float)
    parser.add_argument("--holdout", type=int)
    parser.add_argument("--num-vertices", dest="num_vertices", type=int)
    parser.add_argument("--integral-vertices", dest="integral_vertices",
                        action="store_const", const=True)
    parser.add_argument("--repeat-instance", dest="fresh_sets",
                        action="store_const", const=False,
                        help="draw one feasible set and face it every round")
    parser.add_argument("--ball-radius", dest="ball_radius", type=float)
    parser.add_argument("--save-stream", dest="save_stream",
                        action="store_const", const=True)
    parser.add_argument("--out")


_CONFIG_KEYS = (
    "seed", "dimension", "rounds", "domain", "schedule", "family",
    "gap_mode", "gap_margin", "agent_noise", "holdout", "num_vertices",
    "integral_vertices", "fresh_sets", "ball_radius", "save_stream", "out",
)


def _config_from_args(args: argparse.Namespace):
    file_values = load_config_file(args.config) if args.config else {}
    overrides = {key: getattr(args, key, None) for key in _CONFIG_KEYS}
    return build_config(file_values, **overrides)


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    result = run_experiment(cfg)
    print(f"status: {result.summary['status']}")
    print(f"regret: {fmt(result.ledger.linearized_regret())}")
    if result.summary["failed_checks"] != "none":
        print(f"failed: {result.summary['failed_checks']}")
    if result.summary_path:
        print(f"summary: {result.summary_path}")
    return result.exit_code


def _parse_int_list(text: str) -> list[int]:
    return [int(tok) for tok in text.split(",") if tok]


def _cmd_sweep(args: argparse.Namespace) -> int:
    if args.out is None:
        print("sweep requires --out", file=sys.stderr)
        return 2
    cfg = _config_from_args(args)
    rounds_list = _parse_int_list(args.rounds_list) if args.rounds_list else [cfg.rounds]
    dims = _parse_int_list(args.dimension_list) if args.dimension_list else [cfg.dimension]
    gaps = args.gap_list.split(",") if args.gap_list else [cfg.gap_mode]
    return run_sweep(cfg, rounds_list, dims, gaps, args.out)


def _cmd_certify(args: argparse.Namespace) -> int:
    observations, c_star = read_stream(args.stream)
    if c_star is None:
        print("stream file lacks a c_star line", file=sys.stderr)
        return 2
    norms = NormPair(args.norms)
    certificate = analysis.certify_gap(observations, c_star, norms, cap=args.cap)
    entries: dict = {"satisfied": certificate.satisfied,
                     "rounds": len(observations)}
    if certificate.satisfied:
        entries["delta"] = certificate.delta
        print(f"satisfied: delta = {fmt(certificate.delta)}")
    else:
        witness = certificate.witness
        entries["witness_round"] = witness.round_index
        entries["witness_reason"] = witness.reason
        entries["witness_value"] = witness.value
        print(f"not satisfied: round {witness.round_index} ({witness.reason})")
    if args.out:
        write_summary(args.out, entries)
    return 0 if certificate.satisfied else 1


def _cmd_eval(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    if cfg.holdout < 1:
        print("eval requires --holdout >= 1", file=sys.stderr)
        return 2
    prediction = read_vector(args.prediction)
    c_star, c_star_integral = draw_objective(cfg)
    sampler = make_observation_sampler(cfg, c_star, c_star_integral)
    evaluation = analysis.offline_evaluate(
        prediction, c_star, sampler, cfg.holdout,
        np.random.SeedSequence([cfg.seed, 1]),
    )
    entries = {
        "samples": evaluation.samples,
        "mean_model": evaluation.mean_model,
        "mean_reference": evaluation.mean_reference,
        "mean_gap": evaluation.mean_gap,
        "stderr_gap": evaluation.stderr_gap,
    }
    for key, value in entries.items():
        print(f"{key} = {fmt(value) if isinstance(value, float) else value}")
    if args.out:
        write_summary(args.out, entries)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="invlinopt",
        description=(
            "Online inference of linear objectives from observed decisions, "
            "with certified regret accounting."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment")
    _add_experiment_flags(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="grid of runs with derived seeds")
    _add_experiment_flags(p_sweep)
    p_sweep.add_argument("--rounds-list", help="comma-separated horizons")
    p_sweep.add_argument("--dimension-list", help="comma-separated dimensions")
    p_sweep.add_argument("--gap-list", help="comma-separated gap modes")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_certify = sub.add_parser("certify", help="gap-certify a stored stream")
    p_certify.add_argument("--stream", required=True)
    p_certify.add_argument("--norms", default=NormPair.LINF_L1,
                           choices=(NormPair.LINF_L1, NormPair.L2_L2))
    p_certify.add_argument("--cap", type=int, default=2 ** 20)
    p_certify.add_argument("--out")
    p_certify.set_defaults(func=_cmd_certify)

    p_eval = sub.add_parser("eval", help="holdout-evaluate a stored prediction")
    _add_experiment_flags(p_eval)
    p_eval.add_argument("--prediction", required=True)
    p_eval.set_defaults(func=_cmd_eval)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
