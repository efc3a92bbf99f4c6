"""Experiment execution: the online loop, certification, and file outputs.

The protocol per round is strict: predict, then observe, then update, so a
prediction never depends on the current or future observations.  The exit
status is nonzero exactly when some applicable certified inequality failed;
every failed check is named in the summary.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .. import analysis, learner, oracle
from ..core import Observation, clamp_small_negative, tolerance
from ..learner import ADAPTIVE, LearnerState
from .config import ExperimentConfig
from .generate import (
    StreamBundle,
    diameter_bound,
    generate_instance_stream,
    make_observation_sampler,
)
from .io import TRACE_COLUMNS, fmt, write_stream, write_summary, write_trace, write_vector


@dataclass(frozen=True, eq=False)
class RunResult:
    """Everything a caller might want to inspect after a run."""

    exit_code: int
    config: ExperimentConfig
    bundle: StreamBundle
    ledger: analysis.RegretLedger
    checks: list[analysis.BoundCheck]
    certificate: analysis.GapCertificate | None
    integral_certificate: analysis.GapCertificate | None
    evaluation: analysis.OfflineEvaluation | None
    average_prediction: np.ndarray
    summary: dict
    trace_path: str | None
    summary_path: str | None


def simulate(
    bundle: StreamBundle, observations: Sequence[Observation] | None = None
) -> tuple[LearnerState, analysis.RegretLedger]:
    """Run the online loop over a stream; pure given its inputs.

    Pass a different observation sequence to replay the same learner setup
    on modified data (used by the protocol-order tests).
    """
    if observations is None:
        observations = bundle.observations
    state = learner.init_learner(
        bundle.domain, bundle.reg_config, bundle.config.schedule
    )
    ledger = analysis.RegretLedger(
        bundle.c_star,
        bundle.domain.norm_pair,
        bundle.reg_config,
        bundle.config.schedule,
    )
    for obs in observations:
        result = oracle.argmax(obs.feasible_set, state.current_prediction)
        state, record = learner.observe(
            state, obs, result.maximizer, c_star=bundle.c_star
        )
        ledger.append(obs, record)
    return state, ledger


def trace_rows(
    ledger: analysis.RegretLedger,
    delta: float | None = None,
) -> list[list[str]]:
    """Render the per-round trace with the applicable running bound columns."""
    cfg = ledger.config
    arrays = ledger.arrays()
    adaptive = ledger.schedule == ADAPTIVE
    rows = []
    for i in range(ledger.rounds):
        t = i + 1
        row = [
            str(t),
            fmt(arrays["ell_sub"][i]),
            fmt(arrays["ell_est"][i]),
            fmt(arrays["total"][i]),
            fmt(arrays["regret"][i]),
            fmt(arrays["regret_sub"][i]),
            fmt(arrays["beta"][i]),
            fmt(arrays["grad_norm"][i]),
            fmt(analysis.adaptive_grad_bound(cfg, arrays["sum_sq"][i])) if adaptive else "",
            fmt(analysis.adaptive_horizon_bound(cfg, t)) if adaptive else "",
            fmt(analysis.offset_horizon_bound(cfg, t)) if not adaptive else "",
            fmt(analysis.gap_constant_bound(cfg, delta)) if delta else "",
        ]
        rows.append(row)
    return rows


def _summary_entries(
    cfg: ExperimentConfig,
    ledger: analysis.RegretLedger,
    checks: list[analysis.BoundCheck],
    certificate: analysis.GapCertificate | None,
    integral_certificate: analysis.GapCertificate | None,
    evaluation: analysis.OfflineEvaluation | None,
    skipped: dict[str, str],
) -> dict:
    entries: dict = {}
    failed = [c.name for c in checks if not c.passed]
    entries["status"] = "ok" if not failed else "failed"
    entries["failed_checks"] = ",".join(failed) if failed else "none"
    for key in (
        "seed", "dimension", "rounds", "domain", "schedule", "family",
        "agent_noise", "gap_mode", "gap_margin", "holdout", "num_vertices",
        "integral_vertices", "ball_radius",
    ):
        entries[f"config.{key}"] = getattr(cfg, key)
    entries["result.regret"] = ledger.linearized_regret()
    entries["result.regret_sub"] = ledger.subopt_regret()
    entries["result.total_loss"] = ledger.total_loss()
    entries["result.sum_sq_grad"] = ledger.sum_sq_grad()
    entries["result.final_ell_sub"] = clamp_small_negative(
        ledger.arrays()["ell_sub"][-1]
    )
    entries["empirical.max_grad_norm"] = ledger.max_grad_norm
    entries["empirical.max_dual_distance"] = ledger.max_dual_distance
    for check in checks:
        entries[f"check.{check.name}"] = "pass" if check.passed else "fail"
        entries[f"check.{check.name}.round"] = check.round
        entries[f"check.{check.name}.value"] = check.value
        entries[f"check.{check.name}.bound"] = check.bound
        entries[f"check.{check.name}.margin"] = check.margin
    if certificate is not None:
        entries["gap.satisfied"] = certificate.satisfied
        if certificate.satisfied:
            entries["gap.delta"] = certificate.delta
        elif certificate.witness is not None:
            entries["gap.witness_round"] = certificate.witness.round_index
            entries["gap.witness_reason"] = certificate.witness.reason
    if integral_certificate is not None and integral_certificate.satisfied:
        entries["gap.integral_delta"] = integral_certificate.delta
    if evaluation is not None:
        entries["offline.samples"] = evaluation.samples
        entries["offline.mean_model"] = evaluation.mean_model
        entries["offline.mean_reference"] = evaluation.mean_reference
        entries["offline.mean_gap"] = evaluation.mean_gap
        entries["offline.stderr_gap"] = evaluation.stderr_gap
    for name, reason in skipped.items():
        entries[f"skipped.{name}"] = reason
    return entries


def run_experiment(cfg: ExperimentConfig) -> RunResult:
    """Generate, simulate, certify, and (when configured) write outputs."""
    bundle = generate_instance_stream(cfg)
    state, ledger = simulate(bundle)
    skipped: dict[str, str] = {}

    certificate = None
    integral_certificate = None
    delta = None
    gap_checks = False
    if cfg.gap_mode != "none":
        if cfg.agent_noise > 0.0:
            skipped["gap_checks"] = "agent is noisy, optimal choices required"
        else:
            certificate = analysis.certify_gap(
                bundle.observations,
                bundle.c_star,
                bundle.domain.norm_pair,
                cap=cfg.enumeration_cap,
            )
            if certificate.satisfied:
                delta = certificate.delta
                gap_checks = True
            if bundle.c_star_integral is not None:
                integral_certificate = analysis.certify_gap(
                    bundle.observations,
                    bundle.c_star_integral,
                    bundle.domain.norm_pair,
                    cap=cfg.enumeration_cap,
                )

    checks = analysis.verify_run(
        ledger,
        bundle.reg_config,
        delta=delta,
        gap_checks=gap_checks,
        plateau_burn_in=cfg.plateau_burn_in if gap_checks else None,
    )
    if cfg.gap_mode != "none" and cfg.agent_noise == 0.0:
        assert certificate is not None
        checks.append(
            analysis.BoundCheck(
                "gap_certified", ledger.rounds, 0.0, 0.0, certificate.satisfied
            )
        )
        if integral_certificate is not None:
            # integral vertex sets with an integral objective and a unique
            # optimum have margin at least 1 / K
            floor = 1.0 / diameter_bound(cfg)
            value = (
                integral_certificate.delta
                if integral_certificate.satisfied
                else float("-inf")
            )
            checks.append(
                analysis.BoundCheck(
                    "integral_gap_floor",
                    ledger.rounds,
                    floor,
                    value if value is not None else float("-inf"),
                    integral_certificate.satisfied
                    and value + tolerance(value, floor) >= floor,
                )
            )

    averaged = analysis.average_prediction(ledger.records)
    evaluation = None
    if cfg.holdout > 0:
        sampler = make_observation_sampler(cfg, bundle.c_star, bundle.c_star_integral)
        evaluation = analysis.offline_evaluate(
            averaged,
            bundle.c_star,
            sampler,
            cfg.holdout,
            np.random.SeedSequence([cfg.seed, 1]),
        )
        budget = ledger.subopt_regret() / ledger.rounds
        slack = 3.0 * evaluation.stderr_gap + tolerance(evaluation.mean_gap, budget)
        checks.append(
            analysis.BoundCheck(
                "holdout_generalization",
                ledger.rounds,
                evaluation.mean_gap,
                budget + slack,
                evaluation.mean_gap <= budget + slack,
            )
        )

    summary = _summary_entries(
        cfg, ledger, checks, certificate, integral_certificate, evaluation, skipped
    )
    exit_code = 0 if summary["status"] == "ok" else 1

    trace_path = summary_path = None
    if cfg.out is not None:
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        trace_path = str(out / "trace.csv")
        summary_path = str(out / "summary.txt")
        write_trace(trace_path, trace_rows(ledger, delta))
        write_summary(summary_path, summary)
        write_vector(out / "prediction.txt", averaged)
        if cfg.save_stream:
            write_stream(
                out / "stream.txt",
                bundle.observations,
                bundle.c_star,
                cap=cfg.enumeration_cap,
            )

    return RunResult(
        exit_code=exit_code,
        config=cfg,
        bundle=bundle,
        ledger=ledger,
        checks=checks,
        certificate=certificate,
        integral_certificate=integral_certificate,
        evaluation=evaluation,
        average_prediction=averaged,
        summary=summary,
        trace_path=trace_path,
        summary_path=summary_path,
    )


def run_sweep(
    base: ExperimentConfig,
    rounds_list: Sequence[int],
    dimension_list: Sequence[int],
    gap_list: Sequence[str],
    out_dir,
) -> int:
    """Grid of runs with derived seeds base.seed + i; returns the worst status.

    Trials are isolated (fresh learner and stream per trial) and written to
    per-trial directories plus a sweep_index.csv.
    """
    from dataclasses import replace

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    index_lines = [
        "trial,dir,seed,dimension,rounds,gap_mode,exit,regret,regret_sub"
    ]
    worst = 0
    trial = 0
    for rounds in rounds_list:
        for dimension in dimension_list:
            for gap_mode in gap_list:
                name = f"trial{trial:03d}_n{dimension}_T{rounds}_gap{gap_mode}"
                cfg = replace(
                    base,
                    seed=base.seed + trial,
                    rounds=int(rounds),
                    dimension=int(dimension),
                    gap_mode=gap_mode,
                    out=str(out / name),
                )
                result = run_experiment(cfg)
                worst = max(worst, result.exit_code)
                index_lines.append(
                    ",".join(
                        [
                            str(trial),
                            name,
                            str(cfg.seed),
                            str(dimension),
                            str(rounds),
                            gap_mode,
                            str(result.exit_code),
                            fmt(result.ledger.linearized_regret()),
                            fmt(result.ledger.subopt_regret()),
                        ]
                    )
                )
                trial += 1
    (out / "sweep_index.csv").write_text("\n".join(index_lines) + "\n")
    return worst
