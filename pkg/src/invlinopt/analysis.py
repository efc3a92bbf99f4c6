"""Round-by-round certification of regret identities and bounds.

A RegretLedger accumulates, per round, the linearized regret (which equals
the running total loss), the suboptimality-loss regret, and the squared
gradient norms.  The check_* functions assert the guarantees the learner is
supposed to satisfy at a given prefix, returning the measured slack instead
of a bare boolean so failures are diagnosable.  certify_gap computes the
exact per-instance margin between optimal and suboptimal actions by brute
force, and offline_evaluate measures holdout suboptimality of an averaged
prediction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import oracle
from .core import (
    DEFAULT_ENUMERATION_CAP,
    NormPair,
    Observation,
    TOL,
    as_vector,
    inner_product,
    tolerance,
)
from .learner import ADAPTIVE, OFFSET, RegularizerConfig, RoundRecord

ROOT_FIVE_QUARTERS = 2.0 ** 1.25  # 2^{5/4}


@dataclass(frozen=True)
class BoundCheck:
    """Outcome of one certified inequality: value <= bound up to tolerance.

    round is the prefix (or round) at which the slack was smallest; margin
    is bound - value there, without the tolerance folded in.
    """

    name: str
    round: int
    value: float
    bound: float
    passed: bool

    @property
    def margin(self) -> float:
        return self.bound - self.value


@dataclass(frozen=True, eq=False)
class GapWitness:
    """Why gap certification failed: a competitor matching the optimum."""

    round_index: int
    competitor: np.ndarray
    value: float
    reason: str


@dataclass(frozen=True, eq=False)
class GapCertificate:
    """Exact minimum margin-per-distance over all rounds, or a witness.

    delta is the smallest ratio <c_star, x_t - x'> / ||x_t - x'|| over all
    rounds t and all feasible x' != x_t.  Rounds whose feasible set is a
    singleton impose no constraint and contribute +inf.
    """

    satisfied: bool
    delta: float | None
    per_round_deltas: tuple[float, ...]
    witness: GapWitness | None


class RegretLedger:
    """Per-round accounting for one simulation run (true objective known).

    Appends are single-writer in round order; all reads are pure.
    """

    def __init__(
        self,
        c_star,
        norms: NormPair,
        config: RegularizerConfig,
        schedule: str,
    ):
        self.c_star = as_vector(c_star)
        self.norms = norms
        self.config = config
        self.schedule = schedule
        self.records: list[RoundRecord] = []
        self.observations: list[Observation] = []
        self._ell_sub: list[float] = []
        self._ell_est: list[float] = []
        self._ell_sub_ref: list[float] = []
        self._total: list[float] = []
        self._lin_inc: list[float] = []
        self._regret: list[float] = []
        self._regret_sub: list[float] = []
        self._sum_sq: list[float] = []
        self._beta: list[float] = []
        self._grad_norm: list[float] = []
        self.max_grad_norm = 0.0
        self.max_dual_distance = 0.0

    @property
    def rounds(self) -> int:
        return len(self.records)

    def append(self, obs: Observation, record: RoundRecord) -> None:
        if record.t != self.rounds + 1:
            raise ValueError(
                f"record for round {record.t} appended at position {self.rounds + 1}"
            )
        ref = oracle.argmax(obs.feasible_set, self.c_star)
        ell_sub_ref = inner_product(self.c_star, ref.maximizer - obs.agent_choice)
        lin_inc = inner_product(record.g, record.c_hat - self.c_star)
        ell_est = record.ell_est
        if ell_est is None:
            ell_est = inner_product(self.c_star, obs.agent_choice - record.x_hat)
        total = record.ell_sub + ell_est
        prev_r = self._regret[-1] if self._regret else 0.0
        prev_rs = self._regret_sub[-1] if self._regret_sub else 0.0
        prev_sq = self._sum_sq[-1] if self._sum_sq else 0.0
        self.records.append(record)
        self.observations.append(obs)
        self._ell_sub.append(record.ell_sub)
        self._ell_est.append(ell_est)
        self._ell_sub_ref.append(ell_sub_ref)
        self._total.append(total)
        self._lin_inc.append(lin_inc)
        self._regret.append(prev_r + lin_inc)
        self._regret_sub.append(prev_rs + (record.ell_sub - ell_sub_ref))
        self._sum_sq.append(prev_sq + record.grad_norm ** 2)
        self._beta.append(record.beta)
        self._grad_norm.append(record.grad_norm)
        self.max_grad_norm = max(self.max_grad_norm, record.grad_norm)
        self.max_dual_distance = max(
            self.max_dual_distance, self.norms.dual(record.c_hat - self.c_star)
        )

    def _at(self, values: list[float], t: int) -> float:
        if not 1 <= t <= self.rounds:
            raise ValueError(f"round {t} outside 1..{self.rounds}")
        return values[t - 1]

    def linearized_regret(self, t: int | None = None) -> float:
        return self._at(self._regret, self.rounds if t is None else t)

    def subopt_regret(self, t: int | None = None) -> float:
        return self._at(self._regret_sub, self.rounds if t is None else t)

    def sum_sq_grad(self, t: int | None = None) -> float:
        return self._at(self._sum_sq, self.rounds if t is None else t)

    def total_loss(self, t: int | None = None) -> float:
        t = self.rounds if t is None else t
        self._at(self._total, t)
        return float(np.sum(self._total[:t]))

    def arrays(self) -> dict[str, np.ndarray]:
        """Snapshot of all per-round columns as arrays (copies)."""
        return {
            "ell_sub": np.asarray(self._ell_sub),
            "ell_est": np.asarray(self._ell_est),
            "ell_sub_ref": np.asarray(self._ell_sub_ref),
            "total": np.asarray(self._total),
            "lin_inc": np.asarray(self._lin_inc),
            "regret": np.asarray(self._regret),
            "regret_sub": np.asarray(self._regret_sub),
            "sum_sq": np.asarray(self._sum_sq),
            "beta": np.asarray(self._beta),
            "grad_norm": np.asarray(self._grad_norm),
        }


def _require_schedule(ledger: RegretLedger, config: RegularizerConfig, schedule: str) -> None:
    if ledger.schedule != schedule:
        raise ValueError(
            f"check requires the {schedule!r} schedule, run used {ledger.schedule!r}"
        )
    if config != ledger.config:
        raise ValueError("config does not match the one the run used")


def _check(name: str, t: int, value: float, bound: float) -> BoundCheck:
    passed = value <= bound + tolerance(value, bound)
    return BoundCheck(name, t, value, bound, passed)


def adaptive_grad_bound(config: RegularizerConfig, sum_sq: float) -> float:
    """2^{5/4} * B * sqrt(sum of squared gradient norms / lam)."""
    return ROOT_FIVE_QUARTERS * config.B * math.sqrt(sum_sq / config.lam)


def adaptive_horizon_bound(config: RegularizerConfig, t: int) -> float:
    """2^{5/4} * K * B * sqrt(t / lam)."""
    return ROOT_FIVE_QUARTERS * config.K * config.B * math.sqrt(t / config.lam)


def offset_horizon_bound(config: RegularizerConfig, t: int) -> float:
    """2 * K * H * sqrt(t / lam)."""
    return 2.0 * config.K * config.H * math.sqrt(t / config.lam)


def gap_constant_bound(config: RegularizerConfig, delta: float) -> float:
    """2^{5/4} * K * B^3 / (lam^{3/2} * delta^2), independent of the horizon."""
    return (
        ROOT_FIVE_QUARTERS
        * config.K
        * config.B ** 3
        / (config.lam ** 1.5 * delta ** 2)
    )


def gap_contraction_coefficient(config: RegularizerConfig, delta: float) -> float:
    """K * B / (2^{5/4} * sqrt(lam) * delta^2)."""
    return config.K * config.B / (ROOT_FIVE_QUARTERS * math.sqrt(config.lam) * delta ** 2)


def check_adaptive_regret_bound(
    ledger: RegretLedger, config: RegularizerConfig, t: int
) -> list[BoundCheck]:
    """Regret at prefix t against both adaptive-schedule bounds."""
    _require_schedule(ledger, config, ADAPTIVE)
    r = ledger.linearized_regret(t)
    return [
        _check("adaptive_grad_bound", t, r, adaptive_grad_bound(config, ledger.sum_sq_grad(t))),
        _check("adaptive_horizon_bound", t, r, adaptive_horizon_bound(config, t)),
    ]


def check_offset_regret_bound(
    ledger: RegretLedger, config: RegularizerConfig, t: int
) -> BoundCheck:
    """Regret at prefix t against the offset-schedule horizon bound."""
    _require_schedule(ledger, config, OFFSET)
    return _check(
        "offset_horizon_bound", t, ledger.linearized_regret(t), offset_horizon_bound(config, t)
    )


def check_gap_residual_bound(
    ledger: RegretLedger, config: RegularizerConfig, delta: float, t: int
) -> BoundCheck:
    """Per-round contraction: ||g_t||^2 <= coef(delta) * <g_t, c_hat_t - c_star>."""
    if config != ledger.config:
        raise ValueError("config does not match the one the run used")
    arrays = ledger.arrays()
    lhs = float(arrays["grad_norm"][t - 1]) ** 2
    rhs = gap_contraction_coefficient(config, delta) * float(arrays["lin_inc"][t - 1])
    return _check("gap_residual_bound", t, lhs, rhs)


def check_gap_gradient_sum_bound(
    ledger: RegretLedger, config: RegularizerConfig, delta: float, t: int
) -> BoundCheck:
    """Aggregate contraction: sum of ||g||^2 <= coef(delta) * regret at t."""
    if config != ledger.config:
        raise ValueError("config does not match the one the run used")
    lhs = ledger.sum_sq_grad(t)
    rhs = gap_contraction_coefficient(config, delta) * ledger.linearized_regret(t)
    return _check("gap_gradient_sum_bound", t, lhs, rhs)


def check_gap_constant_regret_bound(
    ledger: RegretLedger, config: RegularizerConfig, delta: float, t: int
) -> BoundCheck:
    """Regret at prefix t against the horizon-independent gap bound."""
    if config != ledger.config:
        raise ValueError("config does not match the one the run used")
    return _check(
        "gap_constant_bound", t, ledger.linearized_regret(t), gap_constant_bound(config, delta)
    )


def check_total_loss_identity(ledger: RegretLedger, t: int) -> BoundCheck:
    """|regret - accumulated total loss| <= 1e-9 * t at prefix t."""
    diff = abs(ledger.linearized_regret(t) - ledger.total_loss(t))
    return _check("total_loss_identity", t, diff, TOL * t)


def check_regret_ordering(ledger: RegretLedger, t: int) -> BoundCheck:
    """Suboptimality regret never exceeds the linearized regret (up to t*tol)."""
    r = ledger.linearized_regret(t)
    rs = ledger.subopt_regret(t)
    return _check("regret_ordering", t, rs, r + tolerance(r, rs) * t)


def check_per_round_linearization(ledger: RegretLedger, t: int) -> BoundCheck:
    """Loss difference at round t is below its linearization."""
    arrays = ledger.arrays()
    lhs = float(arrays["ell_sub"][t - 1] - arrays["ell_sub_ref"][t - 1])
    rhs = float(arrays["lin_inc"][t - 1])
    return _check("per_round_linearization", t, lhs, rhs)


def check_loss_plateau(ledger: RegretLedger, burn_in: int) -> BoundCheck:
    """Total loss over rounds (T/2, T] stays within 1e-9 * T of zero.

    Only meaningful for runs of at least burn_in rounds on gap-certified
    instances with optimal agents, where the regret is horizon-independent.
    """
    t = ledger.rounds
    if t < burn_in:
        raise ValueError(f"plateau check needs at least {burn_in} rounds, got {t}")
    late = ledger.total_loss(t) - ledger.total_loss(t // 2)
    return _check("loss_plateau", t, late, TOL * t)


def _worst(name: str, lhs: np.ndarray, rhs: np.ndarray, rounds: np.ndarray) -> BoundCheck:
    tol = TOL * (1.0 + np.maximum(np.abs(lhs), np.abs(rhs)))
    slack = rhs + tol - lhs
    worst = int(np.argmin(slack))
    return BoundCheck(
        name,
        int(rounds[worst]),
        float(lhs[worst]),
        float(rhs[worst]),
        bool(np.all(slack >= 0.0)),
    )


def verify_run(
    ledger: RegretLedger,
    config: RegularizerConfig,
    delta: float | None = None,
    gap_checks: bool = False,
    plateau_burn_in: int | None = None,
) -> list[BoundCheck]:
    """Evaluate every applicable certified inequality at every prefix.

    Returns one BoundCheck per inequality, reporting the prefix (or round)
    with the smallest slack; passed is False if any prefix failed.
    """
    if config != ledger.config:
        raise ValueError("config does not match the one the run used")
    n = ledger.rounds
    if n == 0:
        raise ValueError("empty run")
    a = ledger.arrays()
    t = np.arange(1, n + 1, dtype=np.float64)
    regret = a["regret"]
    checks: list[BoundCheck] = []

    diff = np.abs(regret - np.cumsum(a["total"]))
    checks.append(_worst("total_loss_identity", diff, TOL * t, t))
    checks.append(
        _worst("per_round_linearization", a["ell_sub"] - a["ell_sub_ref"], a["lin_inc"], t)
    )
    scale = np.maximum(np.abs(regret), np.abs(a["regret_sub"]))
    checks.append(
        _worst("regret_ordering", a["regret_sub"], regret + TOL * (1.0 + scale) * t, t)
    )

    if ledger.schedule == ADAPTIVE:
        grad_bound = ROOT_FIVE_QUARTERS * config.B * np.sqrt(a["sum_sq"] / config.lam)
        horizon = ROOT_FIVE_QUARTERS * config.K * config.B * np.sqrt(t / config.lam)
        checks.append(_worst("adaptive_grad_bound", regret, grad_bound, t))
        checks.append(_worst("adaptive_horizon_bound", regret, horizon, t))
    else:
        horizon = 2.0 * config.K * config.H * np.sqrt(t / config.lam)
        checks.append(_worst("offset_horizon_bound", regret, horizon, t))

    if gap_checks:
        if delta is None or not delta > 0.0:
            raise ValueError("gap checks need a certified positive delta")
        coef = gap_contraction_coefficient(config, delta)
        checks.append(
            _worst("gap_residual_bound", a["grad_norm"] ** 2, coef * a["lin_inc"], t)
        )
        checks.append(_worst("gap_gradient_sum_bound", a["sum_sq"], coef * regret, t))
        constant = np.full(n, gap_constant_bound(config, delta))
        checks.append(_worst("gap_constant_bound", regret, constant, t))
        if plateau_burn_in is not None and n >= plateau_burn_in:
            checks.append(check_loss_plateau(ledger, plateau_burn_in))
    return checks


def certify_gap(
    observations: Sequence[Observation],
    c_star,
    norms: NormPair,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> GapCertificate:
    """Exact gap margin by exhaustive enumeration of every feasible set.

    Requires each observed choice to be the unique exact maximizer of
    c_star over its feasible set; otherwise returns a witness.  The margin
    is min over rounds and competitors of the objective loss per unit of
    primal-norm distance.
    """
    c_star = as_vector(c_star)
    per_round: list[float] = []
    for obs in observations:
        members = obs.feasible_set.members(cap)
        values = members @ c_star
        x = obs.agent_choice
        value_x = inner_product(c_star, x)
        is_x = np.all(members == x, axis=1)
        if not np.any(is_x):
            raise ValueError(
                f"round {obs.round_index}: choice missing from the enumeration"
            )
        others = members[~is_x]
        other_values = values[~is_x]
        if other_values.size == 0:
            per_round.append(math.inf)
            continue
        worst = int(np.argmax(other_values))
        if other_values[worst] >= value_x:
            reason = (
                "tied-optimum"
                if other_values[worst] == value_x
                else "agent-suboptimal"
            )
            return GapCertificate(
                satisfied=False,
                delta=None,
                per_round_deltas=tuple(per_round),
                witness=GapWitness(
                    obs.round_index,
                    as_vector(others[worst]),
                    float(other_values[worst]),
                    reason,
                ),
            )
        diffs = x[None, :] - others
        if norms.kind == NormPair.LINF_L1:
            dists = np.max(np.abs(diffs), axis=1)
        else:
            dists = np.sqrt(np.sum(diffs * diffs, axis=1))
        ratios = (value_x - other_values) / dists
        per_round.append(float(ratios.min()))
    if not per_round:
        raise ValueError("no observations to certify")
    return GapCertificate(
        satisfied=True,
        delta=float(min(per_round)),
        per_round_deltas=tuple(per_round),
        witness=None,
    )


def average_prediction(records: Sequence[RoundRecord]) -> np.ndarray:
    """Coordinate-wise mean of the per-round predictions."""
    if len(records) == 0:
        raise ValueError("cannot average an empty run")
    stacked = np.stack([r.c_hat for r in records])
    return as_vector(stacked.mean(axis=0))


@dataclass(frozen=True)
class OfflineEvaluation:
    """Monte-Carlo holdout suboptimality of a prediction and the reference.

    mean_gap and stderr_gap are for the paired per-sample differences
    (model loss minus reference loss), which is what generalization
    assertions should use.
    """

    mean_model: float
    mean_reference: float
    mean_gap: float
    stderr_gap: float
    samples: int


def offline_evaluate(
    c_bar,
    c_star,
    sampler: Callable[[np.random.Generator], Observation],
    m: int,
    seed,
) -> OfflineEvaluation:
    """Evaluate mean suboptimality losses of c_bar and c_star on m samples."""
    if m < 1:
        raise ValueError("need at least one sample")
    c_bar = as_vector(c_bar)
    c_star = as_vector(c_star)
    rng = np.random.default_rng(seed)
    model = np.empty(m)
    reference = np.empty(m)
    for i in range(m):
        obs = sampler(rng)
        x = obs.agent_choice
        res_model = oracle.argmax(obs.feasible_set, c_bar)
        res_ref = oracle.argmax(obs.feasible_set, c_star)
        model[i] = inner_product(c_bar, res_model.maximizer - x)
        reference[i] = inner_product(c_star, res_ref.maximizer - x)
    gaps = model - reference
    stderr = float(gaps.std(ddof=1) / math.sqrt(m)) if m > 1 else 0.0
    return OfflineEvaluation(
        mean_model=float(model.mean()),
        mean_reference=float(reference.mean()),
        mean_gap=float(gaps.mean()),
        stderr_gap=stderr,
        samples=m,
    )
