"""Two-player sampling game: pluggable adversaries against the sum sampler.

Each round the adversary emits an item and either an explicit sampling
probability or ``None`` to delegate to the sampler's own estimate-based
rule.  A referee validates every move before it reaches the sampler:
items must be non-negative, the running sum must stay within the
delta_cap budget, and any *explicit* probability must respect the game's
legality rule, which is stated against the true running sum (information
the sampler itself never has).  Strategies observe only the per-round
records (item, probability, coin, contribution) — never the generator
state — so adaptivity is limited to algorithm outputs by construction.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Protocol, Sequence

import numpy as np

from .sampling import OnlineSumSampler, SamplerConfig, StepRecord
from .seeding import derive_seed

_GAME_RTOL = 1e-12


class IllegalMoveError(ValueError):
    """An adversary move rejected by the referee."""

    def __init__(self, round_index: int, constraint: str):
        self.round_index = round_index
        self.constraint = constraint
        super().__init__(f"illegal move at round {round_index}: {constraint}")


class AdversaryStrategy(Protocol):
    """Behavioral interface for adversaries.

    ``next_move`` receives the visible transcript (records of all previous
    rounds) and returns ``(x, p)`` where ``x >= 0`` and ``p`` is either an
    explicit probability in (0, 1] or ``None`` for the sampler's default
    rule.  Implementations must not mutate the history.
    """

    def next_move(self, history: Sequence[StepRecord]) -> tuple[float, float | None]: ...


@dataclass(frozen=True)
class GameRound:
    """One game round: the step record plus both running sums."""

    t: int
    x: float
    p: float
    coin: bool
    x_tilde: float
    true_sum: float
    estimate: float
    p_explicit: bool

    @property
    def rel_error(self) -> float:
        if self.true_sum == 0.0:
            return 0.0
        return abs(self.estimate - self.true_sum) / self.true_sum


@dataclass
class GameTranscript:
    """Full record of one game, with win/lose evaluated at every prefix."""

    config: SamplerConfig
    rounds: list[GameRound]
    outcome: str  # "win" or "lose"
    first_violation_round: int | None
    sample_count: int

    @property
    def won(self) -> bool:
        return self.outcome == "win"

    @property
    def max_rel_error(self) -> float:
        return max((r.rel_error for r in self.rounds), default=0.0)


def play_game(
    strategy: AdversaryStrategy,
    config: SamplerConfig,
    horizon: int,
    rng: np.random.Generator | int | None = None,
) -> GameTranscript:
    """Referee ``horizon`` rounds of strategy vs. sampler.

    The sampler wins iff the estimate stays within (1 +- epsilon) of the
    true running sum at *every* prefix.  Raises ``IllegalMoveError`` on the
    first invalid adversary move (negative item, budget exceeded, or an
    explicit probability below the true-sum legality bound).
    """
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    sampler = OnlineSumSampler(config, rng)
    history: list[StepRecord] = []
    rounds: list[GameRound] = []
    true_sum = 0.0
    x1: float | None = None

    for t in range(1, horizon + 1):
        x, p = strategy.next_move(history)
        if not (isinstance(x, (int, float)) and math.isfinite(x) and x >= 0.0):
            raise IllegalMoveError(t, f"item must be finite and non-negative, got {x}")
        x = float(x)
        if x > 0.0:
            x1_eff = x1 if x1 is not None else x
            if (true_sum + x) / x1_eff > config.delta_cap * (1.0 + _GAME_RTOL):
                raise IllegalMoveError(
                    t,
                    f"delta_cap exceeded: ({true_sum} + {x}) / {x1_eff} > {config.delta_cap}",
                )
        if p is not None:
            p = float(p)
            if not (0.0 < p <= 1.0):
                raise IllegalMoveError(t, f"probability must be in (0, 1], got {p}")
            if x > 0.0:
                bound = min(1.0, config.amp * x / (true_sum + x))
                if p < bound * (1.0 - _GAME_RTOL):
                    raise IllegalMoveError(
                        t, f"probability {p} below game bound {bound}"
                    )

        record = sampler.step(x, p_override=p)
        true_sum += x
        if x > 0.0 and x1 is None:
            x1 = x
        history.append(record)
        rounds.append(
            GameRound(
                t=t,
                x=record.x,
                p=record.p,
                coin=record.coin,
                x_tilde=record.x_tilde,
                true_sum=true_sum,
                estimate=sampler.estimate,
                p_explicit=p is not None,
            )
        )

    outcome = "win"
    first_violation: int | None = None
    eps = config.epsilon
    for r in rounds:
        if abs(r.estimate - r.true_sum) > eps * r.true_sum:
            outcome = "lose"
            first_violation = r.t
            break
    return GameTranscript(
        config=config,
        rounds=rounds,
        outcome=outcome,
        first_violation_round=first_violation,
        sample_count=sampler.state.sample_count,
    )


# ---------------------------------------------------------------------------
# Built-in strategies
# ---------------------------------------------------------------------------


class OnesStrategy:
    """Oblivious all-ones stream with the sampler's default probabilities."""

    def __init__(self, config: SamplerConfig):
        self._budget_used = 0.0
        self._cap = config.delta_cap

    def next_move(self, history: Sequence[StepRecord]) -> tuple[float, float | None]:
        if self._budget_used + 1.0 > self._cap:
            return 0.0, None
        self._budget_used += 1.0
        return 1.0, None


class GeometricStrategy:
    """Doubling stream 1, 2, 4, ... until the budget is spent, then zeros.

    Each item is at least the sum of everything before it, so the default
    probability rule forces p = 1 whenever amp >= 2 and every item is kept.
    """

    def __init__(self, config: SamplerConfig):
        self._next = 1.0
        self._sum = 0.0
        self._cap = config.delta_cap

    def next_move(self, history: Sequence[StepRecord]) -> tuple[float, float | None]:
        if self._sum + self._next > self._cap:  # first item is 1, so budget = cap
            return 0.0, None
        x = self._next
        self._sum += x
        self._next *= 2.0
        return x, None


class AlwaysKeepStrategy:
    """Zero-variance baseline: all-ones items, explicit p = 1 each round."""

    def __init__(self, config: SamplerConfig):
        self._budget_used = 0.0
        self._cap = config.delta_cap

    def next_move(self, history: Sequence[StepRecord]) -> tuple[float, float | None]:
        if self._budget_used + 1.0 > self._cap:
            return 0.0, 1.0
        self._budget_used += 1.0
        return 1.0, 1.0


@dataclass
class _AdversaryView:
    """Running quantities an adversary can reconstruct from the transcript."""

    true_sum: float = 0.0
    estimate: float = 0.0
    x1: float | None = None
    n_seen: int = 0

    def absorb(self, history: Sequence[StepRecord]) -> None:
        for record in history[self.n_seen :]:
            self.true_sum += record.x
            self.estimate += record.x_tilde
            if self.x1 is None and record.x > 0.0:
                self.x1 = record.x
            self.n_seen += 1


class DominantStrategy:
    """Adaptive adversary that plays a proposed item only while profitable.

    Each round an inner proposer suggests a candidate value within the
    remaining delta_cap budget.  The candidate is played with probability
    ``min(2 * amp * x / (x + estimate), 1)`` whenever that choice is legal
    with respect to the true running sum, which holds exactly when
    ``x >= estimate - 2 * true_sum``; otherwise the round is a zero no-op.
    Once the sampler's estimate has drifted outside the accuracy band the
    adversary has already won, so skipping rounds costs it nothing.
    """

    def __init__(self, config: SamplerConfig, proposer: Callable[[_AdversaryView, float], float]):
        self.config = config
        self.proposer = proposer
        self._view = _AdversaryView()

    def next_move(self, history: Sequence[StepRecord]) -> tuple[float, float | None]:
        view = self._view
        view.absorb(history)
        if view.x1 is None:
            budget = math.inf  # first nonzero item sets the scale; any value is legal
        else:
            budget = self.config.delta_cap * view.x1 - view.true_sum
        chi = self.proposer(view, budget)
        if chi <= 0.0 or budget <= 0.0:
            return 0.0, 1.0
        chi = min(chi, budget) if budget != math.inf else chi
        if chi < view.estimate - 2.0 * view.true_sum:
            return 0.0, 1.0
        denom = chi + view.estimate
        p = 1.0 if denom <= 0.0 else min(2.0 * self.config.amp * chi / denom, 1.0)
        return chi, p


def _propose_max_greedy(view: _AdversaryView, budget: float) -> float:
    # Spend the whole remaining budget at once.
    if view.x1 is None:
        return 1.0
    return budget


def _propose_ratio_greedy(view: _AdversaryView, budget: float, amp: float) -> float:
    # Smallest candidate whose played probability is already 1, i.e. the
    # cheapest way to maximize the instantaneous probability.
    if view.x1 is None:
        return 1.0
    if view.estimate <= 0.0:
        return min(budget, view.x1)
    return min(budget, view.estimate / (2.0 * amp - 1.0))


def _propose_error_chaser(view: _AdversaryView, budget: float) -> float:
    # Pile on mass while the estimate lags the truth, otherwise probe with
    # a vanishing item so future undershoot stays likely.
    if view.x1 is None:
        return 1.0
    if view.estimate < view.true_sum:
        return budget
    return min(budget, 1e-6 * view.x1)


def make_strategy(name: str, config: SamplerConfig) -> AdversaryStrategy:
    """Instantiate a built-in strategy by registry name."""
    if name == "ones":
        return OnesStrategy(config)
    if name == "geometric":
        return GeometricStrategy(config)
    if name == "always-keep":
        return AlwaysKeepStrategy(config)
    if name == "max-greedy":
        return DominantStrategy(config, _propose_max_greedy)
    if name == "ratio-greedy":
        amp = config.amp
        return DominantStrategy(config, lambda view, budget: _propose_ratio_greedy(view, budget, amp))
    if name == "error-chaser":
        return DominantStrategy(config, _propose_error_chaser)
    raise ValueError(f"unknown strategy {name!r}; choose one of {sorted(STRATEGIES)}")


STRATEGIES = ("ones", "geometric", "always-keep", "max-greedy", "ratio-greedy", "error-chaser")


# ---------------------------------------------------------------------------
# Transcript auditing
# ---------------------------------------------------------------------------


def audit_transcript(transcript: GameTranscript, rtol: float = 1e-12) -> list[str]:
    """Check per-round arithmetic invariants on a finished game.

    Verifies, for every round: the two-outcome unbiasedness identity
    ``p * (x / p) == x``; the variance bound ``x^2 / p - x^2 <=
    (x / amp) * (x + estimate_before)``; the game legality bound for rounds
    where the adversary supplied the probability; and monotonicity of the
    running sums.  Returns a list of human-readable violations (empty if
    the transcript is clean).
    """
    amp = transcript.config.amp
    problems: list[str] = []
    prev_true = 0.0
    prev_estimate = 0.0
    for r in transcript.rounds:
        if r.x > 0.0:
            expected = r.p * (r.x / r.p)
            if abs(expected - r.x) > rtol * r.x:
                problems.append(f"round {r.t}: E[x_tilde] = {expected} != x = {r.x}")
            variance = r.x**2 / r.p - r.x**2
            bound = (r.x / amp) * (r.x + prev_estimate)
            if variance > bound * (1.0 + rtol) + 1e-300:
                problems.append(
                    f"round {r.t}: variance {variance} exceeds bound {bound}"
                )
            if r.p_explicit:
                legal = min(1.0, amp * r.x / r.true_sum)
                if r.p < legal * (1.0 - rtol):
                    problems.append(
                        f"round {r.t}: explicit p {r.p} below game bound {legal}"
                    )
        if r.coin:
            expected_contrib = r.x / r.p
            if abs(r.x_tilde - expected_contrib) > rtol * max(expected_contrib, 1.0):
                problems.append(f"round {r.t}: x_tilde {r.x_tilde} != x/p")
        elif r.x_tilde != 0.0:
            problems.append(f"round {r.t}: dropped item has x_tilde {r.x_tilde}")
        if r.true_sum < prev_true - rtol:
            problems.append(f"round {r.t}: true running sum decreased")
        prev_true = r.true_sum
        prev_estimate = r.estimate
    return problems


# ---------------------------------------------------------------------------
# Trial harness
# ---------------------------------------------------------------------------


@dataclass
class TrialStats:
    """Aggregate of a batch of independent games (one strategy, many seeds)."""

    strategy: str
    config: SamplerConfig
    horizon: int
    master_seed: int
    n_trials: int
    wins: int
    max_rel_error: float
    mean_samples: float
    max_samples: int
    audit_failures: int
    outcomes: list[str]

    @property
    def win_rate(self) -> float:
        return self.wins / self.n_trials

    def to_dict(self) -> dict:
        return {
            "win_rate": self.win_rate,
            "n_trials": self.n_trials,
            "max_rel_error": self.max_rel_error,
            "mean_samples": self.mean_samples,
            "max_samples": self.max_samples,
            "config": {
                **self.config.to_dict(),
                "strategy": self.strategy,
                "horizon": self.horizon,
                "master_seed": self.master_seed,
            },
            "audit_failures": self.audit_failures,
            "outcomes": self.outcomes,
        }


def _run_one_trial(
    strategy_name: str,
    config: SamplerConfig,
    horizon: int,
    seed: int,
    audit: bool,
) -> tuple[str, float, int, int]:
    strategy = make_strategy(strategy_name, config)
    transcript = play_game(strategy, config, horizon, rng=np.random.default_rng(seed))
    failures = len(audit_transcript(transcript)) if audit else 0
    return transcript.outcome, transcript.max_rel_error, transcript.sample_count, failures


def run_trials(
    strategy: str,
    config: SamplerConfig,
    horizon: int,
    n_trials: int,
    master_seed: int = 0,
    jobs: int = 1,
    audit: bool = True,
) -> TrialStats:
    """Play ``n_trials`` independent games with per-trial derived seeds.

    Results are deterministic for a fixed master seed and are ordered by
    trial index regardless of ``jobs``.
    """
    if n_trials < 1:
        raise ValueError(f"n_trials must be >= 1, got {n_trials}")
    seeds = [derive_seed(master_seed, i) for i in range(n_trials)]
    args = [(strategy, config, horizon, s, audit) for s in seeds]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_one_trial, *zip(*args)))
    else:
        results = [_run_one_trial(*a) for a in args]

    outcomes = [r[0] for r in results]
    samples = [r[2] for r in results]
    return TrialStats(
        strategy=strategy,
        config=config,
        horizon=horizon,
        master_seed=master_seed,
        n_trials=n_trials,
        wins=sum(1 for o in outcomes if o == "win"),
        max_rel_error=max(r[1] for r in results),
        mean_samples=float(np.mean(samples)),
        max_samples=int(max(samples)),
        audit_failures=sum(r[3] for r in results),
        outcomes=outcomes,
    )


# ---------------------------------------------------------------------------
# Transcript serialization
# ---------------------------------------------------------------------------

TRANSCRIPT_CSV_COLUMNS = (
    "trial_id",
    "t",
    "x",
    "p",
    "coin",
    "x_tilde",
    "true_sum",
    "estimate",
    "rel_error",
)


def transcript_to_csv(transcript: GameTranscript, trial_id: int = 0) -> str:
    """Render one game as CSV (one row per round, shortest-roundtrip floats)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TRANSCRIPT_CSV_COLUMNS)
    for r in transcript.rounds:
        writer.writerow(
            [
                trial_id,
                r.t,
                repr(r.x),
                repr(r.p),
                int(r.coin),
                repr(r.x_tilde),
                repr(r.true_sum),
                repr(r.estimate),
                repr(r.rel_error),
            ]
        )
    return buf.getvalue()
