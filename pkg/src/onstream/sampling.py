"""Online importance sampling for sum estimation under adaptive streams.

The sampler keeps each arriving non-negative item with probability
proportional to the item's share of the current *estimated* running sum,
scaled up by an amplification factor.  Kept items are reweighted by the
reciprocal of their sampling probability, so the running estimate is
unbiased round by round.  Sampling decisions are irrevocable: once an
item is stored (or dropped) it is never revisited, which is what makes
the estimator safe against adversaries that choose the next item after
seeing previous coin flips.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Probabilities below this are considered a configuration error: x / p would
# start to lose precision long before this, so demanding a smaller p means
# the caller's accuracy budget (amp, delta_cap) is inconsistent with the data.
P_MIN = 2.0 ** -60

# Relative slack used when checking the delta_cap budget, so that exact
# boundary streams (e.g. an adversary spending its whole budget) are legal.
_CAP_RTOL = 1e-12


def amplification_param(
    epsilon: float, delta: float, delta_cap: float, const_c: float = 3.0
) -> float:
    """Amplification factor guaranteeing (1 +- epsilon) accuracy w.p. 1 - delta.

    Evaluates ``max(1, const_c * epsilon^-2 * ln(max(e, ln(delta_cap)) /
    (epsilon * delta)))``.  ``delta_cap`` bounds the ratio between the final
    sum and the first item; its double logarithm is what makes the factor
    nearly independent of the stream length.

    Raises:
        ValueError: if epsilon or delta is outside (0, 1), delta_cap <= 1,
            or const_c <= 0.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must be in (0, 1), got {epsilon}")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must be in (0, 1), got {delta}")
    if not delta_cap > 1.0:
        raise ValueError(f"delta_cap must exceed 1, got {delta_cap}")
    if not const_c > 0.0:
        raise ValueError(f"const_c must be positive, got {const_c}")
    inner = max(math.e, math.log(delta_cap)) / (epsilon * delta)
    return max(1.0, const_c * epsilon**-2 * math.log(inner))


@dataclass(frozen=True)
class SamplerConfig:
    """Accuracy / budget parameters for one sampled stream.

    ``amp`` defaults to ``amplification_param(epsilon, delta, delta_cap,
    const_c)`` and may be overridden explicitly (e.g. to study the sampler
    outside its guaranteed regime).
    """

    epsilon: float
    delta: float
    delta_cap: float
    amp: float
    const_c: float = 3.0

    def __post_init__(self) -> None:
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must be in (0, 1), got {self.epsilon}")
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must be in (0, 1), got {self.delta}")
        if not self.delta_cap > 1.0:
            raise ValueError(f"delta_cap must exceed 1, got {self.delta_cap}")
        if not self.amp >= 1.0:
            raise ValueError(f"amp must be >= 1, got {self.amp}")

    @classmethod
    def create(
        cls,
        epsilon: float,
        delta: float,
        delta_cap: float,
        const_c: float = 3.0,
        amp: float | None = None,
    ) -> "SamplerConfig":
        """Build a config, deriving ``amp`` from the formula unless given."""
        if amp is None:
            amp = amplification_param(epsilon, delta, delta_cap, const_c)
        return cls(
            epsilon=epsilon,
            delta=delta,
            delta_cap=delta_cap,
            amp=amp,
            const_c=const_c,
        )

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "delta": self.delta,
            "delta_cap": self.delta_cap,
            "amp": self.amp,
            "const_c": self.const_c,
        }


@dataclass(frozen=True)
class StepRecord:
    """One processed item: value, probability used, coin, and contribution."""

    x: float
    p: float
    coin: bool
    x_tilde: float


@dataclass
class SamplerState:
    """Mutable per-stream state: round index, sums, and storage count."""

    t: int = 0
    true_sum: float = 0.0
    estimate: float = 0.0
    sample_count: int = 0
    x1: float | None = None


class OnlineSumSampler:
    """Streaming sum estimator with irrevocable importance sampling.

    Items must be non-negative and the total sum may not exceed
    ``delta_cap`` times the first (nonzero) item; violating that budget
    raises, signalling that the caller configured ``delta_cap`` too small.

    One seedable generator drives all coins, so identical (config, item
    sequence, override sequence, seed) reproduce the transcript exactly.
    Zero items are no-ops by convention: probability 1, contribution 0,
    nothing stored, and no randomness consumed.
    """

    def __init__(
        self,
        config: SamplerConfig,
        rng: np.random.Generator | int | None = None,
    ) -> None:
        self.config = config
        # Anything exposing .random() works (stub generators in tests included).
        self.rng = rng if hasattr(rng, "random") else np.random.default_rng(rng)
        self.state = SamplerState()

    def default_probability(self, x: float) -> float:
        """The minimum legal probability for the next item of value ``x``."""
        if x <= 0.0:
            return 1.0
        return min(1.0, self.config.amp * x / (x + self.state.estimate))

    def step(self, x: float, p_override: float | None = None) -> StepRecord:
        """Process one item and return the realized record.

        ``p_override`` replaces the default probability rule.  The sampler
        only checks that it lies in (0, 1]; callers that promise a lower
        bound relative to the true running sum (e.g. a game referee) must
        enforce it themselves, since this object never sees that bound.
        """
        state = self.state
        if not (x >= 0.0 and math.isfinite(x)):
            raise ValueError(f"item must be a finite non-negative number, got {x}")

        if x == 0.0:
            state.t += 1
            return StepRecord(x=0.0, p=1.0, coin=False, x_tilde=0.0)

        x1 = state.x1 if state.x1 is not None else x
        if (state.true_sum + x) / x1 > self.config.delta_cap * (1.0 + _CAP_RTOL):
            raise ValueError(
                f"round {state.t + 1}: running sum {state.true_sum + x} exceeds "
                f"delta_cap={self.config.delta_cap} times first item {x1}"
            )

        if p_override is None:
            p = self.default_probability(x)
            if p < P_MIN:
                raise ValueError(
                    f"probability rule demands p={p} < {P_MIN}; "
                    "the stream left the supported precision regime"
                )
        else:
            if not (0.0 < p_override <= 1.0):
                raise ValueError(f"p_override must be in (0, 1], got {p_override}")
            if p_override < P_MIN:
                raise ValueError(f"p_override={p_override} below precision floor {P_MIN}")
            p = p_override

        coin = bool(self.rng.random() < p)
        x_tilde = x / p if coin else 0.0

        state.t += 1
        state.true_sum += x
        if state.x1 is None:
            state.x1 = x
        if coin:
            state.estimate += x_tilde
            state.sample_count += 1
        return StepRecord(x=x, p=p, coin=coin, x_tilde=x_tilde)

    @property
    def estimate(self) -> float:
        """Current estimate of the running sum (sum of kept x / p terms)."""
        return self.state.estimate

    def relative_error(self) -> float:
        """|estimate - true_sum| / true_sum; errors if the true sum is zero."""
        if self.state.true_sum <= 0.0:
            raise ValueError("relative error is undefined while the true sum is zero")
        return abs(self.state.estimate - self.state.true_sum) / self.state.true_sum
