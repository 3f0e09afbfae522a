"""Reward-distribution mechanisms: splitting a reward R among self-reported
identities so that registering extra identities never pays.

The proofness condition for a split schedule r is
``r(1+y)/(1+y) >= x * r(x+y)/(x+y)`` for every x >= 1, y >= 0; the welfare-optimal
schedule satisfying it is ``n R / 2^(n-1)`` ("shrink the pie as the crowd grows").
Also here: the tent-shaped pro-rata curves whose equilibrium welfare approaches R
when the player count is common knowledge, the unique dominant-strategy pro-rata
curve, and the lottery variant for a non-divisible item.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .core import CONTINUOUS, ActionSpace, AggregativeGame, prorata_game
from .equilibrium import SymmetricEquilibrium, best_response_dynamics, grid_argmax
from .errors import DomainError, NumericError


@dataclass(frozen=True)
class RewardMechanism:
    """Reward split schedule: r(n) is shared equally among n reported identities."""

    r: Callable[[int], float]
    R: float

    def __post_init__(self):
        if self.R < 0.0:
            raise DomainError("reward cap must be nonnegative")


def max_sybilproof_reward(n: int, R: float) -> float:
    """Largest total reward a proof mechanism may pay out to n identities: n R / 2^(n-1)."""
    if n < 1:
        raise DomainError("need n >= 1")
    if R < 0.0:
        raise DomainError("need R >= 0")
    return n * R / 2.0 ** (n - 1)


def rmax_mechanism(R: float) -> RewardMechanism:
    return RewardMechanism(r=lambda n: max_sybilproof_reward(n, R), R=R)


def constant_mechanism(R: float) -> RewardMechanism:
    return RewardMechanism(r=lambda n: R, R=R)


def rdm_payoff(mech: RewardMechanism, x: int, y: int, c: float) -> float:
    """Payoff of a player reporting x identities against y others: x r(x+y)/(x+y) - c x."""
    if x < 0 or y < 0:
        raise DomainError("identity counts must be nonnegative")
    if x == 0:
        return 0.0
    return x * mech.r(x + y) / (x + y) - c * x


@dataclass(frozen=True)
class RdmVerdict:
    proof: bool
    x: Optional[int] = None
    y: Optional[int] = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.proof


def check_reward_sybilproof(
    mech: RewardMechanism, x_max: int = 64, y_max: int = 64, tol: float = 1e-12
) -> RdmVerdict:
    """Bounded check that a split schedule admits no profitable identity split.

    Verifies membership in the mechanism class (0 <= r(n) <= R) and the share
    inequality r(1+y)/(1+y) >= x r(x+y)/(x+y) for 1 <= x <= x_max, 0 <= y <= y_max,
    returning the first violation.  The condition quantifies over all integers;
    the bound is explicit and adjustable.
    """
    if x_max < 2:
        raise DomainError("x_max must be at least 2")
    cap = mech.R * (1.0 + 1e-12)
    for total in range(1, x_max + y_max + 1):
        value = mech.r(total)
        if value < -1e-12 or value > cap:
            return RdmVerdict(False, detail=f"r({total}) = {value} outside [0, R]")
    for x in range(1, x_max + 1):
        for y in range(0, y_max + 1):
            solo = mech.r(1 + y) / (1 + y)
            split = x * mech.r(x + y) / (x + y)
            if split > solo + tol:
                return RdmVerdict(False, x=x, y=y)
    return RdmVerdict(True)


@dataclass(frozen=True)
class DominantProrataCurve:
    """The unique smooth pro-rata curve whose prescribed stake is dominant.

    f(x) = (R e / K) x exp(-x/K); the per-player best response is K regardless
    of the others' total, and the peak value is exactly R at x = K.
    """

    R: float
    K: float

    def __post_init__(self):
        if self.R <= 0.0 or self.K <= 0.0:
            raise DomainError("need R > 0 and K > 0")

    def __call__(self, x: float) -> float:
        return (self.R * math.e / self.K) * x * math.exp(-x / self.K)

    def derivative(self, x: float) -> float:
        return (self.R * math.e / self.K) * math.exp(-x / self.K) * (1.0 - x / self.K)

    def welfare(self, n: int) -> float:
        """Equilibrium welfare with n players, f(nK) = R n e^(1-n)."""
        return self(n * self.K)


def dominant_strategy_prorata(R: float, K: float) -> DominantProrataCurve:
    return DominantProrataCurve(R=R, K=K)


@dataclass(frozen=True)
class TentFunction:
    """Piecewise-linear pro-rata curve rising to R at K-epsilon and hitting zero at K."""

    R: float
    K: float
    epsilon: float

    def __post_init__(self):
        if self.R <= 0.0 or self.K <= 0.0:
            raise DomainError("need R > 0 and K > 0")
        if not 0.0 < self.epsilon < self.K:
            raise DomainError("epsilon must lie strictly between 0 and K")

    @property
    def peak(self) -> float:
        return self.K - self.epsilon

    def __call__(self, x: float) -> float:
        if x <= self.peak:
            return self.R * x / self.peak
        return self.R * (self.K - x) / self.epsilon

    def slope(self, x: float) -> float:
        if x == self.peak:
            raise DomainError("slope is undefined at the peak")
        return self.R / self.peak if x < self.peak else -self.R / self.epsilon


def tent_game(tent: TentFunction, grid_step: Optional[float] = None) -> AggregativeGame:
    step = grid_step if grid_step is not None else tent.K / 400.0
    space = ActionSpace(CONTINUOUS, 0.0, tent.K, step)
    return prorata_game(tent, space, name="tent")


def tent_equilibrium(tent: TentFunction, n: int) -> SymmetricEquilibrium:
    """Symmetric equilibrium of the pro-rata game with a tent curve.

    On the descending branch the first-order condition gives the aggregate
    q = K (n-1)/n, valid only when it actually lands in (K-eps, K), i.e. when
    eps > K/n.  For smaller eps the equilibrium sits at the concave kink and is
    found by damped grid best-response dynamics instead.  Either way the result
    is validated by a grid best-response check.
    """
    if n < 2:
        raise DomainError("need n >= 2")
    K, eps = tent.K, tent.epsilon
    game = tent_game(tent)
    q = K * (n - 1) / n
    if tent.peak < q < K:
        eq = SymmetricEquilibrium(q / n, tent(q) / n, n, tent(q))
    else:
        eq = best_response_dynamics(game, n, refine_rounds=6)
    response, _ = grid_argmax(
        lambda x: game.phi(x, (n - 1) * eq.per_player_action),
        0.0,
        K,
        game.space.grid_step,
        refine_rounds=6,
    )
    if abs(response - eq.per_player_action) > 1e-4 * K:
        raise NumericError("tent equilibrium failed the best-response validation")
    return eq


def nondivisible_lottery(n: int, seed_or_rng: Union[int, np.random.Generator]) -> Optional[int]:
    """Allocate a non-divisible item to each of n reporters with probability 1/2^(n-1).

    A single PCG64 uniform draw is stratified into n winner bins of width
    1/2^(n-1) each; the remaining mass burns the item (returns None).
    """
    if n < 1:
        raise DomainError("need n >= 1")
    rng = seed_or_rng if isinstance(seed_or_rng, np.random.Generator) else np.random.Generator(
        np.random.PCG64(seed_or_rng)
    )
    u = rng.random()
    slot = int(u * 2.0 ** (n - 1))
    return slot if slot < n else None


def lottery_expected_value(n: int, R: float) -> float:
    """Per-identity expected value of the non-divisible lottery, R / 2^(n-1)."""
    if n < 1:
        raise DomainError("need n >= 1")
    return R / 2.0 ** (n - 1)
