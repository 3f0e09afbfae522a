"""Equilibrium computation for the aggregative games in this package.

Covers the closed-form symmetric equilibrium of the reward-sharing game, its
integer-action mixed equilibrium (two adjacent actions, indifference solved by
bisection), the concave pro-rata first-order condition, damped best-response
dynamics as a derivative-free fallback, and a grid price-of-anarchy estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

from .core import AggregativeGame
from .errors import DomainError, NumericError
from .numerics import bisect_root, grid_argmax

FD_STEP = 1e-6


@dataclass(frozen=True)
class SymmetricEquilibrium:
    """All players take the same action; welfare is the n-fold per-player payoff."""

    per_player_action: float
    per_player_payoff: float
    n: int
    welfare: float

    def __post_init__(self):
        expected = self.n * self.per_player_payoff
        if abs(self.welfare - expected) > 1e-9 * max(1.0, abs(expected)):
            raise DomainError("welfare must equal n times the per-player payoff")

    @property
    def aggregate_action(self) -> float:
        return self.n * self.per_player_action


@dataclass(frozen=True)
class DiscreteMixedEquilibrium:
    """Mix over two adjacent integer actions; ``residual`` measures the
    equilibrium-condition violation (indifference when interior, the one-sided
    better-response gap at the p in {0, 1} boundaries)."""

    low: int
    high: int
    p: float
    n: int
    residual: float = 0.0

    def __post_init__(self):
        if self.high != self.low + 1:
            raise DomainError("the two mixed actions must be adjacent integers")
        if not 0.0 <= self.p <= 1.0:
            raise DomainError("mixing probability must be in [0, 1]")

    @property
    def interior(self) -> bool:
        return 0.0 < self.p < 1.0


def best_response_reward_game(R: float, c: float, y: float) -> float:
    """Best response in the game paying R * own/(own+others) - c * own.

    At y == 0 the payoff has no maximiser on x > 0 (any positive action takes
    the whole reward), so the response is defined as 0 there.
    """
    if c <= 0.0:
        raise DomainError("identity cost must be positive")
    if R <= 0.0 or y < 0.0:
        raise DomainError("need R > 0 and y >= 0")
    return max(0.0, math.sqrt(R * y / c) - y)


def reward_game_payoff(R: float, c: float, x: float, y: float) -> float:
    """Share-of-reward payoff R*x/(x+y) - c*x, zero for an inactive player."""
    if x == 0.0:
        return 0.0
    return R * x / (x + y) - c * x


def reward_game_pure_equilibrium(R: float, c: float, n: int) -> SymmetricEquilibrium:
    """Unique symmetric equilibrium of the continuous reward-sharing game."""
    if n < 2:
        raise DomainError("the continuous relaxation needs n >= 2")
    if R <= 0.0 or c <= 0.0:
        raise DomainError("need R > 0 and c > 0")
    action = (R / c) * (n - 1) / n**2
    payoff = reward_game_payoff(R, c, action, (n - 1) * action)
    return SymmetricEquilibrium(action, payoff, n, n * payoff)


def reward_game_expected_payoff(
    x: int, low: int, p: float, n: int, R: float, c: float
) -> float:
    """Expected payoff of integer action x against n-1 opponents mixing
    low with probability p and low+1 otherwise (exact binomial sum)."""
    base = (n - 1) * low
    total = 0.0
    for j in range(n):  # j opponents play high = low + 1
        prob = math.comb(n - 1, j) * (1.0 - p) ** j * p ** (n - 1 - j)
        total += prob * reward_game_payoff(R, c, float(x), float(base + j))
    return total


def mixed_deviation_gain(
    eq: DiscreteMixedEquilibrium, R: float, c: float, x_max: Optional[int] = None
) -> float:
    """Best improvement any integer deviation up to x_max achieves over the mix."""
    if x_max is None:
        x_max = 4 * eq.high
    value_of_mix = eq.p * reward_game_expected_payoff(eq.low, eq.low, eq.p, eq.n, R, c) + (
        1.0 - eq.p
    ) * reward_game_expected_payoff(eq.high, eq.low, eq.p, eq.n, R, c)
    best = max(
        reward_game_expected_payoff(x, eq.low, eq.p, eq.n, R, c) for x in range(0, x_max + 1)
    )
    return best - value_of_mix


def reward_game_mixed_equilibrium(R: float, c: float, n: int) -> DiscreteMixedEquilibrium:
    """Symmetric equilibrium on the integer grid: mix floor/ceil of the
    continuous equilibrium action, with p solved from the indifference condition.

    When no interior indifference exists (one action dominates the other on the
    candidate support) the boundary pure profile that survives a brute-force
    deviation scan is returned with p in {0, 1}.
    """
    if n < 2:
        raise DomainError("need n >= 2")
    if R <= 0.0 or c <= 0.0:
        raise DomainError("need R > 0 and c > 0")
    low = int(math.floor((R / c) * (n - 1) / n**2))
    high = low + 1

    def gap(p: float) -> float:
        return reward_game_expected_payoff(low, low, p, n, R, c) - reward_game_expected_payoff(
            high, low, p, n, R, c
        )

    g0, g1 = gap(0.0), gap(1.0)
    if g0 == 0.0 and g1 == 0.0:
        return DiscreteMixedEquilibrium(low, high, 0.5, n, residual=0.0)
    if g0 * g1 < 0.0:
        p = bisect_root(gap, 0.0, 1.0)
        return DiscreteMixedEquilibrium(low, high, p, n, residual=abs(gap(p)))
    # One action dominates on the support: fall back to the pure boundary.
    for p, violation in ((1.0, max(0.0, -g1)), (0.0, max(0.0, g0))):
        candidate = DiscreteMixedEquilibrium(low, high, p, n, residual=violation)
        if mixed_deviation_gain(candidate, R, c) <= 1e-9:
            return candidate
    raise NumericError("no equilibrium found on the floor/ceil support")


def concave_prorata_equilibrium(
    f: Callable[[float], float],
    n: int,
    fprime: Optional[Callable[[float], float]] = None,
    q_hi: Optional[float] = None,
) -> SymmetricEquilibrium:
    """Symmetric equilibrium of the pro-rata game with curve f.

    The aggregate action solves (n-1) f(q) + q f'(q) = 0, found by bracket
    expansion plus bisection.  A central finite difference (step 1e-6) stands in
    when no analytic derivative is supplied.
    """
    if n < 1:
        raise DomainError("need n >= 1")
    df = fprime if fprime is not None else (lambda q: (f(q + FD_STEP) - f(q - FD_STEP)) / (2 * FD_STEP))

    def condition(q: float) -> float:
        return (n - 1) * f(q) + q * df(q)

    hi = q_hi if q_hi is not None else 1.0
    if q_hi is None:
        while condition(hi) > 0.0 and hi < 1e12:
            hi *= 2.0
    if condition(hi) > 0.0:
        raise NumericError("no interior equilibrium: first-order condition stays positive")
    lo = hi
    while lo > hi * 1e-15:
        lo /= 2.0
        if condition(lo) > 0.0:
            break
    else:
        raise NumericError("no interior equilibrium: first-order condition never positive")
    q = bisect_root(condition, lo, hi)
    payoff = f(q) / n
    return SymmetricEquilibrium(q / n, payoff, n, f(q))


def best_response_dynamics(
    game: AggregativeGame,
    n: int,
    x0: Optional[float] = None,
    damping: Optional[float] = None,
    search_upper: Optional[float] = None,
    refine_rounds: int = 5,
    max_iter: int = 500,
    tol: float = 1e-11,
) -> SymmetricEquilibrium:
    """Damped simultaneous best-response iteration to a symmetric fixed point.

    Plain best-response dynamics oscillate whenever the response slope is below
    -1 (it is -(n-1) near a shared kink), so updates are averaged with weight
    1/n, which makes the linearised map a contraction.
    """
    if n < 1:
        raise DomainError("need n >= 1")
    space = game.space
    upper = search_upper if search_upper is not None else space.upper
    if upper is None:
        raise NumericError("best-response dynamics need a bounded search interval")
    gamma = damping if damping is not None else 1.0 / n

    def others(x: float) -> float:
        return game.aggregate_others([x] * (n - 1))

    def response(y: float) -> float:
        x, _ = grid_argmax(lambda a: game.phi(a, y), space.lower, upper, space.grid_step, refine_rounds)
        return x

    x = x0 if x0 is not None else 0.5 * (space.lower + upper) / n
    scale = max(1.0, upper)
    # the refined grid argmax resolves responses no finer than this
    resolution = space.grid_step / 10.0**refine_rounds
    threshold = max(tol * scale, resolution)
    for _ in range(max_iter):
        nxt = (1.0 - gamma) * x + gamma * response(others(x))
        if abs(nxt - x) <= threshold:
            x = nxt
            break
        x = nxt
    else:
        raise NumericError("best-response dynamics did not converge")
    payoff = game.phi(x, others(x))
    return SymmetricEquilibrium(x, payoff, n, n * payoff)


def grid_welfare_optimum(game: AggregativeGame, n: int, search_upper: Optional[float] = None) -> float:
    """Supremum of total welfare over symmetric grid profiles, at grid resolution."""
    best = -math.inf
    for a in game.space.grid(search_upper):
        a = float(a)
        best = max(best, n * game.phi(a, game.aggregate_others([a] * (n - 1))))
    return best


def price_of_anarchy(
    game: AggregativeGame,
    n: int,
    eq_welfare: float,
    search_upper: Optional[float] = None,
) -> float:
    """Ratio of the grid welfare optimum to the given equilibrium welfare."""
    if eq_welfare <= 0.0:
        raise DomainError("price of anarchy is undefined for nonpositive equilibrium welfare")
    return grid_welfare_optimum(game, n, search_upper) / eq_welfare
