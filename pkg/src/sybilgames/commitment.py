"""Two-phase identity-commitment games: identities are committed first (each then
plays the resulting n-player equilibrium), so an attacker weighs x committed
identities at x * payoff(x + foreign) minus the identity cost.

A game is commitment-proof when committing exactly one identity is strictly
dominant.  Any bounded game that is both split-proof and commitment-proof under
small linear costs has equilibrium welfare capped by (n-1) R / 2^(n-2) + c n^2/2,
which the checker here evaluates on concrete instances; Cournot competition and
batched constant-product arbitrage are the stock counterexamples.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

from .core import ActionSpace, AggregativeGame, CONTINUOUS, SybilCost
from .equilibrium import concave_prorata_equilibrium
from .errors import DomainError
from .numerics import integer_argmax

SCP_MARGIN_TOL = 1e-12


@dataclass(frozen=True)
class EqPayoffOracle:
    """Per-player payoff and welfare at the symmetric equilibrium of the n-player game."""

    payoff: Callable[[int], float]
    welfare: Callable[[int], float]
    name: str = "oracle"


@dataclass(frozen=True)
class CommitmentInstance:
    """An equilibrium-payoff oracle plus the identity cost for the commitment phase.

    ``gross`` overrides the attacker's pre-cost payoff when the game does not
    follow the x * payoff(x + foreign) pattern (the constant-pot example pays
    the player the same total regardless of how many identities it commits).
    """

    oracle: EqPayoffOracle
    cost: SybilCost
    n_players: int = 2
    gross: Optional[Callable[[int, int], float]] = None

    def __post_init__(self):
        if self.n_players < 1:
            raise DomainError("need at least one player")

    def attacker_value(self, x: int, foreign: int) -> float:
        if x < 1 or foreign < 0:
            raise DomainError("need x >= 1 and foreign >= 0")
        gross = self.gross(x, foreign) if self.gross is not None else x * self.oracle.payoff(x + foreign)
        return gross - self.cost(x, foreign)


def commitment_best_response(
    inst: CommitmentInstance, foreign_identities: int, x_max: int = 32
) -> tuple[int, float]:
    """Exhaustive integer argmax of the commitment payoff; ties break toward fewer identities."""
    if x_max < 1:
        raise DomainError("need x_max >= 1")
    return integer_argmax(lambda x: inst.attacker_value(x, foreign_identities), 1, x_max)


@dataclass(frozen=True)
class ScpVerdict:
    scp: bool
    foreign: Optional[int] = None
    x: Optional[int] = None

    def __bool__(self) -> bool:
        return self.scp


def scp_check(
    inst: CommitmentInstance,
    foreign_max: int = 20,
    x_max: int = 32,
    tol: float = SCP_MARGIN_TOL,
) -> ScpVerdict:
    """Commitment-proofness: one identity must beat every x >= 2 by more than tol,
    for every foreign identity count up to foreign_max."""
    if foreign_max < 0 or x_max < 1:
        raise DomainError("bounds must be nonnegative (and x_max >= 1)")
    for foreign in range(foreign_max + 1):
        solo = inst.attacker_value(1, foreign)
        best_x, best_value = integer_argmax(
            lambda x: inst.attacker_value(x, foreign), 2, max(2, x_max)
        )
        if best_value > solo - tol:
            return ScpVerdict(False, foreign=foreign, x=best_x)
    return ScpVerdict(True)


def commitment_welfare_cap(n: int, R: float, c: float) -> float:
    """Equilibrium-welfare ceiling (n-1) R / 2^(n-2) + c n^2 / 2 for split-proof,
    commitment-proof bounded games with linear identity cost c."""
    if n < 2:
        raise DomainError("need n >= 2")
    return (n - 1) * R / 2.0 ** (n - 2) + c * n * n / 2.0


def cournot_game(beta: float, upper: Optional[float] = None, grid_step: float = 0.01) -> AggregativeGame:
    """Linear-demand quantity competition: phi(x, y) = x (beta - x - y)."""
    hi = upper if upper is not None else beta

    def phi(x: float, y: float) -> float:
        if x == 0.0:
            return 0.0
        return x * (beta - x - y)

    space = ActionSpace(CONTINUOUS, 0.0, hi, grid_step)
    return AggregativeGame(phi=phi, space=space, name="cournot")


def cournot_oracle(alpha: float, c_prod: float) -> EqPayoffOracle:
    """Equilibrium payoffs of the linear Cournot market: beta^2/(n+1)^2 each."""
    if c_prod >= alpha:
        raise DomainError("production cost at or above the demand intercept kills the market")
    beta = alpha - c_prod

    def payoff(n: int) -> float:
        return beta * beta / (n + 1) ** 2

    return EqPayoffOracle(payoff=payoff, welfare=lambda n: n * payoff(n), name="cournot")


def cfmm_curve(reserve_a: float, reserve_b: float, ext_price: float):
    """Net arbitrage proceeds f(t) = g(t) - price * t against a constant-product pool."""
    if reserve_a <= 0.0 or reserve_b <= 0.0 or ext_price <= 0.0:
        raise DomainError("reserves and external price must be positive")

    def f(t: float) -> float:
        return reserve_b * t / (reserve_a + t) - ext_price * t

    def fprime(t: float) -> float:
        return reserve_b * reserve_a / (reserve_a + t) ** 2 - ext_price

    return f, fprime


def cfmm_arbitrage_oracle(reserve_a: float, reserve_b: float, ext_price: float) -> EqPayoffOracle:
    """Equilibrium payoffs of batched arbitrage: the trades of all n arbitrageurs
    are pooled pro rata, so each earns its share of f(total trade)."""
    f, fprime = cfmm_curve(reserve_a, reserve_b, ext_price)
    if not reserve_b / reserve_a > ext_price:
        warnings.warn("no arbitrage at these reserves and price; payoffs are zero")
        return EqPayoffOracle(payoff=lambda n: 0.0, welfare=lambda n: 0.0, name="cfmm")
    cache: dict[int, float] = {}

    def payoff(n: int) -> float:
        if n not in cache:
            cache[n] = concave_prorata_equilibrium(f, n, fprime).per_player_payoff
        return cache[n]

    return EqPayoffOracle(payoff=payoff, welfare=lambda n: n * payoff(n), name="cfmm")


def exponential_commitment_instance() -> CommitmentInstance:
    """Commitment-proof example: x identities out of n total earn x e^(-n) net.

    Per-identity equilibrium payoff is 2 e^(-n) and the identity cost is
    x e^(-(x + foreign)), so the attacker nets x e^(-(x+foreign)), maximal at x = 1.
    """
    oracle = EqPayoffOracle(
        payoff=lambda n: 2.0 * math.exp(-n),
        welfare=lambda n: n * 2.0 * math.exp(-n),
        name="exponential",
    )
    cost = SybilCost(cost=lambda x, y: x * math.exp(-(x + y)))
    return CommitmentInstance(oracle=oracle, cost=cost)


def trivial_commitment_instance(c: float) -> CommitmentInstance:
    """Constant-pot example: the player's total gross is 3c/2 however many
    identities it commits, so extras only ever add cost."""
    if c <= 0.0:
        raise DomainError("need c > 0")
    oracle = EqPayoffOracle(
        payoff=lambda n: 1.5 * c, welfare=lambda n: n * 1.5 * c, name="constant-pot"
    )
    return CommitmentInstance(
        oracle=oracle, cost=SybilCost.linear(c), gross=lambda x, foreign: 1.5 * c
    )


def cournot_commitment_instance(alpha: float, c_prod: float, identity_cost: float = 0.0) -> CommitmentInstance:
    return CommitmentInstance(oracle=cournot_oracle(alpha, c_prod), cost=SybilCost.linear(identity_cost))


def cfmm_commitment_instance(
    reserve_a: float, reserve_b: float, ext_price: float, identity_cost: float = 0.0
) -> CommitmentInstance:
    return CommitmentInstance(
        oracle=cfmm_arbitrage_oracle(reserve_a, reserve_b, ext_price),
        cost=SybilCost.linear(identity_cost),
    )


def rmax_commitment_instance(R: float, identity_cost: float) -> CommitmentInstance:
    """Reward split along the pie-shrinking schedule: each of n identities earns
    R / 2^(n-1); at zero identity cost one extra identity exactly ties, so any
    positive cost makes single reporting strictly dominant."""
    if R <= 0.0:
        raise DomainError("need R > 0")
    oracle = EqPayoffOracle(
        payoff=lambda n: R / 2.0 ** (n - 1),
        welfare=lambda n: n * R / 2.0 ** (n - 1),
        name="shrunk-reward",
    )
    return CommitmentInstance(oracle=oracle, cost=SybilCost.linear(identity_cost))
