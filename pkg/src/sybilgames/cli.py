"""Command-line driver for every experiment in the package.

Each subcommand writes one CSV artifact ('.' decimals, comma separator, a
'#'-prefixed comment line recording the full configuration).  All randomness
flows from the --seed flag, so identical configurations produce byte-identical
files.  Exit codes: 0 success, 1 usage, 2 invariant violation, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .cake import PiecewiseMeasure, measure_value, run_monte_carlo
from .commitment import (
    CommitmentInstance,
    cfmm_commitment_instance,
    commitment_best_response,
    cournot_commitment_instance,
    cournot_game,
    exponential_commitment_instance,
    trivial_commitment_instance,
)
from .core import SybilCost, headcount_reward_game, reward_share_game, verify_sybilproof
from .equilibrium import grid_welfare_optimum, reward_game_pure_equilibrium
from .errors import ConfigurationError, DomainError, InvariantViolation, NumericError
from .rdm import TentFunction, dominant_strategy_prorata, max_sybilproof_reward, tent_equilibrium
from .ring import DISTRIBUTIONS, opt_ring_search

ARTIFACT = f"sybilgames/{__version__}"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); the contract wants 1
        raise UsageError(message)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _emit_csv(out: Optional[str], subcommand: str, params: dict, header: Sequence[str], rows) -> None:
    config = " ".join(
        [f"artifact={ARTIFACT}", f"subcommand={subcommand}"]
        + [f"{key}={_fmt(val)}" for key, val in sorted(params.items())]
    )
    lines = ["# " + config, ",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    text = "\n".join(lines) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="\n") as fh:
            fh.write(text)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=0, help="seed for all randomness")
    parser.add_argument("--out", type=str, default=None, help="output CSV path (default stdout)")
    parser.add_argument("--format", type=str, default="csv", choices=["csv"])


def build_parser() -> _Parser:
    parser = _Parser(prog="sybilgames", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", metavar="SUBCOMMAND", parser_class=_Parser)

    p = sub.add_parser("verify", help="brute-force identity-splitting check")
    _add_common(p)
    p.add_argument("--game", choices=["headcount", "prorata", "cournot"], default="headcount")
    p.add_argument("--R", type=float, default=10.0)
    p.add_argument("--c", type=float, default=0.0, help="per-identity cost")
    p.add_argument("--beta", type=float, default=1.0, help="Cournot demand intercept net of cost")
    p.add_argument("--foreign", action="append", default=None, help="comma list, repeatable")
    p.add_argument("--max-identities", type=int, default=2)
    p.add_argument("--grid-step", type=float, default=None)
    p.add_argument("--upper", type=float, default=None)

    p = sub.add_parser("rdm", help="reward-distribution welfare table")
    _add_common(p)
    p.add_argument("--R", type=float, default=10.0)
    p.add_argument("--K", type=float, default=1.0)
    p.add_argument("--eps", type=float, default=None, help="tent half-width (default K/100)")
    p.add_argument("--n-max", type=int, default=12)

    p = sub.add_parser("cake", help="cake-cutting Monte Carlo transcript")
    _add_common(p)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--measures", type=str, default=None, help="file: one measure per line, b0 d0 b1 ... bm")

    p = sub.add_parser("ring", help="bidding-ring share search")
    _add_common(p)
    p.add_argument("--dist", choices=sorted(DISTRIBUTIONS), default="uniform")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--theta-grid", type=int, default=21)
    p.add_argument("--samples", type=int, default=100_000)

    p = sub.add_parser("commit", help="identity-commitment sweep")
    _add_common(p)
    p.add_argument("--instance", choices=["cournot", "cfmm", "exp", "trivial"], default="cournot")
    p.add_argument("--c", type=float, default=0.0, help="identity cost (pot scale for trivial)")
    p.add_argument("--n-max", type=int, default=10)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--c-prod", type=float, default=0.0)
    p.add_argument("--reserve-a", type=float, default=100.0)
    p.add_argument("--reserve-b", type=float, default=100.0)
    p.add_argument("--price", type=float, default=0.5)
    p.add_argument("--x-max", type=int, default=32)

    p = sub.add_parser("poa", help="price-of-anarchy sweep of the reward game")
    _add_common(p)
    p.add_argument("--R", type=float, default=10.0)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--n-max", type=int, default=10)
    p.add_argument("--grid-step", type=float, default=0.01)

    p = sub.add_parser("fig", help="figure datasets")
    _add_common(p)
    p.add_argument("--which", choices=["fig1", "fig2"], required=True)
    p.add_argument("--R", type=float, default=10.0)
    p.add_argument("--K", type=float, default=1.0)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--n-max", type=int, default=12)
    p.add_argument("--reserve-a", type=float, default=100.0)
    p.add_argument("--reserve-b", type=float, default=100.0)
    p.add_argument("--price", type=float, default=0.5)
    return parser


def _parse_profile(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in text.split(",") if tok.strip() != "")
    except ValueError as exc:
        raise UsageError(f"bad foreign profile {text!r}") from exc


def _run_verify(args) -> None:
    cost = SybilCost.linear(args.c) if args.c > 0.0 else SybilCost.zero()
    if args.game == "headcount":
        game = headcount_reward_game(args.R)
        default_profiles = ["1,1,1"]
    elif args.game == "prorata":
        game = reward_share_game(args.R, max(args.c, 1.0), grid_step=args.grid_step or 0.5)
        default_profiles = ["2.5,2.5"]
    else:
        game = cournot_game(args.beta, grid_step=args.grid_step or 0.05)
        default_profiles = [f"{args.beta / 3.0}"]
    profiles = [_parse_profile(t) for t in (args.foreign or default_profiles)]
    rows = []
    for profile in profiles:
        verdict = verify_sybilproof(
            game, cost, args.max_identities, [profile], search_upper=args.upper
        )
        rows.append(
            (
                args.game,
                "|".join(repr(a) for a in profile),
                "proof" if verdict.proof else "counterexample",
                "" if verdict.proof else "|".join(repr(a) for a in verdict.mine.actions),
                0.0 if verdict.proof else verdict.gain,
            )
        )
    params = dict(
        game=args.game, R=args.R, c=args.c, beta=args.beta, max_identities=args.max_identities,
        profiles=";".join("|".join(repr(a) for a in p) for p in profiles), seed=args.seed,
    )
    _emit_csv(args.out, "verify", params, ["game", "foreign", "verdict", "mine", "gain"], rows)


def _tent_welfare(R: float, K: float, eps: float, n: int) -> float:
    if n == 1:
        return R  # a lone player plays the peak and keeps the whole curve value
    return tent_equilibrium(TentFunction(R, K, eps), n).welfare


def _run_rdm(args) -> None:
    eps = args.eps if args.eps is not None else args.K / 100.0
    curve = dominant_strategy_prorata(args.R, args.K)
    rows = []
    for n in range(1, args.n_max + 1):
        rows.append(
            (n, max_sybilproof_reward(n, args.R), curve.welfare(n), _tent_welfare(args.R, args.K, eps, n))
        )
    params = dict(R=args.R, K=args.K, eps=eps, n_max=args.n_max, seed=args.seed)
    _emit_csv(args.out, "rdm", params, ["n", "r_max", "welfare_dsic", "welfare_tent"], rows)


def _load_measures(path: str) -> list[PiecewiseMeasure]:
    measures = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            measures.append(PiecewiseMeasure.from_flat([float(tok) for tok in line.split()]))
    if not measures:
        raise UsageError(f"no measures found in {path}")
    return measures


def _run_cake(args) -> None:
    if args.measures is not None:
        declared = _load_measures(args.measures)
    else:
        declared = [PiecewiseMeasure.uniform() for _ in range(args.n)]
    n = len(declared)
    transcript = run_monte_carlo(declared, args.samples, args.seed)
    values = [
        [measure_value(declared[i], transcript.partition[j]) for j in range(n)] for i in range(n)
    ]
    rows = []
    for r in range(transcript.runs):
        kept = bool(transcript.coins[r])
        for i in range(n):
            value = values[i][transcript.assignments[r, i]] if kept else 0.0
            rows.append((r, i, value, int(kept)))
    params = dict(n=n, samples=args.samples, seed=args.seed, measures=args.measures or "uniform")
    _emit_csv(args.out, "cake", params, ["run", "identity", "value", "coin"], rows)


def _run_ring(args) -> None:
    dist = DISTRIBUTIONS[args.dist]()
    thetas = np.linspace(0.0, 1.0, args.theta_grid)
    result = opt_ring_search(dist, args.n, thetas, samples=args.samples, seed=args.seed)
    rows = [
        (row.theta, row.truthful_ok, row.sybilproof_ok, row.welfare, row.baseline)
        for row in result.rows
    ]
    params = dict(
        dist=args.dist, n=args.n, theta_grid=args.theta_grid, samples=args.samples, seed=args.seed,
        best_theta=result.best_theta,
    )
    _emit_csv(
        args.out, "ring", params, ["theta", "truthful_ok", "sybilproof_ok", "welfare", "baseline"], rows
    )


def _commit_instance(args) -> CommitmentInstance:
    if args.instance == "cournot":
        return cournot_commitment_instance(args.alpha, args.c_prod, identity_cost=args.c)
    if args.instance == "cfmm":
        return cfmm_commitment_instance(args.reserve_a, args.reserve_b, args.price, identity_cost=args.c)
    if args.instance == "exp":
        return exponential_commitment_instance()
    if args.c <= 0.0:
        raise UsageError("the trivial instance needs --c > 0")
    return trivial_commitment_instance(args.c)


def _commit_rows(inst: CommitmentInstance, n_max: int, x_max: int):
    rows = []
    for n in range(1, n_max + 1):
        eq_payoff = inst.oracle.payoff(n)
        commit2 = 2.0 * inst.oracle.payoff(n + 1)
        best_x, best_value = commitment_best_response(inst, n - 1, x_max)
        solo = inst.attacker_value(1, n - 1)
        if best_x == 1 and all(
            solo - inst.attacker_value(x, n - 1) > 1e-12 for x in range(2, x_max + 1)
        ):
            verdict = "scp"
        else:
            verdict = f"counterexample(foreign={n - 1};x={best_x})"
        rows.append((n, eq_payoff, commit2, verdict))
    return rows


def _run_commit(args) -> None:
    inst = _commit_instance(args)
    rows = _commit_rows(inst, args.n_max, args.x_max)
    params = dict(
        instance=args.instance, c=args.c, n_max=args.n_max, x_max=args.x_max, seed=args.seed,
        alpha=args.alpha, c_prod=args.c_prod,
        reserve_a=args.reserve_a, reserve_b=args.reserve_b, price=args.price,
    )
    _emit_csv(args.out, "commit", params, ["n", "eq_payoff", "commit2_payoff", "scp_verdict"], rows)


def _run_poa(args) -> None:
    game = reward_share_game(args.R, args.c, grid_step=args.grid_step)
    rows = []
    for n in range(2, args.n_max + 1):
        eq = reward_game_pure_equilibrium(args.R, args.c, n)
        w_opt = grid_welfare_optimum(game, n)
        rows.append((n, eq.welfare, w_opt, w_opt / eq.welfare))
    params = dict(R=args.R, c=args.c, n_max=args.n_max, grid_step=args.grid_step, seed=args.seed)
    _emit_csv(args.out, "poa", params, ["n", "eq_welfare", "w_opt", "poa"], rows)


def _run_fig(args) -> None:
    if args.which == "fig1":
        eps = args.eps if args.eps is not None else args.K / 100.0
        curve = dominant_strategy_prorata(args.R, args.K)
        rows = [
            (
                n,
                max_sybilproof_reward(n, args.R),
                curve.welfare(n),
                _tent_welfare(args.R, args.K, eps, n),
            )
            for n in range(1, args.n_max + 1)
        ]
        params = dict(which="fig1", R=args.R, K=args.K, eps=eps, n_max=args.n_max, seed=args.seed)
        _emit_csv(
            args.out, "fig", params, ["n", "rmax_welfare", "dsic_welfare", "tent_welfare"], rows
        )
        return
    inst = cfmm_commitment_instance(args.reserve_a, args.reserve_b, args.price)
    rows = [
        (n, inst.oracle.payoff(n), 2.0 * inst.oracle.payoff(n + 1)) for n in range(1, args.n_max + 1)
    ]
    params = dict(
        which="fig2", reserve_a=args.reserve_a, reserve_b=args.reserve_b, price=args.price,
        n_max=args.n_max, seed=args.seed,
    )
    _emit_csv(args.out, "fig", params, ["n", "eq_payoff", "sybil_commit_payoff"], rows)


_HANDLERS = {
    "verify": _run_verify,
    "rdm": _run_rdm,
    "cake": _run_cake,
    "ring": _run_ring,
    "commit": _run_commit,
    "poa": _run_poa,
    "fig": _run_fig,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.subcommand is None:
            raise UsageError("a subcommand is required")
        _HANDLERS[args.subcommand](args)
        return 0
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (DomainError, ConfigurationError, ValueError) as exc:
        print(f"invalid parameter: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"cannot write output: {exc}", file=sys.stderr)
        return 1
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
