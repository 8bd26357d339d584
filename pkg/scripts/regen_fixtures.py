#!/usr/bin/env python3
"""Regenerate every bundled fixture under fixtures/.

All fixtures are produced by the library's own canonical writers, so the
round-trip tests (save -> load -> save byte-identical) hold by
construction.  Run from anywhere; paths resolve relative to the repo root.
"""

from pathlib import Path

from temporal_pluralism.environment import (
    DeliveryConfig,
    DeliveryGridEnv,
    RestaurantConfig,
    RestaurantEnv,
    Trajectory,
    cycle_policy,
    rollout,
)
from temporal_pluralism.formula import parse_formula
from temporal_pluralism.machine import RewardMachine, Transition, require_valid
from temporal_pluralism.scheme import (
    Aggregation,
    AnytimeFilter,
    AtomCountSource,
    EventCountFilter,
    LongTermFilter,
    MachineSource,
    MarkovTableSource,
    PeriodicFilter,
    Scheme,
    StakeholderStatus,
    StatusFunction,
)
from temporal_pluralism.serialize import (
    save_env,
    save_machine,
    save_markov_table,
    save_scheme,
    save_trajectory,
)

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"


def dinner_machine() -> RewardMachine:
    """Reward 1 exactly when a pasta course comes strictly before the
    first cake; cake first (or no cake at all) earns 0."""
    alpha = ("pasta", "cake")
    p = lambda s: parse_formula(s, alpha)
    return require_valid(
        RewardMachine(
            states=("u0", "u1", "u2"),
            initial="u0",
            alphabet=alpha,
            transitions=(
                Transition("u0", p("pasta & !cake"), "u1", 0.0),
                Transition("u0", p("!pasta & !cake"), "u0", 0.0),
                Transition("u0", p("cake"), "u2", 0.0),
                Transition("u1", p("cake"), "u2", 1.0),
                Transition("u1", p("!cake"), "u1", 0.0),
                Transition("u2", p("true"), "u2", 0.0),
            ),
        )
    )


def greedy_trap_machine() -> RewardMachine:
    """Small payoff now or a bigger one for waiting a step; one-step
    lookahead takes the bait, which is the point of the fixture."""
    alpha = ("served_1", "visit")
    p = lambda s: parse_formula(s, alpha)
    return require_valid(
        RewardMachine(
            states=("m0", "m1", "bait", "payoff"),
            initial="m0",
            alphabet=alpha,
            transitions=(
                Transition("m0", p("served_1"), "bait", 1.0),
                Transition("m0", p("!served_1"), "m1", 0.0),
                Transition("m1", p("served_1"), "payoff", 5.0),
                Transition("m1", p("!served_1"), "m1", 0.0),
                Transition("bait", p("true"), "bait", 0.0),
                Transition("payoff", p("true"), "payoff", 0.0),
            ),
        )
    )


def count_status(n: int) -> StatusFunction:
    return StatusFunction(
        tuple(StakeholderStatus(AtomCountSource(f"served_{i + 1}")) for i in range(n))
    )


NASH = Aggregation(mode="flattened", op="product")


def restaurant5() -> RestaurantEnv:
    return RestaurantEnv(
        RestaurantConfig(
            n_friends=5,
            restaurant_types=("italian", "sushi", "taco", "indian", "bistro"),
            preferred=("italian", "sushi", "taco", "indian", "bistro"),
        )
    )


def restaurant3() -> RestaurantEnv:
    return RestaurantEnv(
        RestaurantConfig(
            n_friends=3,
            restaurant_types=("italian", "sushi", "taco"),
            preferred=("italian", "sushi", "taco"),
        )
    )


def restaurant2() -> RestaurantEnv:
    return RestaurantEnv(
        RestaurantConfig(
            n_friends=2,
            restaurant_types=("italian", "sushi"),
            preferred=("italian", "sushi"),
        )
    )


def main() -> None:
    FIXTURES.mkdir(exist_ok=True)

    save_machine(dinner_machine(), FIXTURES / "fig2.rm")
    save_machine(greedy_trap_machine(), FIXTURES / "greedy_trap.rm")

    env5, env3, env2 = restaurant5(), restaurant3(), restaurant2()
    save_env(env5, FIXTURES / "restaurant5.env")
    save_env(env3, FIXTURES / "restaurant3.env")
    save_env(env2, FIXTURES / "restaurant2.env")

    trap_env = RestaurantEnv(
        RestaurantConfig(
            n_friends=1, restaurant_types=("trattoria", "diner"), preferred=("trattoria",)
        )
    )
    save_env(trap_env, FIXTURES / "greedy_trap.env")

    delivery = DeliveryGridEnv(
        DeliveryConfig(width=3, height=1, start=(1, 0), recipients=((0, 0), (2, 0)))
    )
    save_env(delivery, FIXTURES / "delivery2.env")

    # schemes over the five-friend group
    save_scheme(
        Scheme(count_status(5), NASH, EventCountFilter("visit", 10)),
        FIXTURES / "restaurant5_nash_every10.scheme",
    )
    save_scheme(
        Scheme(count_status(5), NASH, LongTermFilter()),
        FIXTURES / "restaurant5_longterm_nash.scheme",
    )
    save_scheme(
        Scheme(count_status(5), NASH, PeriodicFilter(2)),
        FIXTURES / "restaurant5_periodic2_nash.scheme",
    )
    save_scheme(
        Scheme(count_status(5), NASH, AnytimeFilter()),
        FIXTURES / "restaurant5_anytime_nash.scheme",
    )

    save_scheme(
        Scheme(count_status(3), NASH, LongTermFilter()),
        FIXTURES / "restaurant3_longterm_nash.scheme",
    )
    save_scheme(
        Scheme(count_status(2), NASH, AnytimeFilter()),
        FIXTURES / "restaurant2_anytime_nash.scheme",
    )

    # one stakeholder judging dinners through the bundled machine
    save_scheme(
        Scheme(
            StatusFunction((StakeholderStatus(MachineSource(dinner_machine(), path="fig2.rm")),)),
            NASH,
            LongTermFilter(),
        ),
        FIXTURES / "dinner_machine.scheme",
    )

    save_scheme(
        Scheme(
            StatusFunction(
                (StakeholderStatus(MachineSource(greedy_trap_machine(), path="greedy_trap.rm")),)
            ),
            NASH,
            LongTermFilter(),
        ),
        FIXTURES / "greedy_trap.scheme",
    )

    save_scheme(
        Scheme(
            StatusFunction(
                (
                    StakeholderStatus(AtomCountSource("delivered_1")),
                    StakeholderStatus(AtomCountSource("delivered_2")),
                )
            ),
            NASH,
            EventCountFilter("round_complete", 1),
        ),
        FIXTURES / "delivery2_roundly_nash.scheme",
    )

    # markov-table stakeholder plus mixed accumulations, nested aggregation
    table = MarkovTableSource(
        rewards={
            ("v0", "italian", "v1"): 2.0,
            ("v1", "sushi", "v2"): 1.0,
            ("v2", "taco", "v3"): 0.5,
        },
        default=0.0,
    )
    save_markov_table(table, FIXTURES / "opening_moves.mt")
    save_scheme(
        Scheme(
            StatusFunction(
                (
                    StakeholderStatus(AtomCountSource("served_1"), "discounted", 0.5),
                    StakeholderStatus(
                        MarkovTableSource(table.rewards, table.default, path="opening_moves.mt")
                    ),
                    StakeholderStatus(AtomCountSource("served_3"), "mean"),
                )
            ),
            Aggregation(mode="time_then_stakeholders", inner_op="min", outer_op="sum"),
            PeriodicFilter(3),
        ),
        FIXTURES / "restaurant3_mixed.scheme",
    )

    # sample trajectories
    save_trajectory(
        rollout(env5, cycle_policy(env5.actions), horizon=12, seed=0),
        FIXTURES / "restaurant5_sample.traj",
    )
    save_trajectory(
        Trajectory(
            states=("d0", "d1", "d2", "d3"),
            actions=("pasta", "nothing", "cake"),
            labels=(frozenset({"pasta"}), frozenset(), frozenset({"cake"})),
        ),
        FIXTURES / "dinner.traj",
    )


if __name__ == "__main__":
    main()
