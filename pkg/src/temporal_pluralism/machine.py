"""Reward machines: guarded automata that emit a reward on every transition.

A machine reads one valuation (the set of atoms true at that step) per
transition and moves along the unique edge whose guard is satisfied.  The
reward of a label sequence is the sum of the rewards emitted along the run,
which lets a machine express history-dependent preferences that no per-step
table can.

Machines are required to be deterministic and total: for every state and
every valuation over the alphabet, exactly one outgoing guard holds.  This
is checked by exhaustive enumeration, which is exact and cheap for the
alphabet sizes that occur in practice.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import PluralismError
from .formula import (
    PropFormula,
    all_valuations,
    check_alphabet,
    eval_formula,
    format_valuation,
    formula_atoms,
    print_formula,
)


class InvalidStateError(PluralismError):
    """A step was attempted from a state the machine does not have."""


class NoEnabledTransitionError(PluralismError):
    """No outgoing guard held; the machine is not total at this valuation."""


class MachineValidationError(PluralismError):
    """Raised by require_valid when a machine fails the determinism/totality check."""

    def __init__(self, report: "MachineValidation"):
        super().__init__(report.describe())
        self.report = report


@dataclass(frozen=True)
class Transition:
    source: str
    guard: PropFormula
    target: str
    reward: float


@dataclass(frozen=True)
class NondeterministicGuards:
    state: str
    valuation: frozenset
    transition_indices: tuple[int, ...]

    def describe(self) -> str:
        idx = ", ".join(str(i) for i in self.transition_indices)
        return (
            f"state {self.state}: guards of transitions {idx} overlap on "
            f"{format_valuation(self.valuation)}"
        )


@dataclass(frozen=True)
class NotTotal:
    state: str
    valuation: frozenset

    def describe(self) -> str:
        return f"state {self.state}: no guard holds on {format_valuation(self.valuation)}"


@dataclass(frozen=True)
class MachineValidation:
    ok: bool
    problems: tuple

    def describe(self) -> str:
        if self.ok:
            return "deterministic, total"
        return "; ".join(p.describe() for p in self.problems)


@dataclass(frozen=True)
class RewardMachine:
    """A guarded automaton over a fixed alphabet of atomic propositions.

    `states` keeps declaration order; `initial` must be one of them.  Guards
    may only mention atoms from `alphabet`.  Construction normalizes the
    field types and checks referential integrity, but determinism and
    totality are a separate (exhaustive) check, see validate_machine.
    """

    states: tuple[str, ...]
    initial: str
    alphabet: tuple[str, ...]
    transitions: tuple[Transition, ...]
    _by_source: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "alphabet", check_alphabet(self.alphabet))
        object.__setattr__(self, "transitions", tuple(self.transitions))
        if len(set(self.states)) != len(self.states):
            raise ValueError("duplicate state names")
        if self.initial not in self.states:
            raise ValueError(f"initial state '{self.initial}' not among states")
        known = set(self.states)
        atoms = set(self.alphabet)
        by_source: dict = {s: [] for s in self.states}
        for i, t in enumerate(self.transitions):
            if t.source not in known:
                raise ValueError(f"transition {i}: unknown source state '{t.source}'")
            if t.target not in known:
                raise ValueError(f"transition {i}: unknown target state '{t.target}'")
            extra = formula_atoms(t.guard) - atoms
            if extra:
                raise ValueError(
                    f"transition {i}: guard mentions atoms outside the alphabet: "
                    + ", ".join(sorted(extra))
                )
            by_source[t.source].append((i, t))
        object.__setattr__(self, "_by_source", by_source)

    def outgoing(self, state: str):
        return self._by_source[state]


def validate_machine(machine: RewardMachine) -> MachineValidation:
    """Exhaustively check determinism and totality.

    Every (state, valuation) pair is enumerated; a valuation enabling more
    than one guard is reported as NondeterministicGuards, one enabling none
    as NotTotal.  Problems are collected in state order, then valuation
    order, so reports are stable.
    """
    problems: list = []
    for state in machine.states:
        outgoing = machine.outgoing(state)
        for valuation in all_valuations(machine.alphabet):
            enabled = [i for i, t in outgoing if eval_formula(t.guard, valuation)]
            if len(enabled) > 1:
                problems.append(NondeterministicGuards(state, valuation, tuple(enabled)))
            elif not enabled:
                problems.append(NotTotal(state, valuation))
    return MachineValidation(ok=not problems, problems=tuple(problems))


def require_valid(machine: RewardMachine) -> RewardMachine:
    report = validate_machine(machine)
    if not report.ok:
        raise MachineValidationError(report)
    return machine


def step_machine(machine: RewardMachine, state: str, valuation) -> tuple[str, float]:
    """One transition: returns (next state, emitted reward).

    Takes the first enabled transition in declaration order, which on a
    valid machine is also the only one.
    """
    if state not in machine._by_source:
        raise InvalidStateError(f"machine has no state '{state}'")
    for _, t in machine.outgoing(state):
        if eval_formula(t.guard, valuation):
            return t.target, t.reward
    raise NoEnabledTransitionError(
        f"no guard holds in state {state} on {format_valuation(valuation)}"
    )


@dataclass(frozen=True)
class MachineRun:
    visited: tuple[str, ...]
    rewards: tuple[float, ...]

    @property
    def total(self) -> float:
        return sum(self.rewards)


def run_machine(machine: RewardMachine, labels: Iterable[frozenset]) -> MachineRun:
    """Run the machine over a label sequence from its initial state.

    `visited` has one more entry than `rewards`: the state before each
    transition plus the final state.
    """
    state = machine.initial
    visited = [state]
    rewards: list[float] = []
    for valuation in labels:
        state, reward = step_machine(machine, state, valuation)
        visited.append(state)
        rewards.append(reward)
    return MachineRun(visited=tuple(visited), rewards=tuple(rewards))


def machine_reward(machine: RewardMachine, labels: Iterable[frozenset]) -> float:
    return run_machine(machine, labels).total
