"""Labelled sequential environments and the trajectories they produce.

An environment steps through states under chosen actions and labels each
transition with the set of atomic propositions that hold on it.  Both
bundled environments are deterministic given the action sequence; any
stochasticity enters only through the seeded stream handed to policies,
which keeps exhaustive search an exact oracle.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable, Sequence

from .errors import PluralismError
from .formula import check_alphabet


class InvalidActionError(PluralismError):
    """An action outside the environment's action set was attempted."""


@dataclass(frozen=True)
class Trajectory:
    """A finite run: T actions, T labels, T+1 states (strings identify both).

    The trajectory of horizon 0 is just the initial state.  Prefixes are
    themselves trajectories, which is what filtered scoring relies on.
    """

    states: tuple[str, ...]
    actions: tuple[str, ...]
    labels: tuple[frozenset, ...]

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "actions", tuple(self.actions))
        object.__setattr__(self, "labels", tuple(frozenset(l) for l in self.labels))
        if len(self.states) != len(self.actions) + 1:
            raise ValueError(
                f"{len(self.states)} states do not fit {len(self.actions)} actions"
            )
        if len(self.labels) != len(self.actions):
            raise ValueError(
                f"{len(self.labels)} labels do not fit {len(self.actions)} actions"
            )

    @property
    def horizon(self) -> int:
        return len(self.actions)

    def prefix(self, i: int) -> "Trajectory":
        """The first i steps, 0 <= i <= horizon."""
        if not 0 <= i <= self.horizon:
            raise ValueError(f"prefix length {i} outside [0, {self.horizon}]")
        return Trajectory(
            states=self.states[: i + 1],
            actions=self.actions[:i],
            labels=self.labels[:i],
        )


class LabelledEnv:
    """Base class; subclasses fill in alphabet, actions, reset, step, state_id.

    State objects are internal to the environment; `state_id` renders them as
    the strings stored in trajectories.
    """

    alphabet: tuple[str, ...] = ()
    actions: tuple[str, ...] = ()

    def reset(self, seed: int):
        raise NotImplementedError

    def step(self, state, action: str, rng: random.Random):
        """Returns (next_state, valuation). Deterministic for both bundled envs."""
        raise NotImplementedError

    def state_id(self, state) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class RestaurantConfig:
    """A group of friends and the restaurant types they favor.

    `preferred[i]` is the type friend i+1 wants; distinct friends may share
    a favorite.  Every step visits one restaurant.
    """

    n_friends: int
    restaurant_types: tuple[str, ...]
    preferred: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "restaurant_types", tuple(self.restaurant_types))
        object.__setattr__(self, "preferred", tuple(self.preferred))
        if self.n_friends < 1:
            raise ValueError("need at least one friend")
        if len(self.preferred) != self.n_friends:
            raise ValueError("one preferred type per friend")
        if len(set(self.restaurant_types)) != len(self.restaurant_types):
            raise ValueError("duplicate restaurant types")
        for t in self.preferred:
            if t not in self.restaurant_types:
                raise ValueError(f"preferred type '{t}' not offered")


class RestaurantEnv(LabelledEnv):
    """One restaurant booking per step for a group of friends.

    The label of a step contains `served_i` for every friend i whose
    preferred type was chosen, plus the atom `visit` on every step, so
    "every k-th restaurant" is expressible as an event-count filter without
    special-casing.
    """

    def __init__(self, config: RestaurantConfig):
        self.config = config
        self.actions = tuple(config.restaurant_types)
        self.alphabet = check_alphabet(
            [f"served_{i + 1}" for i in range(config.n_friends)] + ["visit"]
        )

    def reset(self, seed: int) -> int:
        return 0

    def step(self, state: int, action: str, rng: random.Random):
        if action not in self.config.restaurant_types:
            raise InvalidActionError(f"unknown restaurant type '{action}'")
        atoms = {
            f"served_{i + 1}"
            for i, pref in enumerate(self.config.preferred)
            if pref == action
        }
        atoms.add("visit")
        return state + 1, frozenset(atoms)

    def state_id(self, state: int) -> str:
        return f"v{state}"


@dataclass(frozen=True)
class DeliveryConfig:
    """A grid, a start cell, and recipients each expecting goods every round."""

    width: int
    height: int
    start: tuple[int, int]
    recipients: tuple[tuple[int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "start", tuple(self.start))
        object.__setattr__(
            self, "recipients", tuple(tuple(r) for r in self.recipients)
        )
        if self.width < 1 or self.height < 1:
            raise ValueError("grid must be at least 1x1")
        if not self._in_bounds(self.start):
            raise ValueError(f"start {self.start} outside the grid")
        if not self.recipients:
            raise ValueError("need at least one recipient")
        for cell in self.recipients:
            if not self._in_bounds(cell):
                raise ValueError(f"recipient cell {cell} outside the grid")
        if len(set(self.recipients)) != len(self.recipients):
            raise ValueError("recipients must occupy distinct cells")

    def _in_bounds(self, cell) -> bool:
        x, y = cell
        return 0 <= x < self.width and 0 <= y < self.height


_MOVES = {"north": (0, 1), "south": (0, -1), "east": (1, 0), "west": (-1, 0)}


class DeliveryGridEnv(LabelledEnv):
    """A robot distributing goods on a grid, one item per recipient per round.

    State is (x, y, delivered flags for the current round).  `deliver` on a
    recipient's cell who has not yet received this round's good labels the
    step `delivered_i`; when that delivery is the round's last, the label
    also contains `round_complete` and the flags reset.  Moves off the edge
    clamp in place; `deliver` elsewhere (or a repeat delivery) is a legal
    no-op step with an empty label.
    """

    def __init__(self, config: DeliveryConfig):
        self.config = config
        self.actions = ("north", "south", "east", "west", "deliver")
        self.alphabet = check_alphabet(
            [f"delivered_{i + 1}" for i in range(len(config.recipients))]
            + ["round_complete"]
        )

    def reset(self, seed: int):
        x, y = self.config.start
        return (x, y, (False,) * len(self.config.recipients))

    def step(self, state, action: str, rng: random.Random):
        if action not in self.actions:
            raise InvalidActionError(f"unknown action '{action}'")
        x, y, done = state
        if action in _MOVES:
            dx, dy = _MOVES[action]
            nx = min(max(x + dx, 0), self.config.width - 1)
            ny = min(max(y + dy, 0), self.config.height - 1)
            return (nx, ny, done), frozenset()
        # deliver
        atoms: set = set()
        new_done = list(done)
        for i, cell in enumerate(self.config.recipients):
            if cell == (x, y) and not done[i]:
                new_done[i] = True
                atoms.add(f"delivered_{i + 1}")
                break
        if atoms and all(new_done):
            atoms.add("round_complete")
            new_done = [False] * len(new_done)
        return (x, y, tuple(new_done)), frozenset(atoms)

    def state_id(self, state) -> str:
        x, y, done = state
        flags = "".join("1" if d else "0" for d in done)
        return f"x{x}y{y}d{flags}"


def rollout(
    env: LabelledEnv,
    policy: Callable,
    horizon: int,
    seed: int = 0,
) -> Trajectory:
    """Run `policy(state, t, rng)` for `horizon` steps from a fresh reset.

    The rng is a single random.Random(seed) shared across steps, so the
    whole episode is a deterministic function of (seed, policy).
    """
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    rng = random.Random(seed)
    state = env.reset(seed)
    states = [env.state_id(state)]
    actions: list[str] = []
    labels: list[frozenset] = []
    for t in range(1, horizon + 1):
        action = policy(state, t, rng)
        state, valuation = env.step(state, action, rng)
        states.append(env.state_id(state))
        actions.append(action)
        labels.append(valuation)
    return Trajectory(states=tuple(states), actions=tuple(actions), labels=tuple(labels))


def replay(env: LabelledEnv, action_seq: Sequence[str], seed: int = 0) -> Trajectory:
    """Rollout of a fixed action sequence (the optimizers' workhorse)."""
    seq = list(action_seq)

    def policy(state, t, rng):
        return seq[t - 1]

    return rollout(env, policy, horizon=len(seq), seed=seed)


def always_policy(action: str) -> Callable:
    def policy(state, t, rng):
        return action

    return policy


def cycle_policy(order: Sequence[str]) -> Callable:
    """Round-robin through `order`, restarting after the last entry."""
    order = tuple(order)
    if not order:
        raise ValueError("cycle needs at least one action")

    def policy(state, t, rng):
        return order[(t - 1) % len(order)]

    return policy


def sequence_policy(seq: Sequence[str]) -> Callable:
    """Play a fixed finite sequence; stepping past its end is an error."""
    seq = tuple(seq)

    def policy(state, t, rng):
        if t > len(seq):
            raise InvalidActionError(f"sequence policy exhausted at step {t}")
        return seq[t - 1]

    return policy


def random_policy(actions: Sequence[str]) -> Callable:
    actions = tuple(actions)

    def policy(state, t, rng):
        return rng.choice(actions)

    return policy
