"""POMDPs, z-labeled 0/1-weighted automata, paths and observation-based adversaries.

All probabilities are :class:`fractions.Fraction` values. Every container is
treated as immutable once constructed; operations return new objects.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, Iterator, Mapping, Optional, Sequence, Tuple

from .errors import DanglingReference, IndexOutOfRange, MissingAdversaryEntry, RowSumError

INIT = "init"
PAIR_SEP = "·"

TransitionMap = Mapping[str, Mapping[str, Mapping[str, Fraction]]]


def to_fraction(value) -> Fraction:
    """Convert ints, Fractions and decimal or ``p/q`` strings exactly.

    Floats are rejected because their binary value is not the decimal the
    user wrote.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not probabilities")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot convert {value!r} exactly; use a string such as '0.475' or '19/40'")


def pair_id(state: str, obs: str) -> str:
    return f"{state}{PAIR_SEP}{obs}"


@dataclass(frozen=True)
class Pomdp:
    states: Tuple[str, ...]
    initial: str
    actions: Tuple[str, ...]
    transition: TransitionMap
    observations: Tuple[str, ...]
    obs_fn: Mapping[str, Mapping[str, Fraction]]
    labels: Mapping[str, FrozenSet[str]]
    # set when the initial state was synthesised from an initial distribution
    dummy_initial: bool = False

    def T(self, s: str, a: str, t: str) -> Fraction:
        return self.transition.get(s, {}).get(a, {}).get(t, Fraction(0))

    def O(self, s: str, z: str) -> Fraction:
        return self.obs_fn.get(s, {}).get(z, Fraction(0))


@dataclass(frozen=True)
class Waz:
    """A z-labeled 0/1-weighted automaton.

    ``transition[s][a]`` maps successors to weights in [0, 1]; the weights of
    one row may sum to more than 1. Missing rows are all-zero.
    """

    states: Tuple[str, ...]
    initial: str
    actions: Tuple[str, ...]
    transition: TransitionMap
    observations: Tuple[str, ...]
    z_label: Mapping[str, str]
    labels: Mapping[str, FrozenSet[str]]
    _index: Dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(self.states)})

    def index(self, state: str) -> int:
        return self._index[state]

    def row(self, s: str, a: str) -> Mapping[str, Fraction]:
        return self.transition.get(s, {}).get(a, {})

    def T(self, s: str, a: str, t: str) -> Fraction:
        return self.row(s, a).get(t, Fraction(0))

    def is_stochastic(self) -> bool:
        return all(sum(self.row(s, a).values()) == 1 for s in self.states for a in self.actions)

    def __len__(self):
        return len(self.states)


@dataclass(frozen=True)
class GuidedMdp:
    """Guided MDP of a POMDP: states are the initial state plus ``[s, z]`` pairs."""

    states: Tuple[str, ...]
    initial: str
    actions: Tuple[str, ...]
    transition: TransitionMap
    # pair id -> (POMDP state, observation); the initial state maps to None
    origin: Mapping[str, Optional[Tuple[str, str]]]


@dataclass(frozen=True)
class Path:
    """Alternating state/action sequence ``s0 a0 s1 ... sn``."""

    states: Tuple[str, ...]
    actions: Tuple[str, ...] = ()

    def __post_init__(self):
        if len(self.states) != len(self.actions) + 1:
            raise ValueError("a path needs exactly one more state than actions")

    @property
    def length(self) -> int:
        return len(self.actions)

    def __getitem__(self, i: int) -> str:
        return self.states[i]

    def extend(self, action: str, state: str) -> "Path":
        return Path(self.states + (state,), self.actions + (action,))

    def __str__(self):
        out = [self.states[0]]
        for a, s in zip(self.actions, self.states[1:]):
            out.append(f"-{a}->")
            out.append(s)
        return " ".join(out)


History = Tuple[str, ...]


@dataclass(frozen=True)
class ObservationAdversary:
    """Pure adversary over observation histories ``(z0, a0, z1, ..., zt)``.

    Histories absent from ``choices`` fall back to ``default``; with no
    default such a lookup raises :class:`MissingAdversaryEntry`.
    """

    choices: Mapping[History, str]
    horizon: int
    default: Optional[str] = None
    _prefixes: FrozenSet[History] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        prefixes = set()
        for h in self.choices:
            for cut in range(1, len(h) + 1, 2):
                prefixes.add(h[:cut])
        object.__setattr__(self, "_prefixes", frozenset(prefixes))

    @classmethod
    def stationary(cls, action: str, horizon: int) -> "ObservationAdversary":
        return cls({}, horizon, default=action)

    def action(self, history: Sequence[str]) -> str:
        h = tuple(history)
        try:
            return self.choices[h]
        except KeyError:
            if self.default is None:
                raise MissingAdversaryEntry(h) from None
            return self.default

    def has_explicit_below(self, history: Sequence[str]) -> bool:
        """True if some explicit choice is made at ``history`` or later in it."""
        return tuple(history) in self._prefixes

    def with_horizon(self, horizon: int) -> "ObservationAdversary":
        return ObservationAdversary(self.choices, horizon, self.default)

    def table(self) -> Iterator[Tuple[History, str]]:
        yield from sorted(self.choices.items(), key=lambda kv: (len(kv[0]), kv[0]))


def validate_pomdp(model: Pomdp) -> Pomdp:
    states = set(model.states)
    actions = set(model.actions)
    observations = set(model.observations)
    if len(states) != len(model.states):
        raise DanglingReference("duplicate state identifiers", "states")
    if model.initial not in states:
        raise DanglingReference(f"initial state {model.initial!r} is not declared", "initial")
    for s, by_action in model.transition.items():
        if s not in states:
            raise DanglingReference(f"unknown state {s!r}", "transitions")
        for a, row in by_action.items():
            if a not in actions:
                raise DanglingReference(f"unknown action {a!r}", "transitions")
            for t, p in row.items():
                if t not in states:
                    raise DanglingReference(f"unknown state {t!r}", "transitions")
                if not 0 <= p <= 1:
                    raise RowSumError(f"T({s},{a},{t}) = {p} outside [0,1]", "transitions")
    for s, row in model.obs_fn.items():
        if s not in states:
            raise DanglingReference(f"unknown state {s!r}", "observation_function")
        for z, p in row.items():
            if z not in observations:
                raise DanglingReference(f"unknown observation {z!r}", "observation_function")
            if not 0 <= p <= 1:
                raise RowSumError(f"O({s},{z}) = {p} outside [0,1]", "observation_function")
    for s in model.states:
        for a in model.actions:
            total = sum(model.transition.get(s, {}).get(a, {}).values(), Fraction(0))
            if total != 1:
                raise RowSumError(f"transition row ({s}, {a}) sums to {total}, expected 1", "transitions")
        total = sum(model.obs_fn.get(s, {}).values(), Fraction(0))
        if total != 1:
            raise RowSumError(f"observation row of {s} sums to {total}, expected 1", "observation_function")
    for s in model.labels:
        if s not in states:
            raise DanglingReference(f"labels reference unknown state {s!r}", "states")
    return model


def guided_mdp(pomdp: Pomdp) -> GuidedMdp:
    pairs = []
    origin: Dict[str, Optional[Tuple[str, str]]] = {pomdp.initial: None}
    for s in pomdp.states:
        if pomdp.dummy_initial and s == pomdp.initial:
            continue
        for z in pomdp.observations:
            if pomdp.O(s, z) > 0:
                x = pair_id(s, z)
                pairs.append(x)
                origin[x] = (s, z)
    targets = [(x, origin[x]) for x in pairs]

    def successors(s: str) -> Dict[str, Dict[str, Fraction]]:
        out = {}
        for a in pomdp.actions:
            row = {}
            for x, (t, z) in targets:
                w = pomdp.T(s, a, t) * pomdp.O(t, z)
                if w:
                    row[x] = w
            out[a] = row
        return out

    transition = {pomdp.initial: successors(pomdp.initial)}
    for x in pairs:
        transition[x] = successors(origin[x][0])
    return GuidedMdp((pomdp.initial, *pairs), pomdp.initial, pomdp.actions, transition, origin)


def corresponding_waz(pomdp: Pomdp) -> Waz:
    g = guided_mdp(pomdp)
    z_label = {}
    labels = {}
    for x in g.states:
        src = g.origin[x]
        if src is None:
            z_label[x] = INIT
            labels[x] = frozenset(pomdp.labels.get(pomdp.initial, ()))
        else:
            z_label[x] = src[1]
            labels[x] = frozenset(pomdp.labels.get(src[0], ()))
    return Waz(g.states, g.initial, g.actions, g.transition, (*pomdp.observations, INIT), z_label, labels)


def path_probability(system, path: Path, i: int = 0, j: Optional[int] = None) -> Fraction:
    if j is None:
        j = path.length
    if not 0 <= i <= j <= path.length:
        raise IndexOutOfRange(f"need 0 <= i <= j <= {path.length}, got i={i}, j={j}")
    prob = Fraction(1)
    for k in range(i, j):
        prob *= system.T(path.states[k], path.actions[k], path.states[k + 1])
    return prob


def observation_sequence(system: Waz, path: Path) -> History:
    out = [system.z_label[path.states[0]]]
    for a, s in zip(path.actions, path.states[1:]):
        out.append(a)
        out.append(system.z_label[s])
    return tuple(out)


def parity_chain(n: int = 20) -> Pomdp:
    """The ``n + 3`` state parity POMDP with a noisy even/odd sensor.

    A chain ``s0 .. s{n-1}`` advances under ``a`` with probability 1/2, leaks
    1/4 into the failure state and 1/4 into an absorbing parity state; ``b``
    stays put. The sensor reports the parity of the chain index correctly
    with probability 0.95.
    """
    if n < 2 or n % 2:
        raise ValueError("n must be an even number >= 2")
    half, quarter = Fraction(1, 2), Fraction(1, 4)
    chain = [f"s{i}" for i in range(n)]
    states = (*chain, "s_odd", "s_even", "s_f")
    transition: Dict[str, Dict[str, Dict[str, Fraction]]] = {}
    for i, s in enumerate(chain):
        nxt = chain[i + 1] if i < n - 1 else s
        side = "s_even" if i % 2 == 0 else "s_odd"
        transition[s] = {"a": {nxt: half, "s_f": quarter, side: quarter}, "b": {s: Fraction(1)}}
    transition["s_odd"] = {"a": {"s_odd": half, "s_f": half}, "b": {"s_odd": Fraction(1)}}
    transition["s_even"] = {"a": {"s_even": Fraction(1)}, "b": {"s_even": Fraction(1)}}
    transition["s_f"] = {"a": {"s_f": Fraction(1)}, "b": {"s_f": Fraction(1)}}
    right, wrong = Fraction(19, 20), Fraction(1, 20)
    obs_fn: Dict[str, Dict[str, Fraction]] = {}
    for i, s in enumerate(chain):
        obs_fn[s] = {"z_odd": right, "z_even": wrong} if i % 2 else {"z_odd": wrong, "z_even": right}
    obs_fn["s_odd"] = {"z_odd": Fraction(1)}
    obs_fn["s_even"] = {"z_even": Fraction(1)}
    obs_fn["s_f"] = {"z_f": Fraction(1)}
    labels = {s: frozenset() for s in states}
    labels["s_f"] = frozenset({"fail"})
    return validate_pomdp(
        Pomdp(states, "s0", ("a", "b"), transition, ("z_odd", "z_even", "z_f"), obs_fn, labels)
    )
