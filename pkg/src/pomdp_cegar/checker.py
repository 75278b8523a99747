"""Exact bounded-until model checking of 0/1-weighted automata.

A Waz is treated as a weighted POMDP whose observation function is the
Dirac distribution on its z-label. The maximum probability of
``phi1 U<=k phi2`` over observation-based adversaries is computed by value
iteration on *unnormalised occupancy vectors* ``u = b * C``:

    V_0(u) = sum of u over the target states
    V_t(u) = max_a sum_z V_{t-1}(step(u, a, z))

Internally every weight is scaled by the lcm ``D`` of the weight
denominators, so occupancies are integer vectors and no fractions are
formed inside the recursion. Because ``V_t`` is positively homogeneous the
memo is keyed on the primitive (gcd-reduced) vector and the remaining depth.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm
from typing import Dict, FrozenSet, Iterable, Mapping, Optional, Tuple

from . import kernels
from .errors import BudgetExceeded, MissingAdversaryEntry
from .logic import BoundedUntilSpec, Not, satisfying_states
from .models import ObservationAdversary, Waz

DEFAULT_MEMO_BUDGET = 250_000


@dataclass(frozen=True)
class Verdict:
    """Outcome of a bounded-until check.

    ``value`` is the exact maximum when ``exact`` is set; otherwise it is the
    value the returned witness achieves at the full horizon, a lower bound on
    the maximum that already breaks the threshold. ``witness_horizon`` is the
    depth at which the violation was first witnessed.
    """

    satisfied: bool
    value: Fraction
    witness: Optional[ObservationAdversary] = None
    exact: bool = True
    witness_horizon: Optional[int] = None
    warm_started: bool = False


@dataclass(frozen=True)
class ValueResult:
    value: Fraction
    witness: Optional[ObservationAdversary]
    horizon: int
    exact: bool


def make_absorbing(system: Waz, spec: BoundedUntilSpec) -> Waz:
    frozen = satisfying_states(system, Not(spec.phi1)) | satisfying_states(system, spec.phi2)
    transition = {}
    for s in system.states:
        if s in frozen:
            transition[s] = {a: {s: Fraction(1)} for a in system.actions}
        else:
            transition[s] = system.transition.get(s, {})
    return Waz(system.states, system.initial, system.actions, transition,
               system.observations, system.z_label, system.labels)


def step_occupancy(system: Waz, u: Mapping[str, Fraction], a: str, z: str) -> Dict[str, Fraction]:
    out: Dict[str, Fraction] = {}
    for s, mass in u.items():
        if not mass:
            continue
        for t, w in system.row(s, a).items():
            if system.z_label[t] == z:
                out[t] = out.get(t, Fraction(0)) + mass * w
    return {t: m for t, m in out.items() if m}


class ValueIteration:
    """Memoised exact value iteration over one absorbing Waz."""

    def __init__(self, system: Waz, target: Iterable[str], absorbing: Iterable[str] = (),
                 memo_budget: int = DEFAULT_MEMO_BUDGET):
        self.system = system
        self.n = len(system.states)
        denoms = [w.denominator for s in system.states for a in system.actions
                  for w in system.row(s, a).values()]
        self.scale = lcm(1, *denoms)
        idx = system.index
        self.rows = []
        for a in system.actions:
            per_state = []
            for s in system.states:
                per_state.append(tuple((idx(t), int(w * self.scale))
                                       for t, w in system.row(s, a).items() if w))
            self.rows.append(per_state)
        self.obs_names = list(system.observations)
        for s in system.states:
            if system.z_label[s] not in self.obs_names:
                self.obs_names.append(system.z_label[s])
        zpos = {z: i for i, z in enumerate(self.obs_names)}
        self.zgroups = [[] for _ in self.obs_names]
        for s in system.states:
            self.zgroups[zpos[system.z_label[s]]].append(idx(s))
        self.target = tuple(sorted(idx(s) for s in target))
        frozen = set(absorbing) | set(target)
        self.live = tuple(i for i, s in enumerate(system.states) if s not in frozen)
        self.budget = memo_budget
        self.memo: Dict[Tuple[Tuple[int, ...], int], Tuple[int, int]] = {}
        self.root = tuple(1 if i == idx(system.initial) else 0 for i in range(self.n))
        self.root_history = (system.z_label[system.initial],)
        self._action_pos = {a: i for i, a in enumerate(system.actions)}

    # -- core recursion -------------------------------------------------
    def scaled_value(self, vec: Tuple[int, ...], depth: int) -> int:
        """``V_depth(vec) * scale**depth`` as an exact integer."""
        if depth == 0 or not kernels.masked_sum(vec, self.live):
            return kernels.masked_sum(vec, self.target) * self.scale ** depth
        key = (vec, depth)
        hit = self.memo.get(key)
        if hit is not None:
            return hit[0]
        best, arg = -1, 0
        for ai, rows in enumerate(self.rows):
            total = 0
            for _, g, child in kernels.children(rows, vec, self.zgroups):
                total += g * self.scaled_value(child, depth - 1)
            if total > best:
                best, arg = total, ai
        self.memo[key] = (best, arg)
        if len(self.memo) > self.budget:
            raise BudgetExceeded(f"more than {self.budget} distinct (occupancy, depth) entries")
        return best

    def value(self, depth: int) -> Fraction:
        return Fraction(self.scaled_value(self.root, depth), self.scale ** depth)

    def value_of(self, u: Mapping[str, Fraction], depth: int) -> Fraction:
        """``V_depth`` of an arbitrary nonnegative occupancy vector."""
        den = lcm(1, *(Fraction(m).denominator for m in u.values()))
        vec = [0] * self.n
        for s, m in u.items():
            vec[self.system.index(s)] = int(Fraction(m) * den)
        g = gcd(*vec)
        if not g:
            return Fraction(0)
        prim = tuple(x // g for x in vec)
        return Fraction(g * self.scaled_value(prim, depth), den * self.scale ** depth)

    # -- adversaries ----------------------------------------------------
    def witness(self, depth: int, horizon: int) -> ObservationAdversary:
        """Argmax choices along every reachable history of the depth-``depth`` tree."""
        acts = self.system.actions
        choices = {}
        stack = [(self.root_history, self.root, depth)]
        while stack:
            h, vec, d = stack.pop()
            if d == 0 or not kernels.masked_sum(vec, self.live):
                continue
            self.scaled_value(vec, d)
            ai = self.memo[(vec, d)][1]
            choices[h] = acts[ai]
            if len(choices) > self.budget:
                raise BudgetExceeded("witness adversary exceeds the memo budget")
            for z, _, child in kernels.children(self.rows[ai], vec, self.zgroups):
                stack.append((h + (acts[ai], self.obs_names[z]), child, d - 1))
        return ObservationAdversary(choices, horizon, default=acts[0])

    def evaluate(self, adversary: ObservationAdversary, depth: int) -> Fraction:
        """Value of following ``adversary`` for ``depth`` steps (no maximisation)."""
        acts = self.system.actions

        def rec(h, vec, d):
            if d == 0 or not kernels.masked_sum(vec, self.live):
                return kernels.masked_sum(vec, self.target) * self.scale ** d
            if not adversary.has_explicit_below(h):
                if adversary.default is None:
                    raise MissingAdversaryEntry(h)
                rows = self.rows[self._action_pos[adversary.default]]
                v = vec
                for _ in range(d):
                    v = kernels.propagate(rows, v)
                return kernels.masked_sum(v, self.target)
            a = adversary.action(h)
            ai = self._action_pos[a]
            total = 0
            for z, g, child in kernels.children(self.rows[ai], vec, self.zgroups):
                total += g * rec(h + (a, self.obs_names[z]), child, d - 1)
            return total

        return Fraction(rec(self.root_history, self.root, depth), self.scale ** depth)


def _ensure_recursion(depth: int):
    need = 4 * depth + 200
    if sys.getrecursionlimit() < need:
        sys.setrecursionlimit(need)


def value_iterate(system: Waz, target: FrozenSet[str], horizon: int,
                  threshold: Optional[Fraction] = None, comparison: str = "<=", *,
                  absorbing: Iterable[str] = (), early_exit: bool = True,
                  memo_budget: int = DEFAULT_MEMO_BUDGET) -> ValueResult:
    """Maximum ``target`` mass within ``horizon`` steps of an absorbing Waz.

    Without a threshold, or with ``early_exit`` off, the exact ``V_horizon``
    and its argmax witness are returned. With a threshold the horizon is
    deepened from 0 and the search stops at the first depth whose value
    already breaks it; the witness then plays the lowest action beyond that
    depth. A satisfied threshold yields ``witness=None``.
    """
    _ensure_recursion(horizon)
    vi = ValueIteration(system, target, absorbing, memo_budget)

    def breaks(v):
        if threshold is None:
            return False
        return v > threshold if comparison == "<=" else v >= threshold

    if threshold is not None and early_exit:
        for t in range(horizon + 1):
            v = vi.value(t)
            if breaks(v):
                witness = vi.witness(t, horizon)
                if t == horizon:
                    return ValueResult(v, witness, t, True)
                return ValueResult(vi.evaluate(witness, horizon), witness, t, False)
        return ValueResult(v, None, horizon, True)
    v = vi.value(horizon)
    if threshold is not None and not breaks(v):
        return ValueResult(v, None, horizon, True)
    return ValueResult(v, vi.witness(horizon, horizon), horizon, True)


def evaluate_adversary(system: Waz, spec: BoundedUntilSpec, adversary: ObservationAdversary) -> Fraction:
    """Probability mass of paths satisfying ``spec`` under a fixed adversary."""
    _ensure_recursion(spec.horizon)
    absorbing_sys = make_absorbing(system, spec)
    vi = ValueIteration(absorbing_sys, satisfying_states(system, spec.phi2),
                        satisfying_states(system, Not(spec.phi1)))
    return vi.evaluate(adversary, spec.horizon)


def model_check(system: Waz, spec: BoundedUntilSpec, *,
                warm_start: Optional[ObservationAdversary] = None,
                memo_budget: int = DEFAULT_MEMO_BUDGET, early_exit: bool = True) -> Verdict:
    _ensure_recursion(spec.horizon)
    absorbing_sys = make_absorbing(system, spec)
    target = satisfying_states(system, spec.phi2)
    dead = satisfying_states(system, Not(spec.phi1))
    if warm_start is not None:
        vi = ValueIteration(absorbing_sys, target, dead, memo_budget)
        try:
            v = vi.evaluate(warm_start, spec.horizon)
        except MissingAdversaryEntry:
            v = None
        if v is not None and spec.violated_by(v):
            return Verdict(False, v, warm_start.with_horizon(spec.horizon), exact=False,
                           witness_horizon=spec.horizon, warm_started=True)
    res = value_iterate(absorbing_sys, target, spec.horizon, spec.threshold, spec.comparison,
                        absorbing=dead, early_exit=early_exit, memo_budget=memo_budget)
    if res.witness is None:
        return Verdict(True, res.value)
    return Verdict(False, res.value, res.witness, exact=res.exact, witness_horizon=res.horizon)
