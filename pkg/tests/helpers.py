"""Model builders shared by several test modules."""

import random
from fractions import Fraction

from pomdp_cegar.models import ObservationAdversary, Waz


def reachable(system):
    seen = {system.initial}
    todo = [system.initial]
    while todo:
        s = todo.pop()
        for a in system.actions:
            for t, w in system.row(s, a).items():
                if w and t not in seen:
                    seen.add(t)
                    todo.append(t)
    return seen


def argmax_member(concrete, partition, block, a, target):
    best, arg = Fraction(0), None
    for s in partition.blocks[block]:
        tot = sum((w for t, w in concrete.row(s, a).items() if partition.block_of(t) == target), Fraction(0))
        if tot > best:
            best, arg = tot, s
    return arg


def mutate_quotient(rng: random.Random, concrete, partition, abstract):
    """Copy of ``abstract`` with one weight lowered below its defining maximum.

    The lowered edge is chosen so that its maximising member is reachable
    from the initial state, which makes the simulation fail for sure when
    each concrete state has a single label-compatible block.
    """
    live = reachable(concrete)
    options = []
    for ci, c in enumerate(abstract.states):
        for a in abstract.actions:
            for d, w in abstract.row(c, a).items():
                s = argmax_member(concrete, partition, ci, a, abstract.index(d))
                if s in live:
                    options.append((c, a, d, w))
    if not options:
        return None
    c, a, d, w = rng.choice(options)
    lowered = w * Fraction(rng.randint(0, 9), 10)
    transition = {s: {b: dict(row) for b, row in by_a.items()} for s, by_a in abstract.transition.items()}
    transition[c][a][d] = lowered
    return Waz(abstract.states, abstract.initial, abstract.actions, transition,
               abstract.observations, abstract.z_label, abstract.labels)


def split_successors():
    """Two same-label states that each lead to a different same-label target."""
    one, half = Fraction(1), Fraction(1, 2)
    states = ("i", "s1", "s2", "d1", "d2")
    transition = {"i": {"a": {"s1": half, "s2": half}}, "s1": {"a": {"d1": one}}, "s2": {"a": {"d2": one}},
                  "d1": {"a": {"d1": one}}, "d2": {"a": {"d2": one}}}
    z_label = {"i": "init", "s1": "z1", "s2": "z1", "d1": "z2", "d2": "z2"}
    labels = {"d1": frozenset({"goal"}), "d2": frozenset({"goal"})}
    return Waz(states, "i", ("a",), transition, ("z1", "z2"), z_label, labels)


def random_adversary(rng: random.Random, system, horizon):
    """A random pure table over every observation history up to ``horizon``."""
    choices = {}
    layer = [(system.z_label[system.initial],)]
    zs = sorted(set(system.z_label.values()))
    for _ in range(horizon):
        nxt = []
        for h in layer:
            a = rng.choice(system.actions)
            choices[h] = a
            nxt.extend(h + (a, z) for z in zs)
        layer = nxt
    return ObservationAdversary(choices, horizon)
