"""Seeded random models for property tests and benchmarks."""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Dict, List, Optional

from .abstraction import Partition
from .models import Pomdp, Waz, validate_pomdp


def random_distribution(rng: random.Random, support: List[str], max_weight: int = 4) -> Dict[str, Fraction]:
    weights = [rng.randint(1, max_weight) for _ in support]
    total = sum(weights)
    return {s: Fraction(w, total) for s, w in zip(support, weights)}


def random_pomdp(rng: random.Random, n_states: Optional[int] = None, n_actions: Optional[int] = None,
                 n_obs: Optional[int] = None, max_states: int = 4) -> Pomdp:
    """A small stochastic POMDP; some states carry ``fail`` or ``unsafe``."""
    n = n_states or rng.randint(1, max_states)
    states = tuple(f"s{i}" for i in range(n))
    actions = tuple("ab"[: n_actions or rng.randint(1, 2)])
    observations = tuple(f"z{i}" for i in range(n_obs or rng.randint(1, 2)))
    transition = {}
    for s in states:
        transition[s] = {}
        for a in actions:
            k = rng.randint(1, min(3, n))
            transition[s][a] = random_distribution(rng, rng.sample(states, k))
    obs_fn = {}
    for s in states:
        k = rng.randint(1, len(observations))
        obs_fn[s] = random_distribution(rng, rng.sample(observations, k))
    labels = {}
    for s in states[1:] if n > 1 else states:
        roll = rng.random()
        labels[s] = frozenset({"fail"}) if roll < 0.3 else frozenset({"unsafe"}) if roll < 0.4 else frozenset()
    labels.setdefault(states[0], frozenset())
    if n > 1 and not any("fail" in x for x in labels.values()):
        labels[states[-1]] = frozenset({"fail"})
    return validate_pomdp(Pomdp(states, states[0], actions, transition, observations, obs_fn, labels))


def random_waz(rng: random.Random, n_states: Optional[int] = None, n_actions: Optional[int] = None,
               n_labels: Optional[int] = None, max_states: int = 4, denominators=(2, 3, 4, 5)) -> Waz:
    """A small 0/1-weighted automaton with rows that need not sum to 1."""
    n = n_states or rng.randint(1, max_states)
    states = tuple(f"q{i}" for i in range(n))
    actions = tuple("ab"[: n_actions or rng.randint(1, 2)])
    observations = tuple(f"z{i}" for i in range(n_labels or rng.randint(1, 2)))
    transition = {}
    for s in states:
        transition[s] = {}
        for a in actions:
            row = {}
            for t in states:
                if rng.random() < 0.6:
                    d = rng.choice(denominators)
                    w = Fraction(rng.randint(1, d), d)
                    row[t] = w
            transition[s][a] = row
    z_label = {s: rng.choice(observations) for s in states}
    labels = {s: frozenset({"goal"}) if rng.random() < 0.35 else frozenset() for s in states}
    if n > 1:
        # keep the initial state undecided so the value depends on the adversary
        labels[states[0]] = frozenset()
        if not any(labels.values()):
            labels[states[-1]] = frozenset({"goal"})
    return Waz(states, states[0], actions, transition, observations, z_label, labels)


def random_partition(rng: random.Random, system: Waz) -> Partition:
    """A random consistent partition: each label class is cut into random parts."""
    classes: Dict[tuple, List[str]] = {}
    for s in system.states:
        classes.setdefault((system.z_label[s], system.labels.get(s, frozenset())), []).append(s)
    blocks = []
    for members in classes.values():
        parts = rng.randint(1, len(members))
        buckets: List[List[str]] = [[] for _ in range(parts)]
        for i, s in enumerate(rng.sample(members, len(members))):
            buckets[i % parts if i < parts else rng.randrange(parts)].append(s)
        blocks.extend(b for b in buckets if b)
    blocks.sort(key=lambda b: min(system.index(s) for s in b))
    return Partition.from_blocks(system, blocks)
