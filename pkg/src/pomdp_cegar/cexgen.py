"""Counterexamples as finite sets of finite abstract paths.

The adversary resolves the nondeterminism of a Waz, leaving a weighted
history tree (the induced DTMC, unrolled to the horizon). Satisfying paths
are enumerated best-first by exact probability; since every weight is at
most 1 a path never gains probability by growing, so the first completed
paths popped are the strongest ones.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction
from itertools import count
from typing import Callable, Iterator, List, Optional, Tuple

from .errors import Exhausted
from .logic import BoundedUntilSpec, holds_in
from .models import ObservationAdversary, Path, Waz


@dataclass(frozen=True)
class Node:
    state: str
    history: Tuple[str, ...]
    path: Path
    prob: Fraction

    @property
    def depth(self) -> int:
        return self.path.length


class Unrolling:
    """Lazy depth-bounded unrolling of a Waz under an observation adversary."""

    def __init__(self, system: Waz, adversary: ObservationAdversary, horizon: int):
        self.system = system
        self.adversary = adversary
        self.horizon = horizon

    @property
    def root(self) -> Node:
        s = self.system.initial
        return Node(s, (self.system.z_label[s],), Path((s,)), Fraction(1))

    def children(self, node: Node) -> List[Node]:
        if node.depth >= self.horizon:
            return []
        a = self.adversary.action(node.history)
        out = []
        for t in self.system.states:
            w = self.system.T(node.state, a, t)
            if w:
                out.append(Node(t, node.history + (a, self.system.z_label[t]),
                                node.path.extend(a, t), node.prob * w))
        return out

    def nodes(self, max_depth: Optional[int] = None) -> Iterator[Node]:
        """All nodes breadth-first, down to ``max_depth`` (default: the horizon)."""
        limit = self.horizon if max_depth is None else min(max_depth, self.horizon)
        layer = [self.root]
        for d in range(limit + 1):
            yield from layer
            if d < limit:
                layer = [c for n in layer for c in self.children(n)]


def induce_dtmc(system: Waz, adversary: ObservationAdversary, horizon: int) -> Unrolling:
    return Unrolling(system, adversary, horizon)


@dataclass(frozen=True)
class Counterexample:
    paths: Tuple[Tuple[Path, Fraction], ...]
    total: Fraction
    adversary: ObservationAdversary
    spec: BoundedUntilSpec

    def __len__(self):
        return len(self.paths)


def default_tie_key(system: Waz) -> Callable[[Path], tuple]:
    def key(path: Path):
        return (path.length, tuple(system.index(s) for s in path.states))
    return key


def satisfying_paths(unrolling: Unrolling, spec: BoundedUntilSpec,
                     tie_key: Optional[Callable[[Path], tuple]] = None) -> Iterator[Tuple[Path, Fraction]]:
    """Paths satisfying the until formula in nonincreasing probability.

    Paths of equal probability are released together, ordered by
    ``tie_key`` (shortest first, then state declaration order by default).
    """
    system = unrolling.system
    key = tie_key or default_tie_key(system)
    order = count()
    heap = [(-Fraction(1), next(order), unrolling.root)]
    while heap:
        level = -heap[0][0]
        done = []
        while heap and -heap[0][0] == level:
            _, _, node = heapq.heappop(heap)
            labels = system.labels.get(node.state, frozenset())
            if holds_in(labels, spec.phi2):
                done.append(node.path)
                continue
            if not holds_in(labels, spec.phi1):
                continue
            for child in unrolling.children(node):
                heapq.heappush(heap, (-child.prob, next(order), child))
        for path in sorted(done, key=key):
            yield path, level


def extract_counterexample(unrolling: Unrolling, spec: BoundedUntilSpec,
                           tie_key: Optional[Callable[[Path], tuple]] = None) -> Counterexample:
    paths = []
    total = Fraction(0)
    for path, prob in satisfying_paths(unrolling, spec, tie_key):
        paths.append((path, prob))
        total += prob
        if spec.violated_by(total):
            return Counterexample(tuple(paths), total, unrolling.adversary, spec)
    raise Exhausted(f"all satisfying paths together carry only {total}, which does not break {spec}")
