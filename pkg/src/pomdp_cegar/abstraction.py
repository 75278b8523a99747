"""Consistent partitions, quotient automata and safe-simulation checking."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Callable, Dict, FrozenSet, Iterable, Mapping, Optional, Sequence, Tuple

from . import kernels
from .errors import ActionSetMismatch, InconsistentPartition
from .models import Waz


@dataclass(frozen=True)
class Partition:
    """Ordered blocks of concrete states.

    Members inside a block keep the system's declaration order. Block ids are
    positions; refinement keeps existing ids and appends new blocks.
    """

    blocks: Tuple[Tuple[str, ...], ...]
    _where: Dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        where = {}
        for i, block in enumerate(self.blocks):
            if not block:
                raise InconsistentPartition(f"block {i} is empty", "blocks")
            for s in block:
                if s in where:
                    raise InconsistentPartition(f"state {s!r} appears in blocks {where[s]} and {i}", "blocks")
                where[s] = i
        object.__setattr__(self, "_where", where)

    @classmethod
    def from_blocks(cls, system: Waz, blocks: Iterable[Iterable[str]]) -> "Partition":
        order = {s: i for i, s in enumerate(system.states)}
        out = []
        for b in blocks:
            members = list(b)
            for s in members:
                if s not in order:
                    raise InconsistentPartition(f"unknown state {s!r}", "blocks")
            out.append(tuple(sorted(set(members), key=order.__getitem__)))
        part = cls(tuple(out))
        part.check(system)
        return part

    @classmethod
    def discrete(cls, system: Waz) -> "Partition":
        return cls(tuple((s,) for s in system.states))

    def __len__(self):
        return len(self.blocks)

    def block_of(self, state: str) -> int:
        return self._where[state]

    def is_discrete(self) -> bool:
        return all(len(b) == 1 for b in self.blocks)

    def check(self, system: Waz) -> "Partition":
        if set(self._where) != set(system.states):
            missing = [s for s in system.states if s not in self._where]
            extra = sorted(set(self._where) - set(system.states))
            raise InconsistentPartition(f"partition does not cover the states (missing {missing}, unknown {extra})",
                                        "blocks")
        for i, block in enumerate(self.blocks):
            head = block[0]
            for s in block[1:]:
                if system.z_label[s] != system.z_label[head]:
                    raise InconsistentPartition(
                        f"block {i} mixes observation labels {system.z_label[head]!r} and {system.z_label[s]!r}",
                        "blocks")
                if system.labels.get(s, frozenset()) != system.labels.get(head, frozenset()):
                    raise InconsistentPartition(f"block {i} mixes atomic proposition labels", "blocks")
        return self

    def split(self, index: int, part: Iterable[str]) -> "Partition":
        """Split block ``index`` into ``part`` and the rest.

        The side holding the block's first member keeps the id; the other
        side becomes a new last block.
        """
        block = self.blocks[index]
        part = set(part)
        if not part or not part < set(block):
            raise ValueError("a split needs a nonempty proper subset of the block")
        moved = tuple(s for s in block if s in part)
        kept = tuple(s for s in block if s not in part)
        if block[0] in part:
            moved, kept = kept, moved
        blocks = list(self.blocks)
        blocks[index] = kept
        blocks.append(moved)
        return Partition(tuple(blocks))

    def refines(self, other: "Partition") -> bool:
        """True if every block of ``self`` lies inside one block of ``other``."""
        return all(len({other.block_of(s) for s in b}) == 1 for b in self.blocks)


def coarsest_partition(system: Waz) -> Partition:
    classes: Dict[tuple, list] = {}
    for s in system.states:
        key = (system.z_label[s], system.labels.get(s, frozenset()))
        classes.setdefault(key, []).append(s)
    return Partition(tuple(tuple(v) for v in classes.values()))


def block_names(partition: Partition) -> Tuple[str, ...]:
    return tuple(f"t{i}" for i in range(len(partition)))


def quotient(system: Waz, partition: Partition, names: Optional[Sequence[str]] = None) -> Waz:
    """Block automaton whose weight into a block is the largest member sum."""
    partition.check(system)
    names = tuple(names) if names is not None else block_names(partition)
    transition = {}
    for ci, block in enumerate(partition.blocks):
        by_action = {}
        for a in system.actions:
            best: Dict[int, Fraction] = {}
            for s in block:
                sums: Dict[int, Fraction] = {}
                for t, w in system.row(s, a).items():
                    if w:
                        j = partition.block_of(t)
                        sums[j] = sums.get(j, Fraction(0)) + w
                for j, w in sums.items():
                    if w > best.get(j, Fraction(0)):
                        best[j] = w
            by_action[a] = {names[j]: best[j] for j in sorted(best)}
        transition[names[ci]] = by_action
    z_label = {names[i]: system.z_label[b[0]] for i, b in enumerate(partition.blocks)}
    labels = {names[i]: frozenset(system.labels.get(b[0], frozenset())) for i, b in enumerate(partition.blocks)}
    return Waz(names, names[partition.block_of(system.initial)], system.actions, transition,
               system.observations, z_label, labels)


def weight_function(mu1: Mapping[str, Fraction], mu2: Mapping[str, Fraction],
                    related: Callable[[str, str], bool]) -> Optional[Dict[Tuple[str, str], Fraction]]:
    """A weight function coupling ``mu1`` into ``mu2`` along ``related``, or None.

    Every unit of ``mu1`` must be routed to related states of ``mu2`` without
    exceeding their weights; decided as an exact integer max-flow.
    """
    left = [s for s, m in mu1.items() if m > 0]
    right = [t for t, m in mu2.items() if m > 0]
    if not left:
        return {}
    scale = lcm(1, *(Fraction(mu1[s]).denominator for s in left), *(Fraction(mu2[t]).denominator for t in right))
    supply = [int(mu1[s] * scale) for s in left]
    total = sum(supply)
    src, sink = 0, 1 + len(left) + len(right)
    edges = [(src, 1 + i, c) for i, c in enumerate(supply)]
    pair_edges = []
    for i, s in enumerate(left):
        for j, t in enumerate(right):
            if related(s, t):
                pair_edges.append((len(edges), s, t))
                edges.append((1 + i, 1 + len(left) + j, total + 1))
    for j, t in enumerate(right):
        edges.append((1 + len(left) + j, sink, int(mu2[t] * scale)))
    value, flows = kernels.max_flow(sink + 1, edges, src, sink)
    if value != total:
        return None
    return {(s, t): Fraction(flows[e], scale) for e, s, t in pair_edges if flows[e]}


def weight_function_exists(mu1, mu2, related) -> bool:
    if not callable(related):
        pairs = frozenset(related)
        related = lambda s, t: (s, t) in pairs  # noqa: E731
    return weight_function(mu1, mu2, related) is not None


def _compatible(sys1: Waz, s1: str, sys2: Waz, s2: str) -> bool:
    return (sys1.z_label[s1] == sys2.z_label[s2]
            and sys1.labels.get(s1, frozenset()) == sys2.labels.get(s2, frozenset()))


def check_safe_simulation(sys1: Waz, sys2: Waz) -> Optional[FrozenSet[Tuple[str, str]]]:
    """Greatest safe simulation of ``sys1`` by ``sys2`` if it relates the initial states."""
    if set(sys1.actions) != set(sys2.actions):
        raise ActionSetMismatch(f"actions {sorted(sys1.actions)} vs {sorted(sys2.actions)}")
    if set(sys1.z_label.values()) - set(sys2.z_label.values()) - set(sys2.observations):
        raise ActionSetMismatch("observation labels of the first system are unknown to the second")
    rel = {(s1, s2) for s1 in sys1.states for s2 in sys2.states if _compatible(sys1, s1, sys2, s2)}
    changed = True
    while changed:
        changed = False
        for pair in sorted(rel, key=lambda p: (sys1.index(p[0]), sys2.index(p[1]))):
            s1, s2 = pair
            related = lambda a, b: (a, b) in rel  # noqa: E731
            for a in sys1.actions:
                if weight_function(sys1.row(s1, a), sys2.row(s2, a), related) is None:
                    rel.discard(pair)
                    changed = True
                    break
    if (sys1.initial, sys2.initial) not in rel:
        return None
    return frozenset(rel)


def membership_relation(concrete: Waz, partition: Partition, abstract: Waz) -> FrozenSet[Tuple[str, str]]:
    return frozenset((s, abstract.states[partition.block_of(s)]) for s in concrete.states)
