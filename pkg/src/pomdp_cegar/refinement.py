"""Spuriousness checking and counterexample-guided partition splitting.

An abstract path ``c0 a0 c1 ... cn`` over the blocks of a partition is
*realised* by every concrete path ``s0 a0 s1 ... sn`` with ``si in ci``. The
realisable mass is computed layer by layer (forward dynamic programming over
the block-membership DAG); explicit realisations are only enumerated for
reports.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .abstraction import Partition, block_names, quotient
from .cexgen import Counterexample
from .errors import BudgetExceeded, NoSplittableBlock, NotSpurious
from .logic import BoundedUntilSpec
from .models import Path, Waz, path_probability

MAX_REMAPPED_PATHS = 200_000

PathsLike = Union[Counterexample, Sequence[Path]]


def _paths_of(cex: PathsLike) -> List[Path]:
    if isinstance(cex, Counterexample):
        return [p for p, _ in cex.paths]
    return list(cex)


def _block_ids(path: Path, partition: Partition) -> Tuple[int, ...]:
    pos = {name: i for i, name in enumerate(block_names(partition))}
    return tuple(pos[s] for s in path.states)


class ProjectionCache:
    """Concrete prefix masses ``p^-`` of one abstract path, per depth and state."""

    def __init__(self, path: Path, concrete: Waz, partition: Partition):
        self.path = path
        self.blocks = _block_ids(path, partition)
        first = partition.blocks[self.blocks[0]]
        layer: Dict[str, Fraction] = {concrete.initial: Fraction(1)} if concrete.initial in first else {}
        self.layers: List[Dict[str, Fraction]] = [layer]
        for i, a in enumerate(path.actions):
            target = set(partition.blocks[self.blocks[i + 1]])
            nxt: Dict[str, Fraction] = {}
            for s, mass in layer.items():
                for t, w in concrete.row(s, a).items():
                    if w and t in target:
                        nxt[t] = nxt.get(t, Fraction(0)) + mass * w
            layer = nxt
            self.layers.append(layer)

    def prefix_mass(self, depth: int) -> Fraction:
        return sum(self.layers[depth].values(), Fraction(0))

    @property
    def realizable(self) -> Fraction:
        return self.prefix_mass(self.path.length)


def realizable_mass(path: Path, concrete: Waz, partition: Partition) -> Fraction:
    return ProjectionCache(path, concrete, partition).realizable


def project_paths(abstract_path: Path, partition: Partition, concrete: Waz,
                  limit: int = 10_000) -> List[Tuple[Path, Fraction]]:
    """Explicit concrete realisations with their probabilities."""
    blocks = _block_ids(abstract_path, partition)
    if concrete.initial not in partition.blocks[blocks[0]]:
        return []
    out = []
    stack = [(Path((concrete.initial,)), Fraction(1))]
    while stack:
        path, prob = stack.pop()
        i = path.length
        if i == abstract_path.length:
            out.append((path, prob))
            if len(out) > limit:
                raise BudgetExceeded(f"more than {limit} concrete realisations")
            continue
        a = abstract_path.actions[i]
        target = partition.blocks[blocks[i + 1]]
        for t in reversed(target):
            w = concrete.T(path.states[-1], a, t)
            if w:
                stack.append((path.extend(a, t), prob * w))
    out.sort(key=lambda pp: tuple(concrete.index(s) for s in pp[0].states))
    return out


def is_spurious(cex: PathsLike, concrete: Waz, partition: Partition, spec: BoundedUntilSpec) -> bool:
    total = Fraction(0)
    for path in _paths_of(cex):
        total += realizable_mass(path, concrete, partition)
        if spec.violated_by(total):
            return False
    return True


@dataclass(frozen=True)
class RefinementSet:
    j: int
    blocks: Tuple[int, ...]
    trace: Tuple[Fraction, ...]


def _suffix_weight(path: Path, abstract: Waz, start: int) -> Fraction:
    return path_probability(abstract, path, start, path.length)


def find_refinement_set(cex: PathsLike, concrete: Waz, partition: Partition, spec: BoundedUntilSpec,
                        abstract: Optional[Waz] = None,
                        caches: Optional[Sequence[ProjectionCache]] = None) -> RefinementSet:
    """Smallest ``j`` whose mixed mass ``SP_j`` breaks the threshold.

    ``SP_j`` uses concrete weights up to the pivot ``max(len - j, 0)`` of each
    path and abstract weights after it; each ``SP_j`` is summed in full.
    """
    paths = _paths_of(cex)
    abstract = abstract or quotient(concrete, partition)
    caches = caches or [ProjectionCache(p, concrete, partition) for p in paths]
    longest = max((p.length for p in paths), default=0)
    trace = []
    for j in range(longest + 1):
        sp = Fraction(0)
        pivots = []
        for path, cache in zip(paths, caches):
            pivot = max(path.length - j, 0)
            pivots.append(cache.blocks[pivot])
            pre = cache.prefix_mass(pivot)
            if pre:
                sp += pre * _suffix_weight(path, abstract, pivot)
        trace.append(sp)
        if spec.violated_by(sp):
            if j == 0:
                raise NotSpurious(f"realisable mass {sp} already breaks {spec}")
            return RefinementSet(j, tuple(dict.fromkeys(pivots)), tuple(trace))
    raise NotSpurious(f"abstract mass {trace[-1] if trace else 0} of the paths does not break {spec}")


@dataclass(frozen=True)
class RefinementPlan:
    j: int
    path_index: int
    block: int
    separation: int
    order: Tuple[str, ...]
    g_plus: Tuple[Fraction, ...]
    g_minus: Tuple[Fraction, ...]
    predicted: Fraction

    def parts(self) -> Tuple[Tuple[str, ...], Tuple[str, ...]]:
        n = self.separation
        return self.order[: n - 1], self.order[n - 1:]


def plan_split(cex: PathsLike, j: int, concrete: Waz, partition: Partition,
               abstract: Optional[Waz] = None,
               caches: Optional[Sequence[ProjectionCache]] = None) -> RefinementPlan:
    """Pick the path and separation point that minimise the predicted ``SP_j``."""
    paths = _paths_of(cex)
    abstract = abstract or quotient(concrete, partition)
    caches = caches or [ProjectionCache(p, concrete, partition) for p in paths]
    best: Optional[RefinementPlan] = None
    for m, (path, cache) in enumerate(zip(paths, caches)):
        pivot = max(path.length - j, 0)
        block = cache.blocks[pivot]
        members = partition.blocks[block]
        if len(members) < 2 or pivot >= path.length:
            continue
        a = path.actions[pivot]
        nxt = set(partition.blocks[cache.blocks[pivot + 1]])
        gp = {s: sum((w for t, w in concrete.row(s, a).items() if t in nxt), Fraction(0)) for s in members}
        order = sorted(members, key=lambda s: (-gp[s], concrete.index(s)))
        g_plus = [gp[s] for s in order]
        g_minus = [cache.layers[pivot].get(s, Fraction(0)) for s in order]
        t_abs = abstract.T(path.states[pivot], a, path.states[pivot + 1])
        scale = _suffix_weight(path, abstract, pivot) / t_abs
        for n in range(2, len(order) + 1):
            head = sum(g_minus[: n - 1], Fraction(0)) * g_plus[0]
            tail = sum(g_minus[n - 1:], Fraction(0)) * g_plus[n - 1]
            r = (head + tail) * scale
            if best is None or r < best.predicted:
                best = RefinementPlan(j, m, block, n, tuple(order), tuple(g_plus), tuple(g_minus), r)
    if best is None:
        raise NoSplittableBlock(f"no counterexample path has a multi-state block at depth-from-end {j}")
    return best


def split_block(cex: PathsLike, j: int, concrete: Waz, partition: Partition,
                abstract: Optional[Waz] = None) -> Partition:
    plan = plan_split(cex, j, concrete, partition, abstract)
    return partition.split(plan.block, plan.parts()[1])


def remap_paths(paths: Sequence[Path], old: Partition, new: Partition, abstract: Waz,
                limit: int = MAX_REMAPPED_PATHS) -> List[Path]:
    """Paths over ``new`` blocks that refine ``paths`` and keep positive weight."""
    old_names = {name: i for i, name in enumerate(block_names(old))}
    new_names = block_names(new)
    out: List[Path] = []
    for path in paths:
        options = []
        for s in path.states:
            members = set(old.blocks[old_names[s]])
            options.append([new_names[i] for i, b in enumerate(new.blocks) if set(b) <= members])
        stack = [Path((name,)) for name in reversed(options[0]) if name == abstract.initial]
        while stack:
            p = stack.pop()
            i = p.length
            if i == path.length:
                out.append(p)
                if len(out) > limit:
                    raise BudgetExceeded(f"re-mapping produced more than {limit} abstract paths")
                continue
            a = path.actions[i]
            for name in reversed(options[i + 1]):
                if abstract.T(p.states[-1], a, name):
                    stack.append(p.extend(a, name))
    return out


def abstract_mass(paths: Sequence[Path], abstract: Waz) -> Fraction:
    return sum((path_probability(abstract, p) for p in paths), Fraction(0))


@dataclass(frozen=True)
class SplitRecord:
    j: int
    pivot_blocks: Tuple[int, ...]
    sp_trace: Tuple[Fraction, ...]
    block: int
    new_block: int
    moved: Tuple[str, ...]
    predicted: Fraction
    realized: Fraction
    remapped_mass: Fraction


def remove_counterexample(cex: PathsLike, concrete: Waz, partition: Partition,
                          spec: BoundedUntilSpec) -> Tuple[Partition, List[SplitRecord]]:
    """Split blocks until the re-mapped counterexample no longer breaks ``spec``."""
    paths = _paths_of(cex)
    abstract = quotient(concrete, partition)
    records: List[SplitRecord] = []
    while spec.violated_by(abstract_mass(paths, abstract)):
        caches = [ProjectionCache(p, concrete, partition) for p in paths]
        found = find_refinement_set(paths, concrete, partition, spec, abstract, caches)
        plan = plan_split(paths, found.j, concrete, partition, abstract, caches)
        new = partition.split(plan.block, plan.parts()[1])
        new_abstract = quotient(concrete, new)
        new_paths = remap_paths(paths, partition, new, new_abstract)
        chosen = paths[plan.path_index]
        pivot = max(chosen.length - found.j, 0)
        realized = Fraction(0)
        for v in remap_paths([chosen], partition, new, new_abstract):
            pre = ProjectionCache(v, concrete, new).prefix_mass(pivot)
            if pre:
                realized += pre * _suffix_weight(v, new_abstract, pivot)
        mass = abstract_mass(new_paths, new_abstract)
        moved = new.blocks[-1]
        records.append(SplitRecord(found.j, found.blocks, found.trace, plan.block, len(new) - 1,
                                   moved, plan.predicted, realized, mass))
        partition, abstract, paths = new, new_abstract, new_paths
    return partition, records
