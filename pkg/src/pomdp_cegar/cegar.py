"""The abstraction-refinement loop.

Starting from the coarsest consistent partition, each round checks the
quotient, extracts a counterexample from the witness adversary, tests it
against the concrete system and, if it is spurious, splits blocks until the
counterexample disappears. A satisfied quotient proves the property for the
POMDP because the quotient safely simulates it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Tuple

from .abstraction import Partition, check_safe_simulation, coarsest_partition, quotient
from .cexgen import Counterexample, extract_counterexample, induce_dtmc
from .checker import DEFAULT_MEMO_BUDGET, Verdict, model_check
from .errors import BudgetExceeded, SimulationViolation
from .logic import BoundedUntilSpec
from .models import ObservationAdversary, Path, Pomdp, Waz, corresponding_waz
from .refinement import SplitRecord, is_spurious, project_paths, realizable_mass, remove_counterexample

PROVED = "proved"
DISPROVED = "disproved"


@dataclass(frozen=True)
class CegarConfig:
    memo_budget: int = DEFAULT_MEMO_BUDGET
    verify_simulation: bool = False
    warm_start: bool = True
    # order probability ties by realisable concrete mass before path shape
    realizable_ties: bool = True
    max_realizations: int = 10_000

    def __post_init__(self):
        if self.memo_budget <= 0:
            raise ValueError("memo budget must be positive")


@dataclass
class IterationRecord:
    index: int
    blocks: int
    verdict: Verdict
    counterexample: Optional[Counterexample] = None
    spurious: Optional[bool] = None
    realizable: Optional[Fraction] = None
    splits: List[SplitRecord] = field(default_factory=list)
    simulation_checked: bool = False


@dataclass
class CegarOutcome:
    status: str
    partition: Partition
    abstract: Waz
    iterations: List[IterationRecord]
    counterexample: Optional[Counterexample] = None
    adversary: Optional[ObservationAdversary] = None
    realizable: Optional[Fraction] = None
    # concrete realisations of the counterexample; None when too many to list
    concrete_paths: Optional[List[Tuple[Path, Fraction]]] = None

    @property
    def proved(self) -> bool:
        return self.status == PROVED

    @property
    def degenerated(self) -> bool:
        """True when refinement had to go all the way to the concrete system."""
        return self.partition.is_discrete()


def _tie_key(concrete: Waz, partition: Partition, abstract: Waz, realizable_first: bool):
    def key(path: Path):
        shape = (path.length, tuple(abstract.index(s) for s in path.states))
        if realizable_first:
            return (-realizable_mass(path, concrete, partition),) + shape
        return shape
    return key


def run_cegar(pomdp: Pomdp, spec: BoundedUntilSpec, config: Optional[CegarConfig] = None) -> CegarOutcome:
    config = config or CegarConfig()
    concrete = corresponding_waz(pomdp)
    partition = coarsest_partition(concrete)
    iterations: List[IterationRecord] = []
    witness: Optional[ObservationAdversary] = None
    try:
        while True:
            abstract = quotient(concrete, partition)
            checked = False
            if config.verify_simulation:
                if check_safe_simulation(concrete, abstract) is None:
                    raise SimulationViolation(f"quotient over {len(partition)} blocks does not simulate")
                checked = True
            verdict = model_check(abstract, spec, warm_start=witness if config.warm_start else None,
                                  memo_budget=config.memo_budget)
            record = IterationRecord(len(iterations) + 1, len(partition), verdict, simulation_checked=checked)
            iterations.append(record)
            if verdict.satisfied:
                return CegarOutcome(PROVED, partition, abstract, iterations)
            witness = verdict.witness
            unrolling = induce_dtmc(abstract, witness, spec.horizon)
            key = _tie_key(concrete, partition, abstract, config.realizable_ties)
            cex = extract_counterexample(unrolling, spec, key)
            record.counterexample = cex
            record.spurious = is_spurious(cex, concrete, partition, spec)
            record.realizable = sum((realizable_mass(p, concrete, partition) for p, _ in cex.paths), Fraction(0))
            if not record.spurious:
                try:
                    real = [pp for p, _ in cex.paths
                            for pp in project_paths(p, partition, concrete, config.max_realizations)]
                except BudgetExceeded:
                    real = None
                return CegarOutcome(DISPROVED, partition, abstract, iterations, cex, witness,
                                    record.realizable, real)
            partition, record.splits = remove_counterexample(cex, concrete, partition, spec)
    except BudgetExceeded as exc:
        exc.iterations = iterations
        raise
