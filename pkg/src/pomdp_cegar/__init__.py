"""Counterexample-guided abstraction refinement for POMDPs.

Finite-horizon safe-PCTL properties of a POMDP are checked on quotient
automata over its state/observation pairs; spurious counterexamples drive
partition refinement until the property is proved or a real violation is
found. Probabilities are exact rationals throughout.
"""

from .abstraction import Partition, check_safe_simulation, coarsest_partition, quotient
from .cegar import CegarConfig, CegarOutcome, run_cegar
from .cexgen import Counterexample, extract_counterexample, induce_dtmc
from .checker import Verdict, evaluate_adversary, make_absorbing, model_check, step_occupancy, value_iterate
from .kernels import BACKEND
from .logic import BoundedUntilSpec, parse_formula, parse_spec, path_satisfies, satisfying_states
from .models import (
    GuidedMdp,
    ObservationAdversary,
    Path,
    Pomdp,
    Waz,
    corresponding_waz,
    guided_mdp,
    observation_sequence,
    parity_chain,
    path_probability,
    validate_pomdp,
)
from .refinement import find_refinement_set, is_spurious, project_paths, remove_counterexample, split_block

__version__ = "0.1.0"
