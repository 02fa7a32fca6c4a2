"""Factorisation of polynomial nilsequences along smooth-difference progressions."""

from .config import ConfigError, ConstantsConfig
from .equidist import (EquidistReport, ProgressionSet, TestFunction, Witness, brute_force_defect, default_family,
                       direct_defect, erdos_turan_estimate, find_obstruction, obstruction_search, total_verdict,
                       transfer_right_multiply)
from .factor import (Factorisation, FactorisationError, FactorisationTree, InvariantViolation, Leaf, TreeParams,
                     build_tree, certify_full_group, factorise_once, residue_split, smooth_failure_search,
                     tree_partition_ok, verify_leaf)
from .nilgroup import FilteredGroup, GroupError, RationalSubgroup, heisenberg, preset, product, torus
from .polyseq import HorizontalCharacter, PolySequence, evaluate
from .scalars import Ball, parse_scalar
from .smooth import SmoothBase, enumerate_smooth, is_smooth, largest_prime_factor, sequence_period

__version__ = "0.1.0"
