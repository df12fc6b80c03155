"""Symbolic substitutions, Bratteli diagrams and telescope equivalence in exact arithmetic."""

__version__ = "0.1.0"

from .words import (  # noqa: E402
    Alphabet, Substitution, abelianize, compose, compose_chain, factor_language,
    first_letter_map, last_letter_map, power,
)
from .exact_matrix import (  # noqa: E402
    Compatibility, ExactMatrix, characteristic_polynomial, field_compatible, is_primitive,
    non_nilpotent_rank, pf_eigenvector, pf_report, purely_aperiodic,
)
from .bratteli import (  # noqa: E402
    BratteliDiagram, Budget, SupernaturalNumber, UnorderedCertificate, analyze_equivalence,
    enlarge, isomorphic_stationary, state_split, stationary_diagram, substitution_diagram,
    supernatural, telescope, verify_certificate,
)
from .ordered_bratteli import (  # noqa: E402
    FinitePath, OrderedBudget, OrderedCertificate, OrderedDiagram, PathCounts,
    analyze_ordered_equivalence, max_min_disjoint, ordered_from_substitution, ordered_telescope,
    path_counts, taf_description, verify_ordered_certificate, vershik_successor,
)
from .fibonacci import (  # noqa: E402
    FibFactorClass, PQWord, classify_fib_factors, enumerate_ordered_fib, fib_ordered_equivalence,
    pq_factorize,
)
