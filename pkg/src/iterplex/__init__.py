"""Transversals, plexes and multiplexes in iterated quasigroups, counted exactly."""

from .algebra import (
    CayleyTable,
    Isotopy,
    apply_isotopy,
    builtin_table,
    cyclic_group,
    direct_product,
    klein_group,
    load_cayley_table,
    parse_cayley_table,
)
from .chain import (
    build_partial_transition,
    build_states,
    build_transition,
    build_unlumped,
    derived_counts,
    iterate_counts,
    reachability_and_period,
    verify_lumping,
)
from .oracle import (
    classify_multiplex,
    count_partial_multiplexes,
    count_transversals,
    enumerate_multiplexes,
    extend_multiplex,
    lemma2_bounds,
    zn_obstruction,
)
from .spectral import dominant_eigenvector, limit_constant, partial_limit_constant, sequence_report

__version__ = "0.1.0"

__all__ = [
    "CayleyTable",
    "Isotopy",
    "apply_isotopy",
    "build_partial_transition",
    "build_states",
    "build_transition",
    "build_unlumped",
    "builtin_table",
    "classify_multiplex",
    "count_partial_multiplexes",
    "count_transversals",
    "cyclic_group",
    "derived_counts",
    "direct_product",
    "dominant_eigenvector",
    "enumerate_multiplexes",
    "extend_multiplex",
    "iterate_counts",
    "klein_group",
    "lemma2_bounds",
    "limit_constant",
    "load_cayley_table",
    "parse_cayley_table",
    "partial_limit_constant",
    "reachability_and_period",
    "sequence_report",
    "verify_lumping",
    "zn_obstruction",
]
