"""Multiqubit entanglement monogamy toolkit.

Modules:

- :mod:`tanglekit.qstate`: pure states, marginals, families and state files.
- :mod:`tanglekit.invariants`: spin-flip spectrum, concurrence, n_d coefficients,
  D-invariant expansions, one- and three-tangles.
- :mod:`tanglekit.convexroof`: best-found convex roof of the three-tangle.
- :mod:`tanglekit.monogamy`: monogamy identities, inequalities and reports.
- :mod:`tanglekit.cli`: command-line front end.
"""
from .convexroof import ConvexRoofConfig, ConvexRoofResult, three_tangle_mixed
from .invariants import (
    PairInvariants,
    concurrence,
    flip_spectrum,
    one_tangle,
    pair_invariants,
    three_tangle_pure,
)
from .monogamy import (
    ConstraintVerdict,
    FocusAnalysis,
    TangleReport,
    ckw_check,
    full_report,
    multipartite_criterion,
    n4_sum_rule,
    n8_sum_rule,
    ov_check,
    residual_beyond_three,
    two_three_constraint,
)
from .qstate import (
    DensityMatrix,
    MultiIndex,
    PureState,
    StateError,
    StateFamily,
    haar_random,
    make_state,
    marginal,
    named_state,
    read_state_file,
    write_state_file,
)

__version__ = "0.1.0"

__all__ = [
    "ConstraintVerdict",
    "ConvexRoofConfig",
    "ConvexRoofResult",
    "DensityMatrix",
    "FocusAnalysis",
    "MultiIndex",
    "PairInvariants",
    "PureState",
    "StateError",
    "StateFamily",
    "TangleReport",
    "ckw_check",
    "concurrence",
    "flip_spectrum",
    "full_report",
    "haar_random",
    "make_state",
    "marginal",
    "multipartite_criterion",
    "n4_sum_rule",
    "n8_sum_rule",
    "named_state",
    "one_tangle",
    "ov_check",
    "pair_invariants",
    "read_state_file",
    "residual_beyond_three",
    "three_tangle_mixed",
    "three_tangle_pure",
    "two_three_constraint",
    "write_state_file",
]
