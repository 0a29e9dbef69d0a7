"""Congested assignment toolkit.

Decide and construct Nash-stable, envy-free and competitive assignments of
agents to congestible posts; verify arbitrary assignments; cross-validate
with exact small-scale oracles; and reduce exact-cover questions to
envy-freeness.
"""

from .cp import (
    CpSolve,
    ExtendedInstance,
    IterationRecord,
    NoEmptySolve,
    Obstruction,
    ValidityState,
    apply_obstruction,
    build_network,
    derive_assignment,
    extend_instance,
    find_obstruction,
    restrict_assignment,
    solve_cp,
    solve_cp_no_empty,
)
from .errors import ResourceGuardError, SolverInvariantError
from .flow import Arc, Flow, FlowNetwork, check_flow, max_flow
from .generator import RandomSpec, gen_random
from .model import (
    CONCEPTS,
    CP,
    EF,
    INDIFFERENT,
    NS,
    PREFER1,
    PREFER2,
    UNLISTED_RANK,
    Assignment,
    CongestionProfile,
    Instance,
    Situation,
    Verdict,
    Witness,
    check,
    compare_tuples,
    congestion_profile,
    max_congestion,
    satisfies,
    validate_instance,
)
from .ns import Move, NsRun, best_response, ns_run, ns_solve
from .oracle import (
    enumerate_all_assignments,
    enumerate_profiles,
    feasible_with_profile,
    solve_exact,
)
from .textio import (
    ParseError,
    parse_assignment,
    parse_instance,
    parse_x3c,
    write_assignment,
    write_instance,
    write_x3c,
)
from .x3c import (
    ExactCover,
    X3CInstance,
    cover_from_assignment,
    exact_cover_exists,
    make_x3c,
    random_strict_x3c,
    reduce_x3c_to_ef,
    validate_x3c,
)

__version__ = "0.1.0"
