"""Finite-domain constraint solver with batched bulk-synchronous propagation."""

from .model import (
    AllDifferent,
    ArithmeticOverflow,
    Domain,
    EmptyRange,
    Linear,
    Maximize,
    Minimize,
    Model,
    RelBin,
    Satisfy,
    Variable,
    WidthExceeded,
    check_assignment,
    domain_remove,
    model_validate,
    new_domain,
)
from .parser import ParseError, emit_model, parse_model
from .propagation import (
    PropagatorBatch,
    RemovalSet,
    group_batches,
    propagate_fixpoint,
    propagate_round,
    run_batch,
)
from .search import (
    LnsConfig,
    SearchConfig,
    Solution,
    lns_optimize,
    solve_optimize,
    solve_satisfy,
)
from .state import PopAtRoot, SearchState, SearchStats

__version__ = "0.1.0"
