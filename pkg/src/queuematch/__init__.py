"""Time-slotted multi-queue multi-server scheduling simulator and checks."""

from .balancing import (
    ConditionTag,
    ReallocationKind,
    UnionCycleGraph,
    build_union_cycle_graph,
    classify_reallocation,
    distance_to_mwm,
    find_balancing_reallocation,
)
from .core import (
    ArrivalKind,
    StochasticConfig,
    Streams,
    intermediate_state,
    make_streams,
    sample_arrivals,
    sample_connectivity,
    sample_service,
    step,
)
from .coupling import (
    CoupledSlotInput,
    CouplingReport,
    couple_step,
    coupling_trajectory_check,
)
from .matching import (
    all_max_weight_matchings,
    enumerate_matchings,
    matching_count,
    max_cardinality_matching,
    max_weight_matching,
    mw_index,
    weight_matrix,
)
from .order import (
    RelationKind,
    RelationTag,
    cost_max,
    cost_total,
    equal_in_permutation,
    precedes_p,
    relation,
)
from .policies import PolicyKind, decide, is_mwm_decision
from .sim import (
    PairedComparison,
    ReplicationResult,
    StabilityEstimate,
    SweepPoint,
    paired_compare,
    run_replication,
    stability_point,
    sweep,
)

__version__ = "0.1.0"
