"""Decision-tree representations of finite-state POMDP controllers."""

from .pomdp import (
    build_chain,
    FeatureSpec,
    InducedChain,
    Observation,
    Pomdp,
    StationaryObsPolicy,
    almost_sure_reach,
    bool_feature,
    enabled_actions,
    induce_chain,
    int_feature,
    make_dist,
    validate_pomdp,
)
from .fsc import (
    Fsc,
    NodeTables,
    StepOutcome,
    controller_wins,
    extract_tables,
    from_tables,
    fsc_step,
    product_chain,
    reachable_nodes,
)
from .dtree import Dataset, DecisionTree, Predicate, evaluate, learn, tree_size
from .dtcontroller import (
    DtFsc,
    FaithfulnessCounterexample,
    build_dtfsc,
    build_from_tables,
    check_faithful,
    dtfsc_step,
)
from .skipfsc import (
    EquivCounterexample,
    IterationIndex,
    SkipFsc,
    check_equiv,
    extract_skip_tables,
    skip_reachable_nodes,
    skip_step,
    to_skip_fsc,
    verify_chain_structure,
)
from .synth import find_iteration_policy, synthesize
from .bench import GridSpec, gen_maze, gen_obstacle, gen_refuel
from .sim import EpisodeResult, run_episode, simulate

__all__ = [name for name in dir() if not name.startswith("_")]
