"""Gossip-based opinion dynamics with smart message-spreading strategies."""

from .dynamics import (
    DEFAULT_SMART_CLASS,
    PERSONAL_CLASS,
    Feed,
    Message,
    NodeState,
    belief_update,
    deliver,
    myopic_reward,
    opinion,
    select_message,
)
from .engine import (
    ConfigError,
    EngineError,
    GraphSpec,
    SimConfig,
    Summary,
    Trace,
    aggregate,
    build_graph,
    centrality_sweep,
    run,
    run_replications,
    run_simplified,
)
from .graph import (
    CorrelationError,
    DisconnectedGraphError,
    EdgeListParseError,
    Graph,
    GraphError,
    RoleAssignment,
    classic_centrality,
    current_flow_closeness,
    generate_pa,
    load_edge_list,
    pearson,
)
from .strategies import StrategyConfig, StrategyError
from .toy import ToyError, ToyInstance

__version__ = "0.1.0"
