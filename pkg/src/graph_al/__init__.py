"""Active learning on graphs with a learned query policy that carries over to unseen graphs."""

from .graph import Graph, GraphError, candidate_pool, degree, normalized_adjacency
from .classifier import ClassifierConfig, GcnParams, macro_f1, micro_f1
from .state import GraphState, build_state
from .policy import PolicyParams, init_policy, policy_forward, mlp_forward
from .trainer import (TrainConfig, Trajectory, evaluate_policy, evaluate_selector, run_episode,
                      run_query_loop, train_policy)
from .baselines import AgeWeights, baseline_selector
from .data_io import SbmConfig, generate_sbm, load_checkpoint, load_graph, save_checkpoint, save_graph

__version__ = "0.1.0"
