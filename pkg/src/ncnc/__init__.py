"""Neural Common Neighbor link prediction with common-neighbor completion."""

from .graph import (Graph, GraphError, common_neighbors, from_edge_list, general_neighborhood,
                    neighbor_difference, power_graph, remove_edges, shortest_path_neighborhood)
from .metrics import EvalSplit, MetricSpec, hits_at_k, mrr, random_split
from .pairwise import (BuddyConfig, NeoGnnConfig, PairwiseConfig, PRESETS, buddy_features,
                       general_pairwise, heuristic_score, neo_gnn_feature)
from .pipeline import TrainConfig, evaluate, fit
from .predictors import LinkModel, init_link_model

__version__ = "0.1.0"
