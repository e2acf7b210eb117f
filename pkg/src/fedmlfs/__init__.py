"""Semi-supervised federated multi-label feature selection.

Clients holding unlabeled shards build per-feature fuzzy similarity
matrices and ship them to a server holding a small labeled set; the server
scores feature redundancy (complementary entropy measures) and
feature-label relevance (knn fuzzy dependency), ranks features with a
weighted PageRank over the feature graph, and accounts for every byte
exchanged.
"""

__version__ = "0.1.0"

from .dataset import (MultiLabelDataset, PartitionPlan, load_dataset,
                      normalize_minmax, partition_noniid, read_manifest,
                      write_manifest)
from .errors import ConfigError, DataError, FedMLFSError, ProtocolError
from .evaluation import (average_precision, coverage, evaluate_ranking,
                         mlknn_predict, mlknn_train, ranking_loss)
from .federation import (CostLedger, FeatureStats, RunConfig, RunResult,
                         aggregate_similarity, aggregate_std,
                         communication_cost, raw_data_cost, run_protocol)
from .fuzzy import (EntropyTable, FuzzySimilarityMatrix,
                    build_similarity_matrix, complementary_entropy,
                    complementary_joint_entropy, complementary_mutual_information,
                    correlation_distance, entropy_table, fuzzy_radius)
from .graph import FeatureRanking, build_graph, select_top, weighted_pagerank
from .pipeline import RunOptions, execute_run
from .relevance import (DependencyVector, dependency_degree, label_similarity,
                        relevance_vector, select_neighbor_sets)

__all__ = [
    "__version__",
    "FedMLFSError", "ConfigError", "DataError", "ProtocolError",
    "MultiLabelDataset", "PartitionPlan", "load_dataset", "normalize_minmax",
    "partition_noniid", "read_manifest", "write_manifest",
    "FuzzySimilarityMatrix", "EntropyTable", "build_similarity_matrix",
    "fuzzy_radius", "complementary_entropy", "complementary_joint_entropy",
    "complementary_mutual_information", "correlation_distance", "entropy_table",
    "DependencyVector", "label_similarity", "select_neighbor_sets",
    "dependency_degree", "relevance_vector",
    "FeatureRanking", "build_graph", "weighted_pagerank", "select_top",
    "FeatureStats", "RunConfig", "RunResult", "CostLedger", "run_protocol",
    "aggregate_std", "aggregate_similarity", "communication_cost",
    "raw_data_cost",
    "mlknn_train", "mlknn_predict", "average_precision", "coverage",
    "ranking_loss", "evaluate_ranking",
    "RunOptions", "execute_run",
]
