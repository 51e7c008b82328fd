"""Vertical clustering of correlated variables.

Variables are grouped by their similarity to principal components, or by
k-means on spectral embeddings of the determination matrix or of a
thresholded relation on it, and scored against a reference pattern.
"""

__version__ = "0.1.0"

from .evaluation import EfficiencyScore, efficiency_report, match_partitions, summarize
from .kmeans import (
    Dissimilarity,
    InitialSet,
    entropy,
    enumerate_initial_sets,
    kmeans,
    sample_initial_sets,
    top_entropy_fraction,
    with_entropy,
)
from .matrix import ConvergenceError, EigenDecomposition, as_symmetric, count_zero_eigenvalues, jacobi_eigen
from .pipeline import ExperimentConfig, VariantCode, derive_reference, run_experiment, write_reports
from .relation import (
    Partition,
    RelationMatrix,
    build_relation,
    classify_relation,
    connected_components,
    epsilon_sweep,
    is_transitive,
)
from .similarity import (
    ObservationTable,
    correlation_matrix,
    determination_matrix,
    pc_cluster_points,
    pc_similarity,
)
from .spectral import Embedding, laplacian, normalized_laplacian, spectral_embedding
