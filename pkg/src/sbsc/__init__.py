"""Sampling-based subspace clustering.

Cluster points near a union of linear subspaces by spectral clustering of a
small subsample, using ridge-regression distances between neighbourhood
blocks, then label the remaining points by minimum ridge residual.
"""
from .affinity import AffinityMatrix, build_affinity, sparsify, symmetrize
from .dataset import (Dataset, SyntheticSpec, generate_synthetic, load_dataset,
                      normalize_columns, save_dataset)
from .ensemble import SBSCParams, bag, default_grid, run_sbsc_once, select_threshold
from .exceptions import *  # noqa: F401,F403
from .metrics import accuracy, align_labels, contingency, nmi
from .oos import ProjectorSet, classify, fit_projectors
from .ridge import cluster_distance, distance_matrix, recommend_lambda, ridge_residual
from .spectral import kmeans, laplacian_spectrum, normalized_laplacian, spectral_cluster
from .subcluster import SubCluster, build_subcluster, build_subclusters, subcluster_preserving_rate

__version__ = "0.1.0"
