"""Discrete Ricci curvatures, curvature-driven sampling and Ricci flow on
networks, together with kernels, epsilon-net discretizations and image grids.
"""
from .curvature import (
    CurvatureField,
    CurvatureKind,
    HaantjesConvention,
    bochner_admissible,
    bochner_box1,
    bochner_decomposition,
    box1_matrix,
    curvature_field,
    forman_full,
    forman_graph,
    forman_grid,
    haantjes_path,
    haantjes_ricci,
    scalar_curvature,
)
from .discretization import (
    EpsilonNet,
    FiniteMetricSpace,
    bounded_geometry_check,
    curvature_bound_check,
    epsilon_net,
    thickness,
)
from .flow import FlowConfig, FlowTrace, flow_step, run_flow
from .graph import (
    CellComplex2,
    GraphError,
    MetricKind,
    WeightedGraph,
    build_complex,
    degree_path_metric,
    distance_matrix,
    path_metric,
    resistance_metric,
)
from .imaging import GrayImage, GridComplex, grid_from_image, image_sample, weighted_gaussian_grid
from .kernels import (
    Embedding,
    KernelMatrix,
    MDSConfig,
    kernel_distance,
    mds_embed,
    negative_type_check,
    power_transform,
    psd_check,
    schoenberg_transform,
)
from .sampling import Ranking, SampleResult, SampleSpec, common_core, sample_edges, sample_vertices

__version__ = "0.1.0"
