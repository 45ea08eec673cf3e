"""Multi-object segmentation with per-label cone shape priors.

Each label's segment can be constrained so its boundary normals stay within
an angle theta of a per-pixel vector field (by default the gradient of the
distance transform of that label's scribble). The constraint is enforced as
directed infinite-cost edges in a multi-label energy optimized by
shape-aware expansion moves over an exact max-flow solver.
"""

from .appearance import (DataTermTable, GmmModel, SmoothnessWeights, data_term,
                         fit_gmm, gmm_from_json, gmm_to_json, smoothness_weights)
from .constraints import (ConeParams, ConstraintEdgeSet, apply_empty_cone_fix,
                          build_constraint_edges, check_feasibility, dump_edges,
                          polar_cone_contains, prune_conflicting_edges)
from .distance import (DistanceMap, VectorField, euclidean_distance_transform,
                       gradient_field, load_vector_field, radial_field,
                       save_vector_field, signed_distance)
from .grid import (GridError, GridImage, Labeling, NeighborhoodSystem,
                   ScribbleSet, build_neighborhood, pixel_coords, pixel_index,
                   validate_scribbles)
from .maxflow import INF, CutResult, FlowGraph
from .metrics import SegMetrics, compute_metrics, f1_score
from .optimize import (EnergyBreakdown, MoveProblem, OverConstrainedError,
                       SolverConfig, SubmodularityError, brute_force_segment,
                       build_label_constraints, build_move_graph, expansion_move,
                       initial_labeling, segment, total_energy)
from .synth import SyntheticInstance, generate_synthetic

__version__ = "0.1.0"

__all__ = [
    "CutResult", "ConeParams", "ConstraintEdgeSet", "DataTermTable",
    "DistanceMap", "EnergyBreakdown", "FlowGraph", "GmmModel", "GridError",
    "GridImage", "INF", "Labeling", "MoveProblem", "NeighborhoodSystem",
    "OverConstrainedError", "ScribbleSet", "SegMetrics", "SmoothnessWeights",
    "SolverConfig", "SubmodularityError", "SyntheticInstance", "VectorField",
    "apply_empty_cone_fix", "brute_force_segment", "build_constraint_edges",
    "build_label_constraints", "build_move_graph", "build_neighborhood",
    "check_feasibility", "compute_metrics", "data_term", "dump_edges",
    "euclidean_distance_transform", "expansion_move", "f1_score", "fit_gmm",
    "generate_synthetic", "gmm_from_json", "gmm_to_json", "gradient_field",
    "initial_labeling", "load_vector_field", "pixel_coords", "pixel_index",
    "polar_cone_contains", "prune_conflicting_edges", "radial_field",
    "save_vector_field", "segment", "signed_distance", "smoothness_weights",
    "total_energy", "validate_scribbles",
]
