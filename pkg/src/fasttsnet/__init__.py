"""Fast tsNET graph layouts.

Four gradient presets share one pipeline (affinities from partial BFS,
Pivot MDS start, staged momentum descent):

``exact``   double-loop repulsion and entropy, O(n^2) per iteration
``bh``      Barnes-Hut repulsion and entropy
``fit``     FFT-interpolated repulsion, Barnes-Hut entropy
``linear``  FFT-interpolated repulsion and entropy
"""

from .affinity import AffinityMatrix, build_affinities, calibrate_sigma, partial_knn
from .fixtures import GeneratorSpec, generate
from .graph import Graph, bfs_hops, largest_component, parse_edge_list
from .metrics import MetricsReport, evaluate
from .optimizer import LayoutConfig, LayoutResult, run
from .pivot_mds import PivotConfig, pivot_mds

__all__ = [
    "AffinityMatrix",
    "GeneratorSpec",
    "Graph",
    "LayoutConfig",
    "LayoutResult",
    "MetricsReport",
    "PivotConfig",
    "bfs_hops",
    "build_affinities",
    "calibrate_sigma",
    "evaluate",
    "generate",
    "largest_component",
    "parse_edge_list",
    "partial_knn",
    "pivot_mds",
    "run",
]
