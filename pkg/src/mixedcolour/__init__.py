"""Colourings and homomorphisms of (m, n)-coloured mixed graphs."""

from .graph import (
    ColourSpec,
    MixedGraph,
    adjacency_vector,
    build_graph,
    dual,
    is_complete_subgraph,
    max_degree,
    parse,
    random_bounded_degree,
    random_complete,
    serialize,
)
from .solver import (
    BoundTable,
    ChromaticResult,
    Partition,
    QuotientConflict,
    VertexMap,
    bounds,
    chromatic_number,
    chromatic_number_oracle,
    find_homomorphism,
    fibres,
    is_homomorphism,
    min_one_universal_size,
    quotient,
)

__version__ = "0.1.0"
