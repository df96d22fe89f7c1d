"""Integral quadratic lattices: local symbols, genera, spinor genera, representations."""

from ._config import INCONCLUSIVE, BudgetExceeded
from .lattice import (
    QuadraticLattice,
    binary_lattice,
    diagonal_lattice,
    direct_sum,
    e8_lattice,
    hyperbolic_plane,
    identity_lattice,
    minimum,
    read_gram,
    short_vectors,
    write_gram,
)
from .genus import (
    GenusRecord,
    automorphism_order,
    enumerate_genus,
    is_isometric,
    mass,
    p_neighbors,
    spinor_genus_partition,
)
from .local import jordan_decompose, local_isometric, locally_representable
from .represent import (
    Embedding,
    enumerate_embeddings,
    primitive_representation_count,
    representation_count,
)

__version__ = "0.1.0"
