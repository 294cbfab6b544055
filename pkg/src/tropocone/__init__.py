"""tropocone: exact tropical intersection theory on partially open
integral cone complexes and poic-fibrations.

The package computes with partially open integral cones, poic-complexes
and poic-spaces, Minkowski-weight lattices and balancing, subdivisions and
pushforwards, the moduli of tropical curves, and the spanning-tree,
forgetful, and clutching fibration constructions.  All arithmetic is
exact.
"""

from .cone import (
    EmptyCone,
    FaceEmbedding,
    NotFullDimensional,
    NotIntoCodomain,
    Poic,
    PoicMorphism,
    check_morphism,
    faces,
    poic_new,
    product,
)
from .complexes import (
    LinearStructure,
    MissingFace,
    NonFunctorial,
    NotFaceEmbedding,
    NotThin,
    PoicComplex,
    PolyhedralCell,
    complex_new,
    conify,
    product_complex,
    skeleton,
    skeletonize,
    star1,
)
from .fibration import (
    Fibration,
    compatible_refinement,
    equivariant_basis,
    is_pi_compatible,
    validate_fibration,
)
from .graphs import (
    DiscreteGraph,
    GraphCategory,
    canonical_form,
    contract,
    enumerate_category,
    graph_new,
)
from .intlinalg import (
    IntMatrix,
    Lattice,
    NotSublattice,
    QuotientPresentation,
    ZeroVector,
    lattice_index,
    primitive,
    quotient,
    smith_normal_form,
    solve_integer,
)
from .moduli import build_moduli, cone_of_metrics, distance_structure
from .spaces import PoicSpace, space_from_complex, space_new
from .stfib import clutching, fibration_pushforward, forgetful, \
    spanning_tree_fibration
from .subdivision import (
    ComplexMorphism,
    Cycle,
    Subdivision,
    cycle_equal,
    honest_subdivision_refine,
    identity_subdivision,
    is_weakly_proper,
    ord_subdivision,
    pfine_refinement,
    pushforward,
    stellar,
    validate_subdivision,
)
from .weights import (
    Weight,
    WeightLattice,
    cross_product,
    extend_by_zero,
    is_balanced_at,
    is_irreducible,
    minkowski_basis,
    normal_vector,
    pullback,
)

__version__ = "0.1.0"
