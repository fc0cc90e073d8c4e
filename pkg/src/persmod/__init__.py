"""Exact persistence modules over prime fields."""

from .complexes import (
    ComplexError,
    FilteredComplex,
    FiltrationError,
    FiltrationFunction,
    PairFiltration,
    ParseError,
    SimplicialComplex,
    SimplicialMap,
    build_extended,
    parse_complex,
    parse_map,
)
from .decomposition import IndexInterval, decompose, index_decompose, interval_basis, realize_endpoints
from .distances import (
    InterleavingCertificate,
    bottleneck,
    construct_certificate,
    interval_distance,
    module_distance,
    promote_certificate,
    verify_certificate,
)
from .homology import extended_module, homology_basis, morphism_module, persistence_module
from .modules import (
    Barcode,
    GridModule,
    GridMorphism,
    Interval,
    barcode_from_csv,
    barcode_to_csv,
    cokernel,
    discretize,
    image,
    kernel,
    synthesize,
)
from .scalars import INF, NEG_INF, ExtendedRational, FieldScalar, Matrix, ext

__all__ = [name for name in dir() if not name.startswith("_")]
