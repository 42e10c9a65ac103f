"""Back-and-forth games from game comonads on finite relational structures."""
from .comonads import ComonadSpec, counit, comultiplication, transpose, transpose_inverse, unravel
from .games import (
    TOP,
    Position,
    RankTable,
    back_and_forth_equivalent,
    certify_span,
    duplicator_wins,
    extract_strategy,
    is_open,
    r_equivalent,
    rank_table,
    winning_relation,
)
from .hintikka import (
    HintikkaRequest,
    HintikkaSynthesizer,
    TupleDiagram,
    distinguishing_sentence,
    emb_formula,
    hintikka_theta,
    root_hintikka_sentence,
)
from .structures import (
    Homomorphism,
    PartialIso,
    Signature,
    Structure,
    StructureError,
    are_isomorphic,
    collapse_identity,
    expand_identity,
    factorize,
    induced_substructure,
    is_embedding,
    is_homomorphism,
    is_partial_isomorphism,
    parse_structure,
)
from .wooded import ROOT, ForestStructure, PathNode, path_domain, path_nodes, validate_wooded

__version__ = "0.1.0"
