"""Desk-scale toolkit for the commutator-generated Cayley geometry of free groups."""

__version__ = "0.1.0"

from .words import (
    Endomorphism,
    Word,
    WordSyntaxError,
    commutator,
    generator,
    identity,
    in_commutator_subgroup,
    parse_word,
)
from .metric import (
    BoundCertificate,
    CommutatorAlphabet,
    DomainError,
    Factorization,
    ball,
    cl_bounds,
    cl_lower,
    cl_upper,
    conjugate_certificate,
    distance,
    invert_certificate,
    scl_upper,
    translation_length_estimate,
    verify_certificate,
)
from .quasimorphism import (
    DefectBound,
    LipschitzViolation,
    Pattern,
    RealizingValue,
    c_sigma,
    certified_defect_upper,
    count_disjoint_copies,
    defect_bound,
    h_sigma,
    homogenize,
    lipschitz_audit,
    quasigeodesic_constants,
)
from .loops import (
    KMove,
    Loop,
    MoveError,
    MoveSequence,
    apply_move,
    k_equivalent,
    parse_loop,
    reduce_loop,
    validate_loop,
)
from .endpath import (
    AvoidancePath,
    SeparatorChoice,
    SeparatorError,
    build_path,
    certify_path,
    choose_N,
    default_separator_pool,
    endpath_report,
    select_separator,
)

__all__ = [name for name in dir() if not name.startswith("_")]
