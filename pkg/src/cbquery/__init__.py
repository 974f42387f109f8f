"""Cubic-form counterexamples and re-checkable SDP certificates for quantum query lower bounds."""

__version__ = "0.1.0"

from .boolean_poly import (  # noqa: E402
    DEFAULT_CAP,
    EnumerationCapError,
    MultilinearPoly,
    RawPoly,
    evaluate,
    hat_seq,
    multilinear_reduce,
    orthogonality_check,
    p_norm,
    sup_norm,
)
from .constructions import (  # noqa: E402
    ap_form,
    check_von_neumann,
    chsh_form,
    counterexample_ratio,
    gowers_u3,
    mobius,
    random_cubic,
    squarefree_count,
)
from .sdp_witness import (  # noqa: E402
    build_chsh_witness,
    certify,
    objective,
    quartic_lower_bound,
    recheck_certificate,
    verify_membership,
)
from .slices import delta, operator_norm, slice_matrix  # noqa: E402
from .varopoulos import build_chsh, build_trilinear, four_index_vanishing, quartic_moment, verify_tuple  # noqa: E402
