"""Exact analysis of conjugacies between firm carcass maps.

A carcass map is a piecewise-linear unimodal self-map of [0, 1]; it is firm
when every kink eventually lands on 0.  Two firm carcass maps are conjugate
through an increasing homeomorphism, approximated by the polylines ``h_n``
that match their pre-image grids level by level.
"""

from .conjugacy import (
    ConjugacyApprox,
    Polyline,
    build_hn,
    eval_h,
    eval_hn,
    functional_iteration,
    verify_semiconjugacy,
)
from .derivative import (
    Classification,
    PointNeighborhood,
    SlopeSequence,
    classify_conjugacy,
    classify_slopes,
    delta_LR,
    lr_limits,
    neighborhood,
    product_formula_general,
    product_formula_skew,
    slope_hn,
    slope_sequence,
)
from .errors import (
    CarcassError,
    InputError,
    InvariantViolation,
    PreconditionError,
)
from .expansion import (
    GExpansion,
    alpha_parity,
    decode,
    encode,
    expand,
    lex_compare,
    p_index,
    shift,
)
from .grids import (
    DeltaProfile,
    PreimageGrid,
    build_grid,
    delta,
    delta_profile,
    grid_point,
    skew_tent_next_level,
    width_bounds_check,
    width_product,
)
from .length import (
    LengthSequence,
    binomial_length,
    length_sequence,
    polyline_length,
)
from .maps import (
    CarcassMap,
    Firmness,
    Rational,
    check_firmness,
    conjugate_by,
    evaluate,
    generate_firm_from_homeomorphism,
    iterate,
    make_carcass,
    rational,
    skew_tent,
    tent,
)

__version__ = "0.1.0"
