"""Dyadic pore statistics and distance-weight Muckenhoupt diagnostics."""

from .dyadic import Cube
from .errors import InsufficientDepthError, PreconditionError
from .pores import (
    FractionQuery,
    LengthAnswer,
    PoreFamily,
    Side,
    enumerate_pore_cubes,
    enumerate_pores,
    fraction_length,
    maximal_pore_length,
    ratio_condition,
    tilde_fraction_length,
    weak_porosity_check,
)
from .porestats import (
    BinomialModel,
    LengthDistribution,
    MarkovBounds,
    binomial_check,
    divergence_scan,
    kakeya_product,
    length_law,
    markov_bounds,
    markov_bounds_from_moments,
    moment,
    moment_closed_form,
    normal_gap,
    tilde_quantile_largest,
    tilde_quantile_pair,
    tilde_quantile_smallest,
    tilde_quantiles,
)
from .rationals import format_rational, parse_rational
from .setmodels import (
    BoxUnion,
    Component,
    ContractionSequence,
    FinitePoints,
    Generated,
    IntegerLattice,
    PointCloud,
    SetOracle,
    envelope_cube,
    envelope_length,
    generate,
    load_set_spec,
    oracle_from_spec,
    save_set_spec,
)
from .weights import (
    ApQuery,
    ApResult,
    MeanValue,
    a1_quotient,
    ap_product,
    component_integral,
    dilate,
    dual_exponent,
    exponent_transfer,
    mean_dist_power,
)

__version__ = "0.1.0"
