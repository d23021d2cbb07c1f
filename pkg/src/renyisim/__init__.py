"""Renyi-divergence simulation toolkit: measures, spectrum exponents, rates and codes."""

from .asymptotics import (
    Direction,
    KnifeEdgeError,
    RateQuery,
    asymptotic_divergence,
    best_set_mass_exponents,
    conversion_rate,
    conversion_rate_unnormalized_lb,
    intrinsic_asymptotics,
    intrinsic_randomness,
    resolvability,
    resolvability_asymptotics,
)
from .codes import (
    CodeKind,
    InducedPmf,
    SimCode,
    UniformSpace,
    evaluate_code,
    intrinsic_code,
    inverse_transform_code,
    mapping1,
    mapping2,
    partition_code,
    resolvability_quantizer,
    three_region_code,
    type_spreading_code,
)
from .dist import (
    GuardExceeded,
    MassBlocks,
    Pmf,
    ProductView,
    SeqType,
    enumerate_types,
    sorted_mass_blocks,
)
from .guessing import GuessQuery, guessing_bounds, guessing_exponent
from .measures import (
    max_renyi,
    mode_entropy,
    parse_order,
    renyi_divergence,
    renyi_entropy,
    shannon_entropy,
    sum_renyi,
    tilted,
    tilted_cross_entropy,
)
from .spectrum import (
    SpectrumPoint,
    compare_exponents,
    exponent_inverse_lower,
    exponent_inverse_upper,
    exponent_lower,
    exponent_upper,
    interval_exponent,
    parametric_spectrum,
)

__version__ = "0.1.0"
