"""Right Wiener-Hopf indices of rational matrix functions given by two-sided
state-space realizations.

Pipeline: outer factor from the stabilizing Riccati solution, left unitary
factor, minimal reduction, Douglas-Shapiro-Shields factorization into
bi-inner factors with unitary realizations, and finally the indices from
kernel and image dimension sequences of the coupling matrix.
"""
from ._core import BACKEND
from .errors import (
    AmbiguousRank,
    GrowthExhausted,
    IndefiniteSchurComplement,
    NonInvertibleP0,
    NotStabilizable,
    NumericalError,
    SpectraNotDisjoint,
    UnstableStateMatrix,
    ValidationError,
    WienerHopfError,
)
from .factorization import (
    BiInnerRealization,
    DssFactorization,
    OuterFactor,
    UnitaryFactorRealization,
    dss_factorize,
    left_unitary_factor,
    minimal_reduce,
    outer_factor,
)
from .indices import (
    DimensionSequence,
    PipelineResult,
    VerificationReport,
    WienerHopfIndices,
    analyze,
    image_sequence,
    indices_of,
    kernel_sequence,
    wiener_hopf_indices,
)
from .io import load_realization, save_realization
from .realization import (
    TwoSidedRealization,
    direct_sum,
    evaluate,
    multiply,
    product_data,
    validate,
    winding_number,
)
from .solvers import solve_dare, solve_stein, solve_sylvester
from .testgen import ProblemSpec, generate_problem

__version__ = "0.1.0"
