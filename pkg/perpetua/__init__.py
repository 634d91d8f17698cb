from .exceptions import (
    PerpetuaError,
    ValidationError,
    NumericError,
)
from .utils import (
    LoadResult,
    DumpResult,
    missing,
    NEG_INF,
)
from .reports import (
    Verdict,
    Condition,
    CriterionReport,
)
from .measures import (
    LevyMeasure,
    DensityPiece,
    PowerDensity,
    ExponentialDensity,
    TemperedStableDensity,
    IntegralResult,
    integrate,
    tail_mass,
    validate_standing_assumptions,
)
from .exponents import (
    LevyTriplet,
    JointAtom,
    laplace_exponent_X,
    A_function,
    kappa,
    kappa_prime,
    psi_spine,
    critical_moment,
)
from .sampler import (
    sample_path,
    sample_MQ,
    small_jump_bias,
)
from .perpetuity import (
    check_as_finiteness,
    check_moment_finiteness,
    discrete_moment_criterion,
    embedding_moment,
    iterate_affine,
    estimate_abs_moment,
    hill_tail_index,
)
from .branching import (
    BranchAtom,
    BranchingChars,
    validate_branching,
    simulate_population,
    biggins_W,
    verify_many_to_one,
    hat_a,
    spine_measures,
    check_ui_criterion,
    check_lp_criterion,
    simulate_spine,
    check_spine_identity,
)
from .config import (
    RunConfig,
    load_config,
    dump_config,
)

__version__ = "0.1.0"
