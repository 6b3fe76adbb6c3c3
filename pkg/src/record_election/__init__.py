"""Record-based leader election: simulation, limit laws, coalescent bridge."""

from .numerics import (
    TowerReal,
    ThetaParams,
    conjugacy_f,
    log_star,
    modified_iterlog,
    modified_tetration,
    standard_tetration,
    tower_harmonic,
)
from .records import (
    RecordSamplerConfig,
    RoundOutcome,
    approx_count_records,
    count_records,
    record_time,
    sample_round,
)
from .election import (
    ElectionTrace,
    leader_election_statistic,
    run_election_exact,
    run_election_tower,
)
from .limits import (
    BackwardIterSample,
    LimitEstimate,
    check_fixed_point_psi,
    estimate_N_star,
    estimate_S_star_cdf,
    estimate_T0_star_pmf,
    estimate_T_star_pmf,
    estimate_T_tilde_star,
    estimate_spacings,
    sample_S_star,
)
from .coalescent import (
    CoalescentChain,
    StirlingTable,
    estimate_X1_limit,
    log_star_scaling_check,
    pmf_J,
    run_coalescent,
    sample_J,
)
from .stats import (
    EmpiricalDist,
    TestReport,
    chi_square_gof,
    chi_square_two_sample,
    ks_one_sample,
    ks_two_sample,
    mean_ci,
)
from .rng import make_rng

__version__ = "0.1.0"
