"""Isotropy testing for spatial point patterns.

Simulate anisotropic point processes, estimate edge-corrected directional
summary statistics, replicate patterns under the isotropy hypothesis
(tiling, stochastic reconstruction, parametric Monte Carlo), and run
Monte Carlo isotropy tests, including a simulation-study harness.
"""

from .geometry import (
    DoubleCone,
    OrientedRect,
    PointPattern,
    Window,
    cone_erosion_area,
    in_double_cone,
    in_eroded_window,
    in_oriented_rect,
    rotate_points,
    translation_overlap_area,
)
from .summaries import (
    AngleGrid,
    FrequencyGrid,
    RangeGrid,
    SummaryCurve,
    bartlett_periodogram,
    cone_nearest_distance,
    cylindrical_k,
    direction_spectrum,
    directional_g,
    pair_correlation,
    point_dft,
    ripley_k,
    spherical_contact,
)
from .processes import (
    GibbsLJ,
    LGCP,
    PLCP,
    Poisson,
    Strauss,
    Thomas,
    lj_pair_potential,
    plcp_concentration,
    rng_from_seed,
    sample_von_mises,
    sim_gibbs_lj,
    sim_lgcp,
    sim_plcp,
    sim_poisson,
    sim_strauss,
    sim_thomas,
    simulate,
    with_anisotropy,
)
from .estimation import (
    FitResult,
    estimate_strauss_range,
    fit_lgcp,
    fit_strauss,
    fit_strauss_mpl,
    fit_thomas,
)
from .replication import (
    Geometric,
    ImprovementOnly,
    ParametricMC,
    SRConfig,
    TilingConfig,
    parametric_replicate,
    reconstruction_target,
    sr_total_deviation,
    stochastic_reconstruction,
    tile_replicate,
)
from .testing import (
    DssGloc,
    DssKcyl,
    DssTheta,
    TestResult,
    derive_seed,
    mc_p_value,
    rng_for,
    run_isotropy_test,
    run_isotropy_tests,
    stat_ms,
    stat_ms_std,
)
from .study import (
    McFitted,
    McMisspecified,
    McOracle,
    SRChoice,
    StudyConfig,
    TilingChoice,
    desk_preset,
    study_gibbs,
    study_lgcp,
    study_plcp,
    paper_preset,
    run_study,
)
from .io import read_pattern_csv, write_pattern_csv, write_results_csv

__version__ = "0.1.0"
