"""pulsecam: camera/scene simulation and exposure control for remote pulse measurement."""

from .controller import (
    ControllerConfig,
    ControllerState,
    DegenerateAbscissa,
    ExposureSample,
    FitError,
    FlatResponse,
    LinearFit,
    TripletCycle,
    compute_t_opt,
    fit_least_squares,
    fit_two_point,
    purge_on_outlier,
    run_cycle,
    update_bracket,
)
from .fusion import FusionConfig, WeightTriple, fuse, fusion_weights
from .harness import (
    ConfigError,
    ExperimentConfig,
    InvariantBreach,
    emit_plot_data,
    load_experiment_config,
    run_cell,
    run_experiment,
)
from .metrics import MetricsReport, cdf_points, evaluate, mae, snr_db, success_rate
from .rppg import (
    HRSeries,
    PatchTrace,
    PipelineConfig,
    PulseWave,
    estimate_hr,
    extract_patch_traces,
    pos_project,
    run_pipeline,
    select_top_k,
    splice_overlap_add,
    window_normalize_filter,
)
from .scenario_io import (
    ScenarioFormatError,
    ScenarioParams,
    load_scenario,
    loads_scenario,
    save_scenario,
)
from .scene import (
    HeartRateProfile,
    IlluminationEvent,
    IlluminationField,
    ScenarioSpec,
    SkinReflectanceField,
    SpatialPhase,
    ground_truth_hr,
    scene_radiance,
    uniform_scene,
)
from .sensor import (
    Frame,
    SensorConfig,
    accumulate,
    capture,
    response_curve,
    roi_mean,
)
from .strategies import (
    AdaptiveTriplet,
    AdaptiveTripletMerf,
    AutoFullFrame,
    FixedExposure,
    StrategyRun,
    next_exposure_auto,
    run_strategy,
)

__version__ = "0.1.0"
