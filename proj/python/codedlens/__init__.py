"""Mask-based lensless 3D imaging under coded illumination.

Thin wrapper over the compiled extension; see the package README for the
physical model and the file formats shared with the command-line tool.
"""

from codedlens._core import (  # noqa: F401
    CameraGeometry,
    DepthGrid,
    ExperimentConfig,
    IlluminationSequence,
    MaskKind,
    MaskSpec,
    MeasurementSet,
    NoiseModel,
    PatternFamily,
    ScenePlaneCoords,
    SceneVolume,
    SolverReport,
    SystemModel,
    __version__,
    add_noise,
    apply_adjoint,
    build_system_matrices,
    depth_rmse,
    extract_depth_and_aif,
    forward,
    known_studies,
    lipschitz_estimate,
    mls_vector,
    predict_depth_shift,
    psf_1d,
    random_sequence,
    run_reconstruct,
    run_simulate,
    run_study,
    sample_mask_1d,
    scene_lateral_coordinates,
    sensor_pixel_centers_mm,
    set_max_threads,
    shifting_dots_sequence,
    shifting_lines_sequence,
    solve_coded,
    solve_mask_shifts,
    ssim,
    sweepcam_forward,
    sweepcam_shift_grid,
    tv3d_value_and_gradient,
    uniform_sequence,
)
