#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "codedlens/eval.hpp"
#include "codedlens/forward.hpp"
#include "codedlens/io.hpp"
#include "codedlens/recon.hpp"
#include "codedlens/scenes.hpp"

namespace codedlens {

// Fully resolved experiment parameters. Defaults give the desk-scale preset:
// 64 x 64 scene grid, 128 x 128 sensor, 5 reconstruction planes over a
// 40-60 cm range simulated on 15 planes.
struct ExperimentConfig {
    // geometry
    int sensor_pixels = 128;
    double sensor_pitch_um = 9.6;
    double mask_distance_mm = 2.0;
    double baseline_cm = 5.0;
    double baseline_axial_cm = 0.0;
    int scene_angles = 64;
    double projector_half_fov_rad = 0.09966865249116204;  // atan(0.1)

    // mask
    MaskKind mask_kind = MaskKind::mls;
    int mask_order = 7;
    double mask_feature_um = 60.0;
    int pinhole_features = 127;
    int pinhole_index = 63;

    // depth grids
    double depth_min_cm = 40.0;
    double depth_max_cm = 60.0;
    int sim_planes = 15;
    int recon_planes = 5;

    // illumination
    PatternFamily pattern_family = PatternFamily::shifting_lines;
    int pattern_k = 24;
    int random_count = 16;

    // sensor noise
    bool noise_enabled = true;
    double full_well = 2.0e4;
    double gain = 1.0;
    double dynamic_range_db = 60.0;

    // solver
    int max_iters = 200;
    double lambda_rel = 1e-4;   // scales |adjoint(Y)|_inf
    double lambda_abs = -1.0;   // >= 0 overrides lambda_rel
    double tv_epsilon_rel = 1e-4;
    double depth_weight = 1.0;
    double rel_tolerance = 1e-7;
    std::string step_rule = "backtracking";  // backtracking | fixed
    double fixed_step = 0.0;

    // scene
    std::string scene = "two_plane_cards";  // builtin name or "file"
    std::string scene_file;

    std::uint64_t seed = 1;
    std::string output_dir;  // optional; CLI/env may override

    static ExperimentConfig from_config(const KeyValueConfig& config);
    // Canonical sorted key=value text of every simulation-relevant parameter.
    std::string to_config_text() const;
    void validate() const;

    CameraGeometry make_geometry() const;
    MaskSpec make_mask() const;
    DepthGrid sim_grid() const;
    DepthGrid recon_grid() const;
    IlluminationSequence make_sequence() const;
};

struct SimulateResult {
    SyntheticScene scene;         // intensity already exposure-scaled
    SceneVolume ground_truth;     // on the simulation grid
    MeasurementSet measurements;  // noisy when the config says so
    IlluminationSequence sequence;
    double exposure_scale = 1.0;
};

// Simulates measurements and, when out_dir is nonempty, writes
// manifest.txt, patterns.llv, measurements.llv, ground_truth_volume.llv,
// reference_image.{llv,pgm} and reference_depth.{llv,pgm}.
SimulateResult run_simulate(const ExperimentConfig& config,
                            const std::filesystem::path& out_dir);

struct ReconstructResult {
    SceneVolume volume;
    SolverReport report;
    DepthAndImage extraction;
};

// TV-regularized least-squares reconstruction of the given frames on the
// config's reconstruction grid. Writes manifest.txt, volume.llv,
// depth_map.{llv,pgm}, all_in_focus.{llv,pgm} and solver_report.txt when
// out_dir is nonempty.
ReconstructResult run_reconstruct(const ExperimentConfig& config,
                                  const std::vector<Eigen::MatrixXd>& frames,
                                  const std::filesystem::path& out_dir);

// File-based variant: regenerates the illumination sequence from the config
// and checks it against the measurement file.
ReconstructResult run_reconstruct_file(const ExperimentConfig& config,
                                       const std::filesystem::path& measurements_path,
                                       const std::filesystem::path& out_dir);

struct StudyRow {
    std::string condition;
    int scene_count = 0;
    int frame_count = 0;
    double depth_rmse_cm = 0.0;
    double ssim = 0.0;
    double runtime_s = 0.0;
    double initial_objective = 0.0;  // means over scenes
    double final_objective = 0.0;
    double final_data_residual_per_frame = 0.0;
};

// Runs one of the named studies over the built-in scenes and writes
// study.csv plus per-condition outputs under out_dir. Known names:
// pattern_count, baseline_sweep, pinhole_vs_mls, sweepcam_vs_coded.
std::vector<StudyRow> run_study(const std::string& study_name, const ExperimentConfig& config,
                                const std::filesystem::path& out_dir);

std::vector<std::string> known_studies();

// Positions for the mask-translation capture: a 7 x 7 grid spanning the
// given square range, minus the final corner, giving 48 shifts.
std::vector<std::array<double, 2>> sweepcam_shift_grid(double range_mm);

}  // namespace codedlens
