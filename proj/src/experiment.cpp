#include "codedlens/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <fstream>
#include <sstream>

#include "codedlens/version.hpp"

namespace codedlens {

namespace fs = std::filesystem;

namespace {

PatternFamily family_from_string(const std::string& name) {
    if (name == "uniform") return PatternFamily::uniform;
    if (name == "random") return PatternFamily::random;
    if (name == "shifting_dots") return PatternFamily::shifting_dots;
    if (name == "shifting_lines") return PatternFamily::shifting_lines;
    throw ConfigError("unknown pattern family: " + name);
}

MaskKind mask_kind_from_string(const std::string& name) {
    if (name == "mls") return MaskKind::mls;
    if (name == "pinhole") return MaskKind::pinhole;
    throw ConfigError("unknown mask kind: " + name);
}

std::string format_double(double v) {
    std::ostringstream out;
    out << std::setprecision(17) << v;
    return out.str();
}

std::string format_fixed(double v, int digits) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(digits) << v;
    return out.str();
}

void append_key(std::string& text, const std::string& key, const std::string& value) {
    text += key;
    text += " = ";
    text += value;
    text += "\n";
}

// Scene, voxelization and simulation-grid system matrices for one config,
// exposure-normalized so the uniform-illumination frame peaks at 1.
struct SimContext {
    CameraGeometry geometry;
    MaskSpec mask;
    DepthGrid sim_grid;
    DepthGrid recon_grid;
    SyntheticScene scene;
    SceneVolume volume;
    SystemModel sim_model;
    double exposure_scale = 1.0;
};

SyntheticScene load_scene(const ExperimentConfig& config) {
    if (config.scene != "file")
        return make_scene(scene_kind_from_string(config.scene), config.scene_angles,
                          config.depth_min_cm, config.depth_max_cm);

    if (config.scene_file.empty()) throw ConfigError("scene = file requires scene_file");
    const auto planes = read_llv(config.scene_file);
    if (planes.size() != 2)
        throw IoError("scene file must hold two planes (depth_cm, intensity): " +
                      config.scene_file);
    SyntheticScene scene = scene_from_planes(planes[0], planes[1], "file");
    if (static_cast<int>(scene.intensity.rows()) != config.scene_angles)
        throw ConfigError("scene file grid does not match scene_angles");
    for (Eigen::Index r = 0; r < scene.depth_cm.rows(); ++r) {
        for (Eigen::Index c = 0; c < scene.depth_cm.cols(); ++c) {
            if (scene.intensity(r, c) <= 0.0) continue;
            const double z = scene.depth_cm(r, c);
            if (z < config.depth_min_cm - 1e-9 || z > config.depth_max_cm + 1e-9)
                throw ConfigError("scene file depth outside [depth_min_cm, depth_max_cm]");
        }
    }
    return scene;
}

SimContext make_context(const ExperimentConfig& config) {
    config.validate();
    SimContext ctx;
    ctx.geometry = config.make_geometry();
    ctx.mask = config.make_mask();
    ctx.sim_grid = config.sim_grid();
    ctx.recon_grid = config.recon_grid();
    ctx.scene = load_scene(config);
    ctx.volume = scene_to_volume(ctx.scene, ctx.sim_grid);
    ctx.sim_model = build_system_matrices(ctx.geometry, ctx.mask, ctx.sim_grid);

    const auto uniform = uniform_sequence(config.scene_angles);
    const auto probe = forward(ctx.volume, uniform, ctx.sim_model);
    const double peak = probe.frames.front().maxCoeff();
    ctx.exposure_scale = peak > 0.0 ? 1.0 / peak : 1.0;
    for (auto& plane : ctx.volume.planes) plane *= ctx.exposure_scale;
    ctx.scene.intensity *= ctx.exposure_scale;
    return ctx;
}

std::string manifest_text(const ExperimentConfig& config) {
    const std::string body = config.to_config_text();
    std::ostringstream out;
    out << "# codedlens " << kVersion << "\n";
    out << "# config_fnv1a64 = 0x" << std::hex << std::setw(16) << std::setfill('0')
        << fnv1a64(body) << "\n";
    out << body;
    return out.str();
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << text;
    if (!out) throw IoError("write failed: " + path.string());
}

void write_simulate_outputs(const fs::path& dir, const ExperimentConfig& config,
                            const SimContext& ctx, const MeasurementSet& measurements,
                            const IlluminationSequence& sequence) {
    fs::create_directories(dir);
    write_text(dir / "manifest.txt", manifest_text(config));
    write_llv(dir / "patterns.llv", sequence.patterns);
    write_llv(dir / "measurements.llv", measurements.frames);
    write_llv(dir / "ground_truth_volume.llv", ctx.volume.planes);
    write_llv(dir / "reference_image.llv", {ctx.scene.intensity});
    write_llv(dir / "reference_depth.llv", {ctx.scene.depth_cm});
    const DepthMap reference = ctx.scene.reference_depth();
    write_depth_pgm(dir / "reference_depth.pgm", reference.depth_cm, reference.valid,
                    config.depth_min_cm, config.depth_max_cm);
    const double peak = ctx.scene.intensity.maxCoeff();
    write_pgm16(dir / "reference_image.pgm", ctx.scene.intensity, 0.0,
                peak > 0.0 ? peak : 1.0);
}

std::string solver_report_text(const SolverReport& report, double tv_epsilon) {
    std::ostringstream out;
    out << "iterations = " << report.iterations << "\n";
    out << "stop_reason = " << report.stop_reason << "\n";
    out << "restarts = " << report.restarts << "\n";
    out << "lambda = " << format_double(report.lambda) << "\n";
    out << "tv_epsilon = " << format_double(tv_epsilon) << "\n";
    out << "step_size = " << format_double(report.step_size) << "\n";
    out << "final_data_residual = " << format_double(report.final_data_residual) << "\n";
    out << "final_tv = " << format_double(report.final_tv) << "\n";
    out << "objective_trace =";
    for (double v : report.objective_trace) out << " " << format_double(v);
    out << "\n";
    return out.str();
}

void write_reconstruct_outputs(const fs::path& dir, const ExperimentConfig& config,
                               const ReconstructResult& result, double tv_epsilon) {
    fs::create_directories(dir);
    write_text(dir / "manifest.txt", manifest_text(config));
    write_llv(dir / "volume.llv", result.volume.planes);
    write_llv(dir / "depth_map.llv", {result.extraction.depth.depth_cm});
    write_llv(dir / "all_in_focus.llv", {result.extraction.all_in_focus});
    write_depth_pgm(dir / "depth_map.pgm", result.extraction.depth.depth_cm,
                    result.extraction.depth.valid, config.depth_min_cm, config.depth_max_cm);
    const double peak = result.extraction.all_in_focus.maxCoeff();
    write_pgm16(dir / "all_in_focus.pgm", result.extraction.all_in_focus, 0.0,
                peak > 0.0 ? peak : 1.0);
    write_text(dir / "solver_report.txt", solver_report_text(result.report, tv_epsilon));
}

struct ReconSetup {
    double lambda = 0.0;
    double tv_epsilon = 0.0;
    SolveOptions options;
};

ReconSetup prepare_recon(const ExperimentConfig& config, const ForwardOperator& op,
                         const std::vector<Eigen::MatrixXd>& frames) {
    ReconSetup setup;
    const SceneVolume back = op.apply_adjoint(frames);
    double back_peak = 0.0;
    for (const auto& plane : back.planes)
        back_peak = std::max(back_peak, plane.cwiseAbs().maxCoeff());

    setup.lambda = config.lambda_abs >= 0.0 ? config.lambda_abs : config.lambda_rel * back_peak;

    const double op_norm = lipschitz_estimate(op);
    const double intensity_estimate = op_norm > 0.0 ? back_peak / op_norm : 1.0;
    setup.tv_epsilon =
        std::max(config.tv_epsilon_rel * std::max(intensity_estimate, 1e-12), 1e-300);

    setup.options.max_iters = config.max_iters;
    setup.options.rel_tolerance = config.rel_tolerance;
    if (config.step_rule == "fixed") {
        setup.options.step_rule = StepRule::fixed(config.fixed_step);
    } else {
        setup.options.step_rule = StepRule::backtracking();
        const double l_tv = setup.lambda > 0.0
                                ? setup.lambda * (8.0 + 4.0 * config.depth_weight) / setup.tv_epsilon
                                : 0.0;
        const double denom = 2.0 * op_norm + l_tv;
        setup.options.initial_step = denom > 0.0 ? 1.0 / denom : 1.0;
    }
    return setup;
}

ReconstructResult reconstruct_with_operator(const ExperimentConfig& config,
                                            const ForwardOperator& op,
                                            const std::vector<Eigen::MatrixXd>& frames,
                                            const fs::path& out_dir) {
    const ReconSetup setup = prepare_recon(config, op, frames);

    ReconProblem problem;
    problem.op = &op;
    problem.measurements = frames;
    problem.lambda = setup.lambda;
    problem.tv_epsilon = setup.tv_epsilon;
    problem.depth_weight = config.depth_weight;

    ReconstructResult result;
    if (config.max_iters == 0) {
        result.volume = SceneVolume::zero(op.grid_size(), op.depths());
        result.report.lambda = setup.lambda;
        result.report.stop_reason = "max_iters";
        double residual = 0.0;
        for (const auto& f : frames) residual += f.squaredNorm();
        result.report.objective_trace.push_back(residual);
        result.report.final_data_residual = residual;
    } else {
        auto [volume, report] = solve(problem, setup.options);
        result.volume = std::move(volume);
        result.report = std::move(report);
    }
    result.extraction = extract_depth_and_aif(result.volume);

    if (!out_dir.empty()) write_reconstruct_outputs(out_dir, config, result, setup.tv_epsilon);
    return result;
}

std::uint64_t derive_seed(std::uint64_t base, const std::string& label) {
    return base ^ fnv1a64(label);
}

}  // namespace

ExperimentConfig ExperimentConfig::from_config(const KeyValueConfig& kv) {
    ExperimentConfig c;
    c.sensor_pixels = static_cast<int>(kv.get_int_or("sensor_pixels", c.sensor_pixels));
    c.sensor_pitch_um = kv.get_double_or("sensor_pitch_um", c.sensor_pitch_um);
    c.mask_distance_mm = kv.get_double_or("mask_distance_mm", c.mask_distance_mm);
    c.baseline_cm = kv.get_double_or("baseline_cm", c.baseline_cm);
    c.baseline_axial_cm = kv.get_double_or("baseline_axial_cm", c.baseline_axial_cm);
    c.scene_angles = static_cast<int>(kv.get_int_or("scene_angles", c.scene_angles));
    c.projector_half_fov_rad =
        kv.get_double_or("projector_half_fov_rad", c.projector_half_fov_rad);
    c.mask_kind = mask_kind_from_string(kv.get_string_or("mask_kind", "mls"));
    c.mask_order = static_cast<int>(kv.get_int_or("mask_order", c.mask_order));
    c.mask_feature_um = kv.get_double_or("mask_feature_um", c.mask_feature_um);
    c.pinhole_features = static_cast<int>(kv.get_int_or("pinhole_features", c.pinhole_features));
    c.pinhole_index = static_cast<int>(kv.get_int_or("pinhole_index", c.pinhole_index));
    c.depth_min_cm = kv.get_double_or("depth_min_cm", c.depth_min_cm);
    c.depth_max_cm = kv.get_double_or("depth_max_cm", c.depth_max_cm);
    c.sim_planes = static_cast<int>(kv.get_int_or("sim_planes", c.sim_planes));
    c.recon_planes = static_cast<int>(kv.get_int_or("recon_planes", c.recon_planes));
    c.pattern_family = family_from_string(kv.get_string_or("pattern_family", "shifting_lines"));
    c.pattern_k = static_cast<int>(kv.get_int_or("pattern_k", c.pattern_k));
    c.random_count = static_cast<int>(kv.get_int_or("random_count", c.random_count));
    c.noise_enabled = kv.get_bool_or("noise", c.noise_enabled);
    c.full_well = kv.get_double_or("full_well", c.full_well);
    c.gain = kv.get_double_or("gain", c.gain);
    c.dynamic_range_db = kv.get_double_or("dynamic_range_db", c.dynamic_range_db);
    c.max_iters = static_cast<int>(kv.get_int_or("max_iters", c.max_iters));
    c.lambda_rel = kv.get_double_or("lambda_rel", c.lambda_rel);
    c.lambda_abs = kv.get_double_or("lambda_abs", c.lambda_abs);
    c.tv_epsilon_rel = kv.get_double_or("tv_epsilon_rel", c.tv_epsilon_rel);
    c.depth_weight = kv.get_double_or("depth_weight", c.depth_weight);
    c.rel_tolerance = kv.get_double_or("rel_tolerance", c.rel_tolerance);
    c.step_rule = kv.get_string_or("step_rule", c.step_rule);
    c.fixed_step = kv.get_double_or("fixed_step", c.fixed_step);
    c.scene = kv.get_string_or("scene", c.scene);
    c.scene_file = kv.get_string_or("scene_file", c.scene_file);
    c.seed = kv.get_uint64_or("seed", c.seed);
    c.output_dir = kv.get_string_or("output_dir", c.output_dir);
    kv.ensure_all_keys_consumed();
    c.validate();
    return c;
}

std::string ExperimentConfig::to_config_text() const {
    std::string text;
    append_key(text, "baseline_axial_cm", format_double(baseline_axial_cm));
    append_key(text, "baseline_cm", format_double(baseline_cm));
    append_key(text, "depth_max_cm", format_double(depth_max_cm));
    append_key(text, "depth_min_cm", format_double(depth_min_cm));
    append_key(text, "depth_weight", format_double(depth_weight));
    append_key(text, "dynamic_range_db", format_double(dynamic_range_db));
    append_key(text, "fixed_step", format_double(fixed_step));
    append_key(text, "full_well", format_double(full_well));
    append_key(text, "gain", format_double(gain));
    append_key(text, "lambda_abs", format_double(lambda_abs));
    append_key(text, "lambda_rel", format_double(lambda_rel));
    append_key(text, "mask_distance_mm", format_double(mask_distance_mm));
    append_key(text, "mask_feature_um", format_double(mask_feature_um));
    append_key(text, "mask_kind", mask_kind == MaskKind::mls ? "mls" : "pinhole");
    append_key(text, "mask_order", std::to_string(mask_order));
    append_key(text, "max_iters", std::to_string(max_iters));
    append_key(text, "noise", noise_enabled ? "true" : "false");
    append_key(text, "pattern_family", to_string(pattern_family));
    append_key(text, "pattern_k", std::to_string(pattern_k));
    append_key(text, "pinhole_features", std::to_string(pinhole_features));
    append_key(text, "pinhole_index", std::to_string(pinhole_index));
    append_key(text, "projector_half_fov_rad", format_double(projector_half_fov_rad));
    append_key(text, "random_count", std::to_string(random_count));
    append_key(text, "recon_planes", std::to_string(recon_planes));
    append_key(text, "rel_tolerance", format_double(rel_tolerance));
    append_key(text, "scene", scene);
    if (!scene_file.empty()) append_key(text, "scene_file", scene_file);
    append_key(text, "scene_angles", std::to_string(scene_angles));
    append_key(text, "seed", std::to_string(seed));
    append_key(text, "sensor_pitch_um", format_double(sensor_pitch_um));
    append_key(text, "sensor_pixels", std::to_string(sensor_pixels));
    append_key(text, "sim_planes", std::to_string(sim_planes));
    append_key(text, "step_rule", step_rule);
    append_key(text, "tv_epsilon_rel", format_double(tv_epsilon_rel));
    return text;
}

void ExperimentConfig::validate() const {
    make_geometry().validate();
    make_mask();  // factory validates
    if (!(depth_min_cm > 0.0) || !(depth_max_cm > depth_min_cm))
        throw ConfigError("config: need 0 < depth_min_cm < depth_max_cm");
    if (sim_planes < 1 || recon_planes < 1)
        throw ConfigError("config: depth plane counts must be >= 1");
    if (pattern_family == PatternFamily::shifting_dots ||
        pattern_family == PatternFamily::shifting_lines) {
        if (pattern_k < 1 || pattern_k > scene_angles)
            throw ConfigError("config: need 1 <= pattern_k <= scene_angles");
    }
    if (pattern_family == PatternFamily::random && random_count < 1)
        throw ConfigError("config: random_count must be >= 1");
    if (noise_enabled) {
        NoiseModel model{full_well, gain, dynamic_range_db, seed};
        model.validate();
    }
    if (max_iters < 0) throw ConfigError("config: max_iters must be >= 0");
    if (lambda_abs < 0.0 && lambda_rel < 0.0)
        throw ConfigError("config: lambda_rel must be >= 0");
    if (!(tv_epsilon_rel > 0.0)) throw ConfigError("config: tv_epsilon_rel must be > 0");
    if (depth_weight < 0.0) throw ConfigError("config: depth_weight must be >= 0");
    if (step_rule != "backtracking" && step_rule != "fixed")
        throw ConfigError("config: step_rule must be backtracking or fixed");
    if (step_rule == "fixed" && !(fixed_step > 0.0))
        throw ConfigError("config: fixed step_rule needs fixed_step > 0");
    if (scene != "file") scene_kind_from_string(scene);  // throws on unknown
}

CameraGeometry ExperimentConfig::make_geometry() const {
    CameraGeometry g;
    g.sensor_pixels = sensor_pixels;
    g.sensor_pitch_mm = sensor_pitch_um * 1e-3;
    const MaskSpec mask = make_mask();
    g.mask_features = mask.features();
    g.mask_pitch_mm = mask.feature_pitch_mm;
    g.mask_distance_mm = mask_distance_mm;
    g.baseline_mm = baseline_cm * 10.0;
    g.baseline_axial_mm = baseline_axial_cm * 10.0;
    g.scene_angles = scene_angles;
    g.projector_half_fov_rad = projector_half_fov_rad;
    return g;
}

MaskSpec ExperimentConfig::make_mask() const {
    const double pitch_mm = mask_feature_um * 1e-3;
    if (mask_kind == MaskKind::mls) return MaskSpec::mls(mask_order, pitch_mm);
    return MaskSpec::pinhole(pinhole_features, pinhole_index, pitch_mm);
}

DepthGrid ExperimentConfig::sim_grid() const {
    return DepthGrid::uniform(depth_min_cm * 10.0, depth_max_cm * 10.0, sim_planes);
}

DepthGrid ExperimentConfig::recon_grid() const {
    return DepthGrid::uniform(depth_min_cm * 10.0, depth_max_cm * 10.0, recon_planes);
}

IlluminationSequence ExperimentConfig::make_sequence() const {
    switch (pattern_family) {
        case PatternFamily::uniform: return uniform_sequence(scene_angles);
        case PatternFamily::random: return random_sequence(scene_angles, random_count, seed);
        case PatternFamily::shifting_dots: return shifting_dots_sequence(scene_angles, pattern_k);
        case PatternFamily::shifting_lines:
            return shifting_lines_sequence(scene_angles, pattern_k);
    }
    throw ConfigError("config: unknown pattern family");
}

SimulateResult run_simulate(const ExperimentConfig& config, const fs::path& out_dir) {
    SimContext ctx = make_context(config);
    IlluminationSequence sequence = config.make_sequence();

    MeasurementSet measurements = forward(ctx.volume, sequence, ctx.sim_model);
    if (config.noise_enabled) {
        NoiseModel noise{config.full_well, config.gain, config.dynamic_range_db, config.seed};
        measurements = add_noise(measurements, noise);
    }

    if (!out_dir.empty()) write_simulate_outputs(out_dir, config, ctx, measurements, sequence);

    SimulateResult result;
    result.scene = std::move(ctx.scene);
    result.ground_truth = std::move(ctx.volume);
    result.measurements = std::move(measurements);
    result.sequence = std::move(sequence);
    result.exposure_scale = ctx.exposure_scale;
    return result;
}

ReconstructResult run_reconstruct(const ExperimentConfig& config,
                                  const std::vector<Eigen::MatrixXd>& frames,
                                  const fs::path& out_dir) {
    config.validate();
    const IlluminationSequence sequence = config.make_sequence();
    if (static_cast<int>(frames.size()) != sequence.count())
        throw ConfigError("reconstruct: measurement frame count (" +
                          std::to_string(frames.size()) + ") does not match the pattern count (" +
                          std::to_string(sequence.count()) + ") implied by the config");
    const SystemModel model =
        build_system_matrices(config.make_geometry(), config.make_mask(), config.recon_grid());
    CodedIlluminationOperator op(model, sequence);
    return reconstruct_with_operator(config, op, frames, out_dir);
}

ReconstructResult run_reconstruct_file(const ExperimentConfig& config,
                                       const fs::path& measurements_path,
                                       const fs::path& out_dir) {
    const auto frames = read_llv(measurements_path);
    for (const auto& f : frames)
        if (f.rows() != config.sensor_pixels || f.cols() != config.sensor_pixels)
            throw IoError("reconstruct: measurement frames are not sensor_pixels square in " +
                          measurements_path.string());
    return run_reconstruct(config, frames, out_dir);
}

std::vector<std::string> known_studies() {
    return {"baseline_sweep", "pattern_count", "pinhole_vs_mls", "sweepcam_vs_coded"};
}

std::vector<std::array<double, 2>> sweepcam_shift_grid(double range_mm) {
    const int side = 7;
    const double half = 0.5 * range_mm;
    std::vector<std::array<double, 2>> shifts;
    shifts.reserve(static_cast<size_t>(side) * side - 1);
    for (int i = 0; i < side; ++i) {
        for (int j = 0; j < side; ++j) {
            if (static_cast<int>(shifts.size()) == side * side - 1) break;  // 48 positions
            const double x = -half + range_mm * i / (side - 1);
            const double y = -half + range_mm * j / (side - 1);
            shifts.push_back({x, y});
        }
    }
    return shifts;
}

namespace {

struct Condition {
    std::string name;
    ExperimentConfig config;
    bool sweepcam = false;
};

std::vector<Condition> study_conditions(const std::string& study_name,
                                        const ExperimentConfig& base) {
    std::vector<Condition> conditions;
    auto with_family = [&](std::string name, PatternFamily family, int k) {
        ExperimentConfig cfg = base;
        cfg.pattern_family = family;
        cfg.pattern_k = k;
        conditions.push_back({std::move(name), std::move(cfg), false});
    };

    if (study_name == "pattern_count") {
        with_family("uniform", PatternFamily::uniform, 0);
        with_family("lines_16", PatternFamily::shifting_lines, 8);
        with_family("lines_48", PatternFamily::shifting_lines, 24);
        with_family("dots_49", PatternFamily::shifting_dots, 7);
    } else if (study_name == "baseline_sweep") {
        for (double b : {0.0, 2.5, 5.0, 7.5}) {
            ExperimentConfig cfg = base;
            cfg.pattern_family = PatternFamily::shifting_lines;
            cfg.pattern_k = 24;
            cfg.baseline_cm = b;
            std::ostringstream name;
            name << "baseline_" << std::setw(4) << std::setfill('0') << std::fixed
                 << std::setprecision(1) << b << "cm";
            conditions.push_back({name.str(), std::move(cfg), false});
        }
    } else if (study_name == "pinhole_vs_mls") {
        for (int k : {8, 24}) {
            for (MaskKind kind : {MaskKind::mls, MaskKind::pinhole}) {
                ExperimentConfig cfg = base;
                cfg.noise_enabled = false;  // idealized comparison
                cfg.pattern_family = PatternFamily::shifting_lines;
                cfg.pattern_k = k;
                cfg.mask_kind = kind;
                std::string name = (kind == MaskKind::mls ? "mls_lines" : "pinhole_lines") +
                                   std::to_string(2 * k);
                conditions.push_back({std::move(name), std::move(cfg), false});
            }
        }
    } else if (study_name == "sweepcam_vs_coded") {
        ExperimentConfig coded = base;
        coded.pattern_family = PatternFamily::shifting_lines;
        coded.pattern_k = 24;
        conditions.push_back({"coded_lines48", std::move(coded), false});
        ExperimentConfig sweep = base;
        conditions.push_back({"sweepcam_shifts48", std::move(sweep), true});
    } else {
        throw ConfigError("unknown study: " + study_name);
    }
    return conditions;
}

}  // namespace

std::vector<StudyRow> run_study(const std::string& study_name, const ExperimentConfig& base,
                                const fs::path& out_dir) {
    auto conditions = study_conditions(study_name, base);
    std::sort(conditions.begin(), conditions.end(),
              [](const Condition& a, const Condition& b) { return a.name < b.name; });

    const double sweep_range_mm = 2.88;
    std::vector<StudyRow> rows;
    for (const auto& condition : conditions) {
        const auto start = std::chrono::steady_clock::now();
        StudyRow row;
        row.condition = condition.name;

        for (SceneKind kind : builtin_scenes()) {
            ExperimentConfig cfg = condition.config;
            cfg.scene = to_string(kind);
            cfg.seed = derive_seed(base.seed, condition.name + "/" + cfg.scene);
            const fs::path scene_dir =
                out_dir.empty() ? fs::path() : out_dir / condition.name / cfg.scene;

            ReconstructResult rec;
            SyntheticScene scene;
            int frames = 0;
            if (condition.sweepcam) {
                SimContext ctx = make_context(cfg);
                const auto shifts = sweepcam_shift_grid(sweep_range_mm);
                MeasurementSet measurements =
                    sweepcam_forward(ctx.volume, shifts, ctx.geometry, ctx.mask);
                if (cfg.noise_enabled) {
                    NoiseModel noise{cfg.full_well, cfg.gain, cfg.dynamic_range_db, cfg.seed};
                    measurements = add_noise(measurements, noise);
                }
                if (!scene_dir.empty())
                    write_simulate_outputs(scene_dir, cfg, ctx, measurements,
                                           measurements.sequence);
                MaskShiftOperator op(ctx.geometry, ctx.mask, ctx.recon_grid, shifts);
                rec = reconstruct_with_operator(cfg, op, measurements.frames, scene_dir);
                scene = std::move(ctx.scene);
                frames = measurements.frame_count();
            } else {
                SimulateResult sim = run_simulate(cfg, scene_dir);
                rec = run_reconstruct(cfg, sim.measurements.frames, scene_dir);
                scene = std::move(sim.scene);
                frames = sim.measurements.frame_count();
            }

            if (rec.report.objective_trace.back() >
                rec.report.objective_trace.front() * (1.0 + 1e-12))
                throw NumericalError("study: objective increased in condition " + condition.name);

            const MetricReport metrics =
                compute_metrics(rec.volume, scene.reference_depth(), scene.intensity);
            if (!scene_dir.empty()) {
                std::vector<std::vector<std::string>> metric_rows;
                metric_rows.push_back({"depth_rmse_cm", format_double(metrics.depth_rmse_cm)});
                metric_rows.push_back({"ssim", format_double(metrics.ssim)});
                for (size_t k = 0; k < metrics.per_plane_rmse_cm.size(); ++k)
                    metric_rows.push_back({"plane_" + std::to_string(k) + "_rmse_cm",
                                           format_double(metrics.per_plane_rmse_cm[k])});
                write_csv(scene_dir / "metrics.csv", {"metric", "value"}, metric_rows);
            }

            row.scene_count += 1;
            row.frame_count = frames;
            row.depth_rmse_cm += metrics.depth_rmse_cm;
            row.ssim += metrics.ssim;
            row.initial_objective += rec.report.objective_trace.front();
            row.final_objective += rec.report.objective_trace.back();
            row.final_data_residual_per_frame += rec.report.final_data_residual / frames;
        }

        row.depth_rmse_cm /= row.scene_count;
        row.ssim /= row.scene_count;
        row.initial_objective /= row.scene_count;
        row.final_objective /= row.scene_count;
        row.final_data_residual_per_frame /= row.scene_count;
        row.runtime_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        rows.push_back(std::move(row));
    }

    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        std::vector<std::vector<std::string>> csv_rows;
        for (const auto& row : rows) {
            csv_rows.push_back({row.condition, std::to_string(row.scene_count),
                                std::to_string(row.frame_count), format_fixed(row.depth_rmse_cm, 6),
                                format_fixed(row.ssim, 6),
                                format_double(row.final_data_residual_per_frame),
                                format_fixed(row.runtime_s, 3)});
        }
        write_csv(out_dir / "study.csv",
                  {"condition", "scenes", "frames", "depth_rmse_cm", "ssim",
                   "residual_per_frame", "runtime_s"},
                  csv_rows);
    }
    return rows;
}

}  // namespace codedlens
