// Python bindings for the core operations: geometry and masks, pattern
// generators, system matrices, forward simulation, noise, reconstruction,
// depth extraction and metrics, plus the config-driven experiment runners.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "codedlens/experiment.hpp"
#include "codedlens/parallel.hpp"
#include "codedlens/version.hpp"

namespace py = pybind11;
using namespace codedlens;

namespace {

SceneVolume make_volume(const std::vector<Eigen::MatrixXd>& planes,
                        const std::vector<double>& depths_mm) {
    SceneVolume volume;
    volume.planes = planes;
    volume.depths = DepthGrid(depths_mm);
    volume.check_shape();
    return volume;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Lensless 3D imaging with coded illumination: simulation and reconstruction";
    m.attr("__version__") = kVersion;

    m.def("set_max_threads", &set_max_threads, py::arg("threads"));

    // --- geometry ---
    py::class_<CameraGeometry>(m, "CameraGeometry")
        .def(py::init<>())
        .def_readwrite("sensor_pixels", &CameraGeometry::sensor_pixels)
        .def_readwrite("sensor_pitch_mm", &CameraGeometry::sensor_pitch_mm)
        .def_readwrite("mask_features", &CameraGeometry::mask_features)
        .def_readwrite("mask_pitch_mm", &CameraGeometry::mask_pitch_mm)
        .def_readwrite("mask_distance_mm", &CameraGeometry::mask_distance_mm)
        .def_readwrite("baseline_mm", &CameraGeometry::baseline_mm)
        .def_readwrite("baseline_axial_mm", &CameraGeometry::baseline_axial_mm)
        .def_readwrite("scene_angles", &CameraGeometry::scene_angles)
        .def_readwrite("projector_half_fov_rad", &CameraGeometry::projector_half_fov_rad)
        .def("validate", &CameraGeometry::validate);

    py::class_<DepthGrid>(m, "DepthGrid")
        .def(py::init<std::vector<double>>(), py::arg("depths_mm"))
        .def_static("uniform", &DepthGrid::uniform, py::arg("z_min_mm"), py::arg("z_max_mm"),
                    py::arg("count"))
        .def("values_mm", &DepthGrid::values_mm)
        .def("__len__", &DepthGrid::size);

    // --- masks and patterns ---
    py::enum_<MaskKind>(m, "MaskKind").value("mls", MaskKind::mls).value("pinhole", MaskKind::pinhole);

    py::class_<MaskSpec>(m, "MaskSpec")
        .def_static("mls", &MaskSpec::mls, py::arg("register_order"), py::arg("feature_pitch_mm"))
        .def_static("pinhole", &MaskSpec::pinhole, py::arg("features"), py::arg("hole_index"),
                    py::arg("feature_pitch_mm"))
        .def_readonly("row_features", &MaskSpec::row_features)
        .def_readonly("col_features", &MaskSpec::col_features)
        .def_readonly("feature_pitch_mm", &MaskSpec::feature_pitch_mm)
        .def_readonly("kind", &MaskSpec::kind)
        .def_property_readonly("features", &MaskSpec::features);

    m.def("mls_vector", [](int order) {
        auto bits = mls_vector(order);
        return std::vector<int>(bits.begin(), bits.end());
    }, py::arg("register_order"));

    py::enum_<PatternFamily>(m, "PatternFamily")
        .value("uniform", PatternFamily::uniform)
        .value("random", PatternFamily::random)
        .value("shifting_dots", PatternFamily::shifting_dots)
        .value("shifting_lines", PatternFamily::shifting_lines);

    py::class_<IlluminationSequence>(m, "IlluminationSequence")
        .def_readonly("patterns", &IlluminationSequence::patterns)
        .def_readonly("family", &IlluminationSequence::family)
        .def_readonly("spacing", &IlluminationSequence::spacing)
        .def_readonly("seed", &IlluminationSequence::seed)
        .def("__len__", &IlluminationSequence::count);

    m.def("uniform_sequence", &uniform_sequence, py::arg("n"));
    m.def("random_sequence", &random_sequence, py::arg("n"), py::arg("count"), py::arg("seed"));
    m.def("shifting_dots_sequence", &shifting_dots_sequence, py::arg("n"), py::arg("k"));
    m.def("shifting_lines_sequence", &shifting_lines_sequence, py::arg("n"), py::arg("k"));

    // --- optics ---
    m.def("sample_mask_1d",
          [](const std::vector<double>& features, double pitch_mm, double x_mm) {
              return sample_mask_1d(features, pitch_mm, x_mm);
          },
          py::arg("features"), py::arg("feature_pitch_mm"), py::arg("x_mm"));
    m.def("psf_1d",
          [](double s_mm, double p_mm, double z_mm, const CameraGeometry& geometry,
             const std::vector<double>& mask_features, double mask_shift_mm) {
              return psf_1d(s_mm, p_mm, z_mm, geometry, mask_features, mask_shift_mm);
          },
          py::arg("s_mm"), py::arg("p_mm"), py::arg("z_mm"), py::arg("geometry"),
          py::arg("mask_features"), py::arg("mask_shift_mm") = 0.0);
    m.def("predict_depth_shift", &predict_depth_shift, py::arg("z1_mm"), py::arg("z2_mm"),
          py::arg("geometry"));
    m.def("sensor_pixel_centers_mm", &sensor_pixel_centers_mm, py::arg("geometry"));

    py::class_<ScenePlaneCoords>(m, "ScenePlaneCoords")
        .def_readonly("baseline_axis_mm", &ScenePlaneCoords::baseline_axis_mm)
        .def_readonly("cross_axis_mm", &ScenePlaneCoords::cross_axis_mm);
    m.def("scene_lateral_coordinates", &scene_lateral_coordinates, py::arg("z_mm"),
          py::arg("geometry"));

    py::class_<SystemModel>(m, "SystemModel")
        .def_readonly("left", &SystemModel::left)
        .def_readonly("right", &SystemModel::right)
        .def_readonly("geometry", &SystemModel::geometry)
        .def_property_readonly("depths_mm",
                               [](const SystemModel& model) { return model.depths.values_mm(); })
        .def("plane_count", &SystemModel::plane_count);

    m.def("build_system_matrices",
          [](const CameraGeometry& geometry, const MaskSpec& mask,
             const std::vector<double>& depths_mm, std::array<double, 2> mask_shift_mm) {
              return build_system_matrices(geometry, mask, DepthGrid(depths_mm), mask_shift_mm);
          },
          py::arg("geometry"), py::arg("mask"), py::arg("depths_mm"),
          py::arg("mask_shift_mm") = std::array<double, 2>{0.0, 0.0});

    // --- forward simulation ---
    py::class_<SceneVolume>(m, "SceneVolume")
        .def(py::init(&make_volume), py::arg("planes"), py::arg("depths_mm"))
        .def_readonly("planes", &SceneVolume::planes)
        .def_property_readonly("depths_mm",
                               [](const SceneVolume& v) { return v.depths.values_mm(); });

    py::class_<NoiseModel>(m, "NoiseModel")
        .def(py::init([](double full_well, double gain, double dynamic_range_db,
                         std::uint64_t seed) {
                 NoiseModel model{full_well, gain, dynamic_range_db, seed};
                 model.validate();
                 return model;
             }),
             py::arg("full_well") = 2.0e4, py::arg("gain") = 1.0,
             py::arg("dynamic_range_db") = 60.0, py::arg("seed") = 0)
        .def_readwrite("full_well", &NoiseModel::full_well)
        .def_readwrite("gain", &NoiseModel::gain)
        .def_readwrite("dynamic_range_db", &NoiseModel::dynamic_range_db)
        .def_readwrite("seed", &NoiseModel::seed)
        .def("read_noise_sigma", &NoiseModel::read_noise_sigma);

    py::class_<MeasurementSet>(m, "MeasurementSet")
        .def_readonly("frames", &MeasurementSet::frames)
        .def_readonly("sequence", &MeasurementSet::sequence)
        .def("__len__", &MeasurementSet::frame_count);

    m.def("forward", &forward, py::arg("scene"), py::arg("sequence"), py::arg("model"));
    m.def("add_noise", &add_noise, py::arg("clean"), py::arg("noise"));
    m.def("sweepcam_forward", &sweepcam_forward, py::arg("scene"), py::arg("shifts_mm"),
          py::arg("geometry"), py::arg("mask"));

    // --- reconstruction ---
    m.def("apply_adjoint",
          [](const std::vector<Eigen::MatrixXd>& frames, const SystemModel& model,
             const IlluminationSequence& sequence) {
              return apply_adjoint(frames, model, sequence).planes;
          },
          py::arg("frames"), py::arg("model"), py::arg("sequence"));

    m.def("tv3d_value_and_gradient",
          [](const std::vector<Eigen::MatrixXd>& planes, double epsilon, double depth_weight) {
              std::vector<Eigen::MatrixXd> grad;
              const double value = tv3d_value_and_gradient(planes, epsilon, depth_weight, &grad);
              return py::make_tuple(value, grad);
          },
          py::arg("planes"), py::arg("epsilon"), py::arg("depth_weight") = 1.0);

    py::class_<SolverReport>(m, "SolverReport")
        .def_readonly("objective_trace", &SolverReport::objective_trace)
        .def_readonly("final_data_residual", &SolverReport::final_data_residual)
        .def_readonly("final_tv", &SolverReport::final_tv)
        .def_readonly("iterations", &SolverReport::iterations)
        .def_readonly("restarts", &SolverReport::restarts)
        .def_readonly("lambda_used", &SolverReport::lambda)
        .def_readonly("step_size", &SolverReport::step_size)
        .def_readonly("stop_reason", &SolverReport::stop_reason);

    m.def("lipschitz_estimate",
          [](const SystemModel& model, const IlluminationSequence& sequence, int iterations) {
              CodedIlluminationOperator op(model, sequence);
              return lipschitz_estimate(op, iterations);
          },
          py::arg("model"), py::arg("sequence"), py::arg("iterations") = 50);

    m.def("solve_coded",
          [](const SystemModel& model, const IlluminationSequence& sequence,
             const std::vector<Eigen::MatrixXd>& frames, double lambda, double tv_epsilon,
             double depth_weight, int max_iters, double rel_tolerance) {
              CodedIlluminationOperator op(model, sequence);
              ReconProblem problem;
              problem.op = &op;
              problem.measurements = frames;
              problem.lambda = lambda;
              problem.tv_epsilon = tv_epsilon;
              problem.depth_weight = depth_weight;
              SolveOptions options;
              options.max_iters = max_iters;
              options.rel_tolerance = rel_tolerance;
              auto [volume, report] = solve(problem, options);
              return py::make_tuple(volume.planes, report);
          },
          py::arg("model"), py::arg("sequence"), py::arg("frames"), py::arg("lambda"),
          py::arg("tv_epsilon") = 1e-6, py::arg("depth_weight") = 1.0,
          py::arg("max_iters") = 200, py::arg("rel_tolerance") = 1e-7);

    m.def("solve_mask_shifts",
          [](const CameraGeometry& geometry, const MaskSpec& mask,
             const std::vector<double>& depths_mm,
             const std::vector<std::array<double, 2>>& shifts_mm,
             const std::vector<Eigen::MatrixXd>& frames, double lambda, double tv_epsilon,
             double depth_weight, int max_iters, double rel_tolerance) {
              MaskShiftOperator op(geometry, mask, DepthGrid(depths_mm), shifts_mm);
              ReconProblem problem;
              problem.op = &op;
              problem.measurements = frames;
              problem.lambda = lambda;
              problem.tv_epsilon = tv_epsilon;
              problem.depth_weight = depth_weight;
              SolveOptions options;
              options.max_iters = max_iters;
              options.rel_tolerance = rel_tolerance;
              auto [volume, report] = solve(problem, options);
              return py::make_tuple(volume.planes, report);
          },
          py::arg("geometry"), py::arg("mask"), py::arg("depths_mm"), py::arg("shifts_mm"),
          py::arg("frames"), py::arg("lambda"), py::arg("tv_epsilon") = 1e-6,
          py::arg("depth_weight") = 1.0, py::arg("max_iters") = 200,
          py::arg("rel_tolerance") = 1e-7);

    // --- evaluation ---
    m.def("extract_depth_and_aif",
          [](const SceneVolume& volume, double threshold_fraction) {
              auto out = extract_depth_and_aif(volume, threshold_fraction);
              return py::make_tuple(out.depth.depth_cm, out.depth.valid.cast<int>().eval(),
                                    out.all_in_focus);
          },
          py::arg("volume"), py::arg("threshold_fraction") = 0.05);

    m.def("depth_rmse",
          [](const Eigen::MatrixXd& depth_a, const Eigen::MatrixXd& valid_a,
             const Eigen::MatrixXd& depth_b, const Eigen::MatrixXd& valid_b) {
              DepthMap a, b;
              a.depth_cm = depth_a;
              a.valid = valid_a.cast<std::uint8_t>();
              b.depth_cm = depth_b;
              b.valid = valid_b.cast<std::uint8_t>();
              return depth_rmse(a, b);
          },
          py::arg("depth_a_cm"), py::arg("valid_a"), py::arg("depth_b_cm"), py::arg("valid_b"));

    m.def("ssim", &ssim, py::arg("a"), py::arg("b"), py::arg("dynamic_range"));

    // --- experiments ---
    py::class_<ExperimentConfig>(m, "ExperimentConfig")
        .def(py::init<>())
        .def_static("from_text",
                    [](const std::string& text) {
                        return ExperimentConfig::from_config(KeyValueConfig::parse_string(text));
                    },
                    py::arg("text"))
        .def_static("from_file",
                    [](const std::filesystem::path& path) {
                        return ExperimentConfig::from_config(KeyValueConfig::parse_file(path));
                    },
                    py::arg("path"))
        .def("to_text", &ExperimentConfig::to_config_text)
        .def_readwrite("seed", &ExperimentConfig::seed)
        .def_readwrite("max_iters", &ExperimentConfig::max_iters)
        .def_readwrite("scene", &ExperimentConfig::scene);

    m.def("run_simulate",
          [](const ExperimentConfig& config, const std::filesystem::path& out_dir) {
              auto result = run_simulate(config, out_dir);
              return py::make_tuple(result.ground_truth.planes, result.measurements.frames);
          },
          py::arg("config"), py::arg("out_dir") = std::filesystem::path());

    m.def("run_reconstruct",
          [](const ExperimentConfig& config, const std::vector<Eigen::MatrixXd>& frames,
             const std::filesystem::path& out_dir) {
              auto result = run_reconstruct(config, frames, out_dir);
              return py::make_tuple(result.volume.planes, result.report);
          },
          py::arg("config"), py::arg("frames"), py::arg("out_dir") = std::filesystem::path());

    m.def("run_study",
          [](const std::string& study, const ExperimentConfig& config,
             const std::filesystem::path& out_dir) {
              auto rows = run_study(study, config, out_dir);
              py::list out;
              for (const auto& row : rows) {
                  py::dict d;
                  d["condition"] = row.condition;
                  d["scenes"] = row.scene_count;
                  d["frames"] = row.frame_count;
                  d["depth_rmse_cm"] = row.depth_rmse_cm;
                  d["ssim"] = row.ssim;
                  d["runtime_s"] = row.runtime_s;
                  out.append(std::move(d));
              }
              return out;
          },
          py::arg("study"), py::arg("config"), py::arg("out_dir") = std::filesystem::path());

    m.def("known_studies", &known_studies);
    m.def("sweepcam_shift_grid", &sweepcam_shift_grid, py::arg("range_mm"));
}
