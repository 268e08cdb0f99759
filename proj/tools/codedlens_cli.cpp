// Command-line front end: simulate, reconstruct, study, evaluate.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>

#include "codedlens/experiment.hpp"
#include "codedlens/parallel.hpp"
#include "codedlens/version.hpp"

namespace fs = std::filesystem;
using namespace codedlens;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumerical = 4;

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required) {
    auto* config_opt =
        cmd->add_option("--config", args.config_path, "Path to a key = value config file");
    if (config_required) config_opt->required();
    cmd->add_option("--out", args.out_dir, "Output directory");
    cmd->add_option("--seed", args.seed, "Seed override")->each([&](const std::string&) {
        args.seed_set = true;
    });
    cmd->add_option("--threads", args.threads, "Worker thread cap (0 = auto)");
}

ExperimentConfig load_config(const CommonArgs& args) {
    ExperimentConfig config;
    if (!args.config_path.empty()) {
        config = ExperimentConfig::from_config(KeyValueConfig::parse_file(args.config_path));
    } else {
        config.validate();
    }
    if (args.seed_set) config.seed = args.seed;
    return config;
}

// Precedence: --out, then CODEDLENS_OUT_DIR, then the config value.
fs::path resolve_out_dir(const CommonArgs& args, const ExperimentConfig& config,
                         const std::string& fallback) {
    if (!args.out_dir.empty()) return args.out_dir;
    if (const char* env = std::getenv("CODEDLENS_OUT_DIR"); env && *env) return env;
    if (!config.output_dir.empty()) return config.output_dir;
    return fallback;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mask-based lensless 3D imaging under coded illumination"};
    app.set_version_flag("--version", std::string("codedlens ") + kVersion);
    app.require_subcommand(1);

    CommonArgs sim_args;
    auto* sim_cmd = app.add_subcommand(
        "simulate", "Simulate coded-illumination measurements of a synthetic scene");
    add_common(sim_cmd, sim_args, false);

    CommonArgs rec_args;
    std::string measurements_path;
    auto* rec_cmd =
        app.add_subcommand("reconstruct", "Recover a scene volume from measurements");
    add_common(rec_cmd, rec_args, true);
    rec_cmd->add_option("--measurements", measurements_path, "measurements.llv from simulate")
        ->required();

    CommonArgs study_args;
    std::string study_name;
    auto* study_cmd =
        app.add_subcommand("study", "Run a named multi-condition comparison study");
    add_common(study_cmd, study_args, false);
    study_cmd->add_option("--study", study_name, "Study name")->required();

    CommonArgs eval_args;
    std::string volume_path;
    std::string reference_dir;
    auto* eval_cmd = app.add_subcommand(
        "evaluate", "Depth / image metrics for a reconstructed volume against references");
    add_common(eval_cmd, eval_args, true);
    eval_cmd->add_option("--volume", volume_path, "volume.llv from reconstruct")->required();
    eval_cmd
        ->add_option("--reference", reference_dir,
                     "Directory with reference_depth.llv and reference_image.llv")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim_cmd->parsed()) {
            set_max_threads(sim_args.threads);
            const ExperimentConfig config = load_config(sim_args);
            const fs::path out = resolve_out_dir(sim_args, config, "out/simulate");
            run_simulate(config, out);
            std::cout << "simulate: wrote " << (out / "measurements.llv").string() << "\n";
        } else if (rec_cmd->parsed()) {
            set_max_threads(rec_args.threads);
            const ExperimentConfig config = load_config(rec_args);
            const fs::path out = resolve_out_dir(rec_args, config, "out/reconstruct");
            const auto result = run_reconstruct_file(config, measurements_path, out);
            std::cout << "reconstruct: " << result.report.iterations << " iterations ("
                      << result.report.stop_reason << "), wrote "
                      << (out / "volume.llv").string() << "\n";
        } else if (study_cmd->parsed()) {
            set_max_threads(study_args.threads);
            const ExperimentConfig config = load_config(study_args);
            const fs::path out = resolve_out_dir(study_args, config, "out/study_" + study_name);
            const auto rows = run_study(study_name, config, out);
            for (const auto& row : rows) {
                std::cout << row.condition << ": rmse " << row.depth_rmse_cm << " cm, ssim "
                          << row.ssim << ", " << row.runtime_s << " s\n";
            }
            std::cout << "study: wrote " << (out / "study.csv").string() << "\n";
        } else if (eval_cmd->parsed()) {
            set_max_threads(eval_args.threads);
            const ExperimentConfig config = load_config(eval_args);
            const fs::path out = resolve_out_dir(eval_args, config, "out/evaluate");

            SceneVolume volume;
            volume.planes = read_llv(volume_path);
            volume.depths = config.recon_grid();
            if (volume.plane_count() != config.recon_planes)
                throw ConfigError("evaluate: volume plane count does not match recon_planes");

            const fs::path refs(reference_dir);
            const auto ref_depth_planes = read_llv(refs / "reference_depth.llv");
            const auto ref_image_planes = read_llv(refs / "reference_image.llv");
            if (ref_depth_planes.size() != 1 || ref_image_planes.size() != 1)
                throw IoError("evaluate: reference files must hold a single plane each");
            const SyntheticScene reference =
                scene_from_planes(ref_depth_planes[0], ref_image_planes[0], "reference");

            const MetricReport metrics =
                compute_metrics(volume, reference.reference_depth(), reference.intensity);
            fs::create_directories(out);
            std::vector<std::vector<std::string>> rows;
            auto fmt = [](double v) {
                std::ostringstream s;
                s << std::setprecision(17) << v;
                return s.str();
            };
            rows.push_back({"depth_rmse_cm", fmt(metrics.depth_rmse_cm)});
            rows.push_back({"ssim", fmt(metrics.ssim)});
            for (size_t k = 0; k < metrics.per_plane_rmse_cm.size(); ++k)
                rows.push_back(
                    {"plane_" + std::to_string(k) + "_rmse_cm", fmt(metrics.per_plane_rmse_cm[k])});
            write_csv(out / "metrics.csv", {"metric", "value"}, rows);
            std::cout << "evaluate: depth_rmse_cm " << metrics.depth_rmse_cm << ", ssim "
                      << metrics.ssim << "\n";
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return 0;
}
