// Command-line front end for the mmWave user-association simulator.

#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mmwave/run.hpp"

int main(int argc, char** argv) {
    CLI::App app{"mmWave multi-connectivity user-association simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::string schemes_arg;
    std::string out_path;
    long iteration = 0;
    std::int64_t seed = -1;
    long iterations = -1;
    int workers = 0;
    std::vector<std::string> grid_specs;
    std::vector<double> beamwidths{5.0, 10.0, 15.0};

    const auto overrides = [&]() {
        mmwave::RunOverrides o;
        if (!schemes_arg.empty()) {
            std::stringstream ss(schemes_arg);
            std::string name;
            while (std::getline(ss, name, ','))
                if (!name.empty()) o.schemes.push_back(name);
        }
        if (seed >= 0) o.seed = static_cast<std::uint64_t>(seed);
        if (iterations >= 0) o.iterations = iterations;
        if (workers > 0) o.workers = workers;
        return o;
    };

    auto* run = app.add_subcommand("run", "run the configured experiment and write metrics");
    run->add_option("config", config_path, "JSON config file")->required();
    run->add_option("--out-dir", out_dir, "output directory");
    run->add_option("--schemes", schemes_arg, "comma-separated schemes (optimal,beam-align,snr-1,snr-dynamic)");
    run->add_option("--seed", seed, "override the config seed");
    run->add_option("--iterations", iterations, "override the iteration count");
    run->add_option("--workers", workers, "parallel iteration workers");
    run->callback([&]() { std::exit(mmwave::cmd_run(config_path, out_dir, overrides())); });

    auto* sweep = app.add_subcommand("sweep", "cartesian sweep over config axes");
    sweep->add_option("config", config_path, "JSON config file")->required();
    sweep->add_option("--grid", grid_specs,
                      "axis spec key=v1,v2,... (repeatable; axes: lambda_u, theta_b_deg, "
                      "theta_u_deg, s, rain_r)")
        ->required();
    sweep->add_option("--out-dir", out_dir, "output directory");
    sweep->add_option("--schemes", schemes_arg, "comma-separated schemes");
    sweep->add_option("--seed", seed, "override the config seed");
    sweep->add_option("--iterations", iterations, "override the iteration count");
    sweep->add_option("--workers", workers, "parallel iteration workers");
    sweep->callback(
        [&]() { std::exit(mmwave::cmd_sweep(config_path, grid_specs, out_dir, overrides())); });

    auto* export_lp = app.add_subcommand("export-lp", "write one iteration's association MILP");
    export_lp->add_option("config", config_path, "JSON config file")->required();
    export_lp->add_option("--iteration", iteration, "iteration index to realize");
    export_lp->add_option("--out", out_path, "LP output file")->required();
    export_lp->callback([&]() { std::exit(mmwave::cmd_export_lp(config_path, iteration, out_path)); });

    std::vector<double> lambda_grid;
    auto* calibrate =
        app.add_subcommand("calibrate", "derive beam-align thresholds from optimal runs");
    calibrate->add_option("config", config_path, "JSON config file")->required();
    calibrate->add_option("--out", out_path, "threshold table output file")->required();
    calibrate->add_option("--beamwidths", beamwidths, "BS beamwidths to calibrate (degrees)");
    calibrate->add_option("--lambda-grid", lambda_grid,
                          "user densities to pool (defaults to the config value)");
    calibrate->callback([&]() {
        std::exit(mmwave::cmd_calibrate(config_path, out_path, beamwidths, lambda_grid));
    });

    CLI11_PARSE(app, argc, argv);
    return 0;
}
