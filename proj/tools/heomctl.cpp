// heomctl - command-line front end for the HEOM simulator
//
// Exit status: 0 ok, 1 usage or I/O failure, 2 configuration error,
// 3 numerical failure, 4 capacity (size limit) error.

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "heom/errors.hpp"
#include "heom/pipeline.hpp"

namespace {

enum Exit { ok = 0, usage = 1, config = 2, numerical = 3, capacity = 4 };

struct Args {
    std::string config;
    std::string out{"out"};
    int threads{0};
    bool witness{false};
    std::string param;
    std::vector<double> values;
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Driven two-level system in a bosonic bath: HEOM propagation, witnesses, optimal control"};
    app.require_subcommand(1);
    Args a;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config,-c", a.config, "Run configuration (TOML)")->required()->check(CLI::ExistingFile);
        sub->add_option("--out,-o", a.out, "Output directory")->capture_default_str();
        sub->add_option("--threads", a.threads, "Worker threads (0 = runtime default)")->check(CLI::NonNegativeNumber);
        sub->add_flag("--witness", a.witness, "Attach the witness suite to the run");
    };

    auto* run = app.add_subcommand("run", "Run the mode named in [run] mode");
    auto* prop = app.add_subcommand("propagate", "Propagate the hierarchy and write trajectory.csv");
    auto* wit = app.add_subcommand("witness", "Propagation plus map reconstruction and witnesses");
    auto* opt = app.add_subcommand("optimize", "Monotonic optimal control of the field");
    auto* scan = app.add_subcommand("scan", "Summary table over one parameter");
    auto* corr = app.add_subcommand("correlation", "Export the bath correlation function");
    auto* conv = app.add_subcommand("convergence", "Hierarchy-level convergence table");
    for (auto* s : {run, prop, wit, opt, scan, corr, conv}) add_common(s);
    scan->add_option("--param", a.param, "heom_level | matsubara | dipole_offdiag | amp_cap");
    scan->add_option("--values", a.values, "Scan values")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? ok : usage;
    }

    try {
        const auto cfg = heom::load_config(a.config);
        heom::RunMode mode = cfg.mode;
        if (prop->parsed()) mode = heom::RunMode::propagate;
        if (wit->parsed()) mode = heom::RunMode::witness;
        if (opt->parsed()) mode = heom::RunMode::optimize;
        if (scan->parsed()) mode = heom::RunMode::scan;
        if (corr->parsed()) mode = heom::RunMode::correlation;
        if (conv->parsed()) mode = heom::RunMode::convergence;

        heom::RunOptions ro;
        ro.out_dir = a.out;
        ro.threads = a.threads;
        ro.witness = a.witness;
        if (scan->parsed()) {
            if (scan->count("--param")) ro.scan_parameter = a.param;
            if (scan->count("--values")) ro.scan_values = a.values;
        }
        const auto manifest = heom::run_pipeline(cfg, mode, ro);
        std::cout << "wrote";
        for (const auto& f : manifest["outputs"]) std::cout << ' ' << f.get<std::string>();
        std::cout << " manifest.json to " << ro.out_dir.string() << "\n";
        return ok;
    } catch (const heom::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return config;
    } catch (const heom::CapacityError& e) {
        std::cerr << "capacity error: " << e.what() << "\n";
        return capacity;
    } catch (const heom::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return numerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return usage;
    }
}
