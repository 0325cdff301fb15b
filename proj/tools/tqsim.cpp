#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "tqsim/tqsim.hpp"

namespace fs = std::filesystem;

namespace {

// 0 success, 1 config or I/O error, 2 evaluation errors in emitted rows,
// 3 validation-suite failure.
enum ExitCode { kOk = 0, kConfigError = 1, kRowErrors = 2, kValidationFailure = 3 };

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw tqsim::ConfigError("cannot open output file '" + path.string() + "'");
    f << content;
    if (!f) throw tqsim::ConfigError("failed writing '" + path.string() + "'");
}

int run_table(const tqsim::SweepConfig& cfg, const std::string& stem, const fs::path& out_dir,
              int threads, bool json_sidecar) {
    const tqsim::Table table = tqsim::run_sweep(cfg, threads);
    std::ostringstream csv;
    tqsim::write_csv(csv, table, cfg);
    write_file(out_dir / (stem + ".csv"), csv.str());
    if (json_sidecar)
        write_file(out_dir / (stem + ".json"), tqsim::table_json(table, cfg).dump(2) + "\n");
    const int flagged = tqsim::max_flag(table);
    std::cout << "wrote " << (out_dir / (stem + ".csv")).string() << " (" << table.rows.size()
              << " rows)";
    if (json_sidecar) std::cout << " and " << (out_dir / (stem + ".json")).string();
    std::cout << "\n";
    if (flagged >= 2) {
        std::cerr << "warning: some rows carry evaluation errors (flag=2)\n";
        return kRowErrors;
    }
    return kOk;
}

int run_figure(const std::string& name, const tqsim::ParsedConfig* overrides,
               const fs::path& out_dir, int threads, bool json_sidecar) {
    const tqsim::FigureData fig = tqsim::make_figure(name, overrides, threads, json_sidecar);
    std::ostringstream csv;
    tqsim::write_figure_csv(csv, fig);
    write_file(out_dir / (name + ".csv"), csv.str());
    if (json_sidecar)
        write_file(out_dir / (name + ".json"), tqsim::figure_json(fig).dump(2) + "\n");
    write_file(out_dir / (name + "_manifest.json"), fig.manifest.dump(2) + "\n");
    std::cout << "wrote " << (out_dir / (name + ".csv")).string() << " (" << fig.rows.size()
              << " rows) and " << (out_dir / (name + "_manifest.json")).string() << "\n";
    if (fig.flag >= 2) {
        std::cerr << "warning: some rows carry evaluation errors (flag=2)\n";
        return kRowErrors;
    }
    return kOk;
}

int run_validate(std::uint64_t seed) {
    const auto checks = tqsim::run_validation(seed);
    int failures = 0;
    for (const auto& c : checks) {
        std::cout << (c.pass ? "PASS " : "FAIL ") << c.name;
        if (!c.detail.empty()) std::cout << " (" << c.detail << ")";
        std::cout << "\n";
        if (!c.pass) ++failures;
    }
    std::cout << checks.size() - failures << "/" << checks.size() << " checks passed\n";
    return failures == 0 ? kOk : kValidationFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tqsim: dephasing, teleportation and field-estimation toolkit for "
                 "topological qubits in Ohmic-like baths"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".", format = "csv", figure_name;
    int threads = 1;
    std::uint64_t seed = 12345;
    app.add_option("--config", config_path, "key = value config file");
    app.add_option("--out", out_dir, "output directory (created if missing)")
        ->capture_default_str();
    app.add_option("--threads", threads, "worker threads for grid evaluation")
        ->capture_default_str()
        ->check(CLI::Range(1, 256));
    app.add_option("--format", format, "csv, or json for CSV plus a JSON sidecar")
        ->capture_default_str()
        ->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--seed", seed, "seed for the validate subcommand's random draws")
        ->capture_default_str();

    auto* dyn = app.add_subcommand("dynamics", "single trajectory over the time grid");
    auto* swp = app.add_subcommand("sweep", "parameter sweep driven by a config file");
    auto* fig = app.add_subcommand("figure", "reproduce a named figure's data files");
    fig->add_option("name", figure_name, "figure identifier")->required();
    auto* val = app.add_subcommand("validate", "run the built-in property suite");
    for (CLI::App* sub : {dyn, swp, fig, val}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (*val) return run_validate(seed);

        tqsim::ParsedConfig pc;
        const bool has_cfg = !config_path.empty();
        if (has_cfg) {
            std::ifstream f(config_path);
            if (!f) throw tqsim::ConfigError("cannot open config file '" + config_path + "'");
            pc = tqsim::parse_config(f);
        }
        fs::create_directories(out_dir);
        const bool json_sidecar = (format == "json");

        if (*dyn) {
            if (!pc.cfg.axes.empty())
                throw tqsim::ConfigError("dynamics takes no sweep axes; use the sweep subcommand");
            tqsim::SweepConfig cfg = pc.cfg;
            if (!has_cfg) cfg.fixed = tqsim::default_parameters();
            if (!pc.has_outputs) cfg.outputs = tqsim::output_names();
            cfg.validate();
            return run_table(cfg, "dynamics", out_dir, threads, json_sidecar);
        }
        if (*swp) {
            if (!has_cfg) throw tqsim::ConfigError("sweep requires --config");
            if (!pc.has_outputs)
                throw tqsim::ConfigError("sweep config must list outputs = ...");
            return run_table(pc.cfg, "sweep", out_dir, threads, json_sidecar);
        }
        if (*fig)
            return run_figure(figure_name, has_cfg ? &pc : nullptr, out_dir, threads,
                              json_sidecar);
    } catch (const tqsim::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    }
    return kOk;
}
