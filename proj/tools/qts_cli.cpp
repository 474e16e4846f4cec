// qts: run scenario configs, compare result tables, and run bundled presets.
//
// Exit codes: 0 success, 1 compare threshold exceeded, 2 config or schema error,
// 3 numerical failure, 4 I/O error.

#include <cstdio>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "qts/report.hpp"
#include "qts/scenario.hpp"

namespace fs = std::filesystem;
using namespace qts::cli;

namespace {

enum Exit { kOk = 0, kThreshold = 1, kConfig = 2, kNumerical = 3, kIo = 4 };

int run_config(const ScenarioConfig& config, const fs::path& root) {
    const auto result = run_scenario(config, root);
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
    std::cout << "wrote " << result.files.size() << " files to " << result.directory.string() << '\n';
    for (const auto& f : result.files) std::cout << "  " << f << '\n';
    return kOk;
}

template <class Fn>
int guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const SchemaMismatch& e) {
        std::cerr << "schema mismatch: " << e.what() << '\n';
        return kConfig;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return kIo;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return kIo;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lindblad dynamics, quantum trajectories and timescales for near-degenerate systems"};
    app.require_subcommand(1);

    std::string output_root;
    auto* run = app.add_subcommand("run", "Run a scenario config (YAML, or a run manifest)");
    std::string config_path;
    run->add_option("config", config_path, "Scenario file")->required();
    run->add_option("--output-root", output_root, "Root for relative output directories");

    auto* compare = app.add_subcommand("compare", "Compare two observables CSV files");
    std::string csv_a, csv_b;
    double tol = 5e-3;
    compare->add_option("a", csv_a, "First CSV")->required();
    compare->add_option("b", csv_b, "Second CSV")->required();
    compare->add_option("--tol", tol, "Max-abs threshold for columns without standard errors")
        ->capture_default_str();

    auto* presets = app.add_subcommand("presets", "Bundled figure scenarios");
    presets->require_subcommand(1);
    auto* list = presets->add_subcommand("list", "List preset names");
    auto* preset_run = presets->add_subcommand("run", "Run a preset");
    std::string preset_name;
    preset_run->add_option("name", preset_name, "Preset name")->required();
    preset_run->add_option("--output-root", output_root, "Root for relative output directories");
    auto* show = presets->add_subcommand("show", "Print a preset's YAML");
    show->add_option("name", preset_name, "Preset name")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    const auto root = [&] { return output_root.empty() ? default_output_root() : fs::path(output_root); };

    if (*run) {
        return guarded([&] { return run_config(load_scenario(config_path), root()); });
    }
    if (*compare) {
        return guarded([&] {
            const auto report = compare_tables(read_csv(csv_a), read_csv(csv_b), tol);
            std::cout << report.to_text();
            return report.passed() ? kOk : kThreshold;
        });
    }
    if (*list) {
        for (const auto& name : preset_names()) std::cout << name << '\n';
        return kOk;
    }
    if (*show) {
        return guarded([&] {
            std::cout << preset_text(preset_name);
            return kOk;
        });
    }
    if (*preset_run) {
        return guarded([&] { return run_config(parse_scenario(preset_text(preset_name)), root()); });
    }
    return kConfig;
}
