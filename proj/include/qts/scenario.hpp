// scenario.hpp: declarative run configuration for the command-line front end.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qts/bases.hpp"
#include "qts/models.hpp"
#include "qts/numkit.hpp"

namespace qts::cli {

inline constexpr int kSchemaVersion = 1;

/// Invalid or incomplete configuration; `field` is the dotted path of the offending key.
struct ConfigError : std::runtime_error {
    ConfigError(std::string field_, const std::string& what)
        : std::runtime_error(field_ + ": " + what), field(std::move(field_)) {}
    std::string field;
};

/// Failure to read inputs or write outputs.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Mode { Master, Trajectory, Ensemble, Timescales, Bloch };

std::string to_string(Mode mode);

struct ModelConfig {
    ModelKind kind = ModelKind::TwoLevel;
    double delta = 0.0;
    double nu = 0.0;
    double temperature = 0.0;
    double coupling = 0.0;
};

struct TimeGridConfig {
    double t_max = 0.0;
    std::size_t points = 0;
    bool log_spacing = false;
    std::optional<double> t_min; // first nonzero time of a log grid; default t_max * 1e-6
};

/// Either a named state ("ground", "thermal", "mixed") or an explicit density
/// matrix in the energy eigenbasis.
struct InitialStateConfig {
    std::string name = "ground";
    std::optional<ComplexMatrix> matrix;
};

struct EnsembleConfig {
    std::size_t count = 1;
    std::uint64_t base_seed = 0;
    std::size_t workers = 1;
};

struct OutputConfig {
    std::string directory = "output";
    std::vector<std::string> formats{"csv", "json", "svg"};

    bool wants(const std::string& format) const;
};

struct ScenarioConfig {
    int version = kSchemaVersion;
    std::string name;
    ModelConfig model;
    BasisKind basis = BasisKind::Eigen;
    InitialStateConfig initial_state;
    TimeGridConfig time_grid;
    Mode mode = Mode::Master;
    EnsembleConfig ensemble;
    OutputConfig output;
};

/// Parses YAML (JSON is accepted as a YAML subset). A document whose root has a
/// `config` key, such as a run manifest, is read from that key.
ScenarioConfig parse_scenario(const std::string& text);
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Normalized configuration with every default filled in; parse_scenario of its
/// dump reproduces the same run.
nlohmann::json to_json(const ScenarioConfig& config);

std::vector<double> make_grid(const TimeGridConfig& grid);
Model build_model(const ModelConfig& config);

/// Initial density matrix in the energy eigenbasis.
ComplexMatrix initial_state(const InitialStateConfig& config, const Model& model);

struct RunResult {
    std::filesystem::path directory;
    std::vector<std::string> files;
    std::vector<std::string> warnings;
};

/// Output directory of a run: output.directory resolved against `output_root`
/// when it is relative.
std::filesystem::path output_directory(const ScenarioConfig& config,
                                       const std::filesystem::path& output_root);

/// Validates everything before touching the file system, then runs the
/// scenario and writes its outputs.
RunResult run_scenario(const ScenarioConfig& config, const std::filesystem::path& output_root);

/// Root for relative output directories: $QTS_OUTPUT_ROOT when set, else the
/// current directory.
std::filesystem::path default_output_root();

std::vector<std::string> preset_names();
/// YAML text of a bundled preset; throws ConfigError for an unknown name.
std::string preset_text(const std::string& name);

} // namespace qts::cli
