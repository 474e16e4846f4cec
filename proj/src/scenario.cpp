#include "qts/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "qts/analytic.hpp"
#include "qts/master.hpp"
#include "qts/report.hpp"
#include "qts/svg.hpp"
#include "qts/trajectories.hpp"

#ifndef QTS_VERSION
#define QTS_VERSION "0.0.0"
#endif

namespace qts::cli {

namespace detail {
// Generated at build time from scenarios/*.yaml.
const std::vector<std::pair<std::string, std::string>>& bundled_presets();
} // namespace detail

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---- parsing ----------------------------------------------------------------

std::string join(const std::string& parent, const std::string& key) {
    return parent.empty() ? key : parent + "." + key;
}

void require_map(const YAML::Node& node, const std::string& field) {
    if (!node.IsMap()) throw ConfigError(field, "expected a mapping");
}

void reject_unknown(const YAML::Node& node, const std::string& field, const std::set<std::string>& allowed) {
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (!allowed.count(key)) throw ConfigError(join(field, key), "unknown key");
    }
}

template <class T>
T scalar(const YAML::Node& node, const std::string& field, const char* expected) {
    if (!node.IsScalar()) throw ConfigError(field, std::string("expected ") + expected);
    try {
        return node.as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError(field, std::string("expected ") + expected + ", got '" + node.Scalar() + "'");
    }
}

double number(const YAML::Node& node, const std::string& field) {
    const double v = scalar<double>(node, field, "a number");
    if (!std::isfinite(v)) throw ConfigError(field, "must be finite");
    return v;
}

double required_number(const YAML::Node& map, const std::string& parent, const std::string& key) {
    if (!map[key]) throw ConfigError(join(parent, key), "missing");
    return number(map[key], join(parent, key));
}

std::size_t count_value(const YAML::Node& node, const std::string& field) {
    const auto v = scalar<long long>(node, field, "an integer");
    if (v < 0) throw ConfigError(field, "must be non-negative");
    return static_cast<std::size_t>(v);
}

cplx complex_entry(const YAML::Node& node, const std::string& field) {
    if (node.IsSequence()) {
        if (node.size() != 2) throw ConfigError(field, "complex entries are [re, im]");
        return {number(node[0], field), number(node[1], field)};
    }
    return {number(node, field), 0.0};
}

ModelConfig parse_model(const YAML::Node& node) {
    const std::string f = "model";
    if (!node) throw ConfigError(f, "missing");
    require_map(node, f);
    reject_unknown(node, f, {"kind", "delta", "nu", "temperature", "coupling"});
    ModelConfig m;
    if (!node["kind"]) throw ConfigError("model.kind", "missing (two_level or v_model)");
    const auto kind = scalar<std::string>(node["kind"], "model.kind", "a string");
    if (kind == "two_level") {
        m.kind = ModelKind::TwoLevel;
        if (node["nu"]) throw ConfigError("model.nu", "only used by v_model");
    } else if (kind == "v_model") {
        m.kind = ModelKind::VModel;
        m.nu = required_number(node, f, "nu");
        if (!(m.nu > 0.0)) throw ConfigError("model.nu", "must be positive");
    } else {
        throw ConfigError("model.kind", "expected two_level or v_model, got '" + kind + "'");
    }
    m.delta = required_number(node, f, "delta");
    m.temperature = required_number(node, f, "temperature");
    m.coupling = required_number(node, f, "coupling");
    if (!(m.delta > 0.0)) throw ConfigError("model.delta", "must be positive");
    if (!(m.temperature > 0.0)) throw ConfigError("model.temperature", "must be positive");
    if (!(m.coupling > 0.0)) throw ConfigError("model.coupling", "must be positive");
    if (m.kind == ModelKind::VModel && !(m.delta < m.nu)) {
        throw ConfigError("model.delta", "must be smaller than nu");
    }
    return m;
}

TimeGridConfig parse_grid(const YAML::Node& node) {
    const std::string f = "timeGrid";
    require_map(node, f);
    reject_unknown(node, f, {"t_max", "points", "spacing", "t_min"});
    TimeGridConfig g;
    g.t_max = required_number(node, f, "t_max");
    if (!(g.t_max > 0.0)) throw ConfigError("timeGrid.t_max", "must be positive");
    if (!node["points"]) throw ConfigError("timeGrid.points", "missing");
    g.points = count_value(node["points"], "timeGrid.points");
    if (g.points < 2) throw ConfigError("timeGrid.points", "must be at least 2");
    if (node["spacing"]) {
        const auto s = scalar<std::string>(node["spacing"], "timeGrid.spacing", "a string");
        if (s == "log") g.log_spacing = true;
        else if (s != "linear") throw ConfigError("timeGrid.spacing", "expected linear or log");
    }
    if (node["t_min"]) {
        g.t_min = number(node["t_min"], "timeGrid.t_min");
        if (!g.log_spacing) throw ConfigError("timeGrid.t_min", "only used with log spacing");
        if (!(*g.t_min > 0.0 && *g.t_min < g.t_max)) {
            throw ConfigError("timeGrid.t_min", "must lie in (0, t_max)");
        }
    }
    return g;
}

InitialStateConfig parse_initial(const YAML::Node& node) {
    const std::string f = "initialState";
    InitialStateConfig s;
    if (node.IsScalar()) {
        s.name = node.as<std::string>();
    } else if (node.IsMap()) {
        reject_unknown(node, f, {"name", "matrix"});
        if (node["name"] && node["matrix"]) throw ConfigError(f, "give either name or matrix");
        if (node["name"]) s.name = scalar<std::string>(node["name"], "initialState.name", "a string");
        if (node["matrix"]) {
            const auto rows = node["matrix"];
            const std::string mf = "initialState.matrix";
            if (!rows.IsSequence() || rows.size() == 0) throw ConfigError(mf, "expected a list of rows");
            const std::size_t d = rows.size();
            ComplexMatrix rho(d, d);
            for (std::size_t i = 0; i < d; ++i) {
                if (!rows[i].IsSequence() || rows[i].size() != d) throw ConfigError(mf, "matrix must be square");
                for (std::size_t j = 0; j < d; ++j) rho(i, j) = complex_entry(rows[i][j], mf);
            }
            s.name = "matrix";
            s.matrix = std::move(rho);
        }
    } else {
        throw ConfigError(f, "expected a state name or a mapping with a matrix");
    }
    if (!s.matrix && s.name != "ground" && s.name != "thermal" && s.name != "mixed") {
        throw ConfigError(f, "unknown state '" + s.name + "' (ground, thermal, mixed or matrix)");
    }
    return s;
}

Mode parse_mode(const YAML::Node& node) {
    const auto m = scalar<std::string>(node, "mode", "a string");
    if (m == "master") return Mode::Master;
    if (m == "trajectory") return Mode::Trajectory;
    if (m == "ensemble") return Mode::Ensemble;
    if (m == "timescales") return Mode::Timescales;
    if (m == "bloch") return Mode::Bloch;
    throw ConfigError("mode", "expected master, trajectory, ensemble, timescales or bloch, got '" + m + "'");
}

EnsembleConfig parse_ensemble(const YAML::Node& node) {
    const std::string f = "ensemble";
    require_map(node, f);
    reject_unknown(node, f, {"count", "baseSeed", "workers"});
    EnsembleConfig e;
    if (node["count"]) e.count = count_value(node["count"], "ensemble.count");
    if (node["baseSeed"]) e.base_seed = scalar<std::uint64_t>(node["baseSeed"], "ensemble.baseSeed", "an unsigned integer");
    if (node["workers"]) e.workers = count_value(node["workers"], "ensemble.workers");
    if (e.count < 1) throw ConfigError("ensemble.count", "must be at least 1");
    if (e.workers < 1) throw ConfigError("ensemble.workers", "must be at least 1");
    return e;
}

OutputConfig parse_output(const YAML::Node& node) {
    const std::string f = "output";
    require_map(node, f);
    reject_unknown(node, f, {"directory", "formats"});
    OutputConfig o;
    if (node["directory"]) o.directory = scalar<std::string>(node["directory"], "output.directory", "a path");
    if (o.directory.empty()) throw ConfigError("output.directory", "must not be empty");
    if (node["formats"]) {
        const auto list = node["formats"];
        if (!list.IsSequence()) throw ConfigError("output.formats", "expected a list");
        o.formats.clear();
        for (const auto& item : list) {
            const auto name = scalar<std::string>(item, "output.formats", "a string");
            if (name != "csv" && name != "json" && name != "svg") {
                throw ConfigError("output.formats", "unknown format '" + name + "' (csv, json, svg)");
            }
            o.formats.push_back(name);
        }
    }
    return o;
}

ScenarioConfig parse_root(const YAML::Node& root) {
    if (!root.IsMap()) throw ConfigError("<root>", "expected a mapping");
    if (root["config"]) return parse_root(root["config"]);
    reject_unknown(root, "", {"version", "name", "model", "basis", "initialState", "timeGrid", "mode",
                              "ensemble", "output"});
    ScenarioConfig c;
    if (root["version"]) {
        c.version = scalar<int>(root["version"], "version", "an integer");
        if (c.version != kSchemaVersion) {
            throw ConfigError("version", "unsupported schema version " + std::to_string(c.version));
        }
    }
    if (root["name"]) c.name = scalar<std::string>(root["name"], "name", "a string");
    c.model = parse_model(root["model"]);
    if (root["basis"]) {
        const auto b = scalar<std::string>(root["basis"], "basis", "a string");
        try {
            c.basis = basis_from_string(b);
        } catch (const std::exception&) {
            throw ConfigError("basis", "expected eigen, decoherence or pm, got '" + b + "'");
        }
    }
    if (root["initialState"]) c.initial_state = parse_initial(root["initialState"]);
    if (root["mode"]) c.mode = parse_mode(root["mode"]);
    if (root["timeGrid"]) {
        c.time_grid = parse_grid(root["timeGrid"]);
    } else if (c.mode != Mode::Timescales) {
        throw ConfigError("timeGrid", "missing");
    }
    if (root["ensemble"]) c.ensemble = parse_ensemble(root["ensemble"]);
    if (root["output"]) c.output = parse_output(root["output"]);

    if (c.basis == BasisKind::PlusMinus && c.model.kind != ModelKind::VModel) {
        throw ConfigError("basis", "pm is defined for the V model only");
    }
    if (c.basis == BasisKind::Decoherence && c.model.kind != ModelKind::TwoLevel) {
        throw ConfigError("basis", "the V-model collapse operators share no decoherence basis");
    }
    if (c.mode == Mode::Bloch && (c.model.kind != ModelKind::TwoLevel || c.basis != BasisKind::Decoherence)) {
        throw ConfigError("mode", "bloch needs the two_level model in the decoherence basis");
    }
    return c;
}

// ---- running ----------------------------------------------------------------

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                          "#8c564b", "#e377c2", "#7f7f7f", "#17becf"};

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

json matrix_json(const ComplexMatrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(complex_json(m(i, j)));
        rows.push_back(row);
    }
    return rows;
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

CsvTable states_table(const std::vector<double>& grid, const std::vector<ComplexMatrix>& states) {
    CsvTable t;
    t.header = {"t"};
    const auto names = observable_names(states.front().rows());
    t.header.insert(t.header.end(), names.begin(), names.end());
    std::vector<double> obs;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        observables_into(states[g], obs);
        std::vector<double> row{grid[g]};
        row.insert(row.end(), obs.begin(), obs.end());
        t.rows.push_back(std::move(row));
    }
    return t;
}

bool plotted(const std::string& name) {
    // populations and real coherence parts, as in the figures
    return name != "t" && name != "jump_flag" && (name.find("_re") != std::string::npos ||
                                                  name.size() == 6);
}

void add_series(Plot& plot, const CsvTable& table, bool dashed, const std::string& suffix) {
    const std::size_t tc = table.column("t");
    std::size_t color = 0;
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        const auto& name = table.header[c];
        if (!plotted(name) || name.find("_se") != std::string::npos) continue;
        Series s;
        s.label = name + suffix;
        s.dashed = dashed;
        s.color = dashed ? "black" : kPalette[color % std::size(kPalette)];
        ++color;
        bool any = false;
        for (const auto& row : table.rows) {
            s.x.push_back(row[tc]);
            s.y.push_back(row[c]);
            any = any || std::isfinite(row[c]);
        }
        if (any) plot.series.push_back(std::move(s));
    }
}

struct Context {
    const ScenarioConfig& config;
    Model model;
    BasisTransform basis;
    std::vector<double> grid;
    ComplexMatrix rho0;       // energy eigenbasis
    ComplexMatrix rho0_basis; // scenario basis
    fs::path dir;
    std::vector<std::string> files;
    json manifest;

    void csv(const std::string& name, const CsvTable& t) {
        if (!config.output.wants("csv")) return;
        write_csv(dir / name, t);
        files.push_back(name);
    }
    void svg(const std::string& name, const Plot& p) {
        if (!config.output.wants("svg")) return;
        write_svg(dir / name, p);
        files.push_back(name);
    }
    void json_file(const std::string& name, const json& j) {
        if (!config.output.wants("json")) return;
        std::ofstream os(dir / name, std::ios::binary);
        if (!os) throw IoError("cannot open " + (dir / name).string() + " for writing");
        os << j.dump(2) << '\n';
        if (!os) throw IoError("failed writing " + (dir / name).string());
        files.push_back(name);
    }
};

std::vector<Marker> timescale_markers(const Model& model, BasisKind basis) {
    const auto a = analytic::describe(model, basis);
    return {{a.tau2, "tau2"}, {a.tau1, "tau1"}};
}

json analytic_timescales(const Model& model, BasisKind basis) {
    const auto a = analytic::describe(model, basis);
    return {{"tau1", a.tau1}, {"tau2", a.tau2}, {"validity", a.validity_note}};
}

json report_json(const TimescaleReport& r) { return json::parse(to_json(r)); }

bool ground_start(const ScenarioConfig& c) { return !c.initial_state.matrix && c.initial_state.name == "ground"; }

void run_master(Context& cx) {
    const Liouvillian l = assemble(cx.model, cx.basis);
    const Propagator prop(l);
    const auto states = prop.evolve(cx.rho0_basis, cx.grid);
    const CsvTable numeric = states_table(cx.grid, states);
    cx.csv("observables.csv", numeric);

    Plot plot;
    plot.title = cx.model.label + ", " + to_string(cx.config.basis) + " basis";
    plot.y_label = "density-matrix element";
    plot.log_x = cx.config.time_grid.log_spacing;
    add_series(plot, numeric, false, "");

    std::optional<std::vector<ComplexMatrix>> closed;
    if (ground_start(cx.config)) closed = analytic::closed_form_states(cx.model, cx.config.basis, cx.grid);
    if (closed) {
        const CsvTable exact = states_table(cx.grid, *closed);
        cx.csv("analytic.csv", exact);
        add_series(plot, exact, true, " (analytic)");
    }
    plot.markers = timescale_markers(cx.model, cx.config.basis);
    cx.svg("plot.svg", plot);

    cx.manifest["propagator"] = prop.uses_fallback() ? "rk4" : "spectral";
    cx.manifest["timescales"] = report_json(timescales(l, cx.rho0_basis));
    cx.manifest["analytic"] = analytic_timescales(cx.model, cx.config.basis);
    cx.manifest["analytic"]["closed_form"] = closed.has_value();
}

void run_trajectory(Context& cx) {
    const TrajectorySampler sampler(cx.model, cx.basis);
    const auto& e = cx.config.ensemble;
    std::vector<TrajectoryRecord> records(e.count);
    parallel_for(e.count, e.workers, [&](std::size_t i) {
        records[i] = sampler.sample(cx.rho0_basis, cx.grid, derive_seed(e.base_seed, i));
    });
    json seeds = json::array();
    Plot plot;
    plot.title = cx.model.label + " trajectory, " + to_string(cx.config.basis) + " basis";
    plot.y_label = "conditioned density-matrix element";
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& rec = records[i];
        CsvTable t = states_table(rec.grid, rec.states);
        t.header.push_back("jump_flag");
        std::size_t next = 0;
        for (std::size_t g = 0; g < rec.grid.size(); ++g) {
            bool flag = false;
            while (next < rec.jumps.size() && rec.jumps[next].time <= rec.grid[g]) {
                flag = true;
                ++next;
            }
            t.rows[g].push_back(flag ? 1.0 : 0.0);
        }
        const std::string stem = "trajectory_" + std::to_string(i);
        cx.csv(stem + ".csv", t);
        json jumps = json::array();
        for (const auto& j : rec.jumps) jumps.push_back({{"time", j.time}, {"channel", j.channel}});
        cx.json_file(stem + ".json", {{"index", i},
                                      {"seed", rec.seed},
                                      {"generator", rec.generator},
                                      {"channels", sampler.model().channel_names},
                                      {"jumps", jumps}});
        seeds.push_back(rec.seed);
        if (i == 0) add_series(plot, t, false, "");
    }
    plot.markers = timescale_markers(cx.model, cx.config.basis);
    cx.svg("plot.svg", plot);
    cx.manifest["random"]["seeds"] = seeds;
}

void run_ensemble(Context& cx) {
    const auto& e = cx.config.ensemble;
    const auto summary = ensemble_average(cx.model, cx.basis, cx.rho0_basis, cx.grid, e.count, e.base_seed, e.workers);
    CsvTable t;
    t.header = {"t"};
    t.header.insert(t.header.end(), summary.names.begin(), summary.names.end());
    for (const auto& n : summary.names) t.header.push_back(n + "_se");
    for (std::size_t g = 0; g < summary.grid.size(); ++g) {
        std::vector<double> row{summary.grid[g]};
        row.insert(row.end(), summary.mean[g].begin(), summary.mean[g].end());
        row.insert(row.end(), summary.std_error[g].begin(), summary.std_error[g].end());
        t.rows.push_back(std::move(row));
    }
    cx.csv("ensemble.csv", t);

    const Liouvillian l = assemble(cx.model, cx.basis);
    const CsvTable reference = states_table(cx.grid, Propagator(l).evolve(cx.rho0_basis, cx.grid));
    cx.csv("master.csv", reference);

    Plot plot;
    plot.title = cx.model.label + ", mean of " + std::to_string(e.count) + " trajectories";
    plot.y_label = "density-matrix element";
    add_series(plot, t, false, "");
    add_series(plot, reference, true, " (master)");
    plot.markers = timescale_markers(cx.model, cx.config.basis);
    cx.svg("plot.svg", plot);

    double total = 0.0;
    for (auto n : summary.jump_counts) total += static_cast<double>(n);
    cx.manifest["ensemble"] = {{"count", summary.count},
                               {"mean_jumps_per_trajectory", total / static_cast<double>(summary.count)}};
}

void run_timescales(Context& cx) {
    const Liouvillian l = assemble(cx.model, cx.basis);
    json out = report_json(timescales(l, cx.rho0_basis));
    const auto pert = perturbative_slow_eigenvalue(cx.model);
    out["perturbative"] = {{"first_order", complex_json(pert.first_order)},
                           {"second_order", complex_json(pert.second_order)},
                           {"value", complex_json(pert.value)},
                           {"tau1", finite_or_null(-1.0 / pert.value.real())}};
    out["analytic"] = analytic_timescales(cx.model, cx.config.basis);
    cx.json_file("timescales.json", out);
    cx.manifest["timescales"] = out;
}

void run_bloch(Context& cx) {
    const TrajectorySampler sampler(cx.model, cx.basis);
    const auto seed = derive_seed(cx.config.ensemble.base_seed, 0);
    const auto rec = sampler.sample(cx.rho0_basis, cx.grid, seed);
    CsvTable t;
    t.header = {"t", "sx", "sy", "sz", "jump_flag"};
    std::size_t next = 0;
    for (std::size_t g = 0; g < rec.grid.size(); ++g) {
        const auto b = bloch_map(rec.states[g]);
        bool flag = false;
        while (next < rec.jumps.size() && rec.jumps[next].time <= rec.grid[g]) {
            flag = true;
            ++next;
        }
        t.rows.push_back({rec.grid[g], b.sx, b.sy, b.sz, flag ? 1.0 : 0.0});
    }
    cx.csv("bloch.csv", t);

    const auto states = Propagator(assemble(cx.model, cx.basis)).evolve(cx.rho0_basis, cx.grid);
    CsvTable m;
    m.header = {"t", "sx", "sy", "sz"};
    for (std::size_t g = 0; g < cx.grid.size(); ++g) {
        const auto b = bloch_map(states[g]);
        m.rows.push_back({cx.grid[g], b.sx, b.sy, b.sz});
    }
    cx.csv("bloch_master.csv", m);

    Plot plot;
    plot.title = "Bloch components, decoherence basis";
    plot.y_label = "s";
    for (std::size_t c = 1; c <= 3; ++c) {
        Series s{t.header[c], {}, {}, false, kPalette[c - 1]};
        Series d{m.header[c] + " (master)", {}, {}, true, "black"};
        for (const auto& row : t.rows) { s.x.push_back(row[0]); s.y.push_back(row[c]); }
        for (const auto& row : m.rows) { d.x.push_back(row[0]); d.y.push_back(row[c]); }
        plot.series.push_back(std::move(s));
        plot.series.push_back(std::move(d));
    }
    plot.markers = timescale_markers(cx.model, cx.config.basis);
    cx.svg("plot.svg", plot);

    const auto omega = drive_vector(sampler.model());
    cx.manifest["drive_vector"] = {omega.sx, omega.sy, omega.sz};
    cx.manifest["random"]["seeds"] = {seed};
    cx.manifest["jumps"] = rec.jumps.size();
}

} // namespace

std::string to_string(Mode mode) {
    switch (mode) {
    case Mode::Master: return "master";
    case Mode::Trajectory: return "trajectory";
    case Mode::Ensemble: return "ensemble";
    case Mode::Timescales: return "timescales";
    case Mode::Bloch: return "bloch";
    }
    return "unknown";
}

bool OutputConfig::wants(const std::string& format) const {
    return std::find(formats.begin(), formats.end(), format) != formats.end();
}

ScenarioConfig parse_scenario(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ConfigError("<document>", std::string("YAML syntax error: ") + e.what());
    }
    if (!root || root.IsNull()) throw ConfigError("model", "missing (empty document)");
    return parse_root(root);
}

ScenarioConfig load_scenario(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot read config " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_scenario(ss.str());
}

json to_json(const ScenarioConfig& c) {
    json model = {{"kind", c.model.kind == ModelKind::TwoLevel ? "two_level" : "v_model"},
                  {"delta", c.model.delta},
                  {"temperature", c.model.temperature},
                  {"coupling", c.model.coupling}};
    if (c.model.kind == ModelKind::VModel) model["nu"] = c.model.nu;
    json initial = c.initial_state.matrix ? json{{"matrix", matrix_json(*c.initial_state.matrix)}}
                                          : json(c.initial_state.name);
    json j = {{"version", c.version},
              {"name", c.name},
              {"model", model},
              {"basis", to_string(c.basis)},
              {"initialState", initial},
              {"mode", to_string(c.mode)},
              {"ensemble", {{"count", c.ensemble.count}, {"baseSeed", c.ensemble.base_seed}, {"workers", c.ensemble.workers}}},
              {"output", {{"directory", c.output.directory}, {"formats", c.output.formats}}}};
    if (c.time_grid.points >= 2) {
        j["timeGrid"] = {{"t_max", c.time_grid.t_max},
                         {"points", c.time_grid.points},
                         {"spacing", c.time_grid.log_spacing ? "log" : "linear"}};
        if (c.time_grid.t_min) j["timeGrid"]["t_min"] = *c.time_grid.t_min;
    }
    return j;
}

std::vector<double> make_grid(const TimeGridConfig& g) {
    if (!(g.t_max > 0.0) || g.points < 2) throw std::invalid_argument("make_grid: need t_max > 0 and points >= 2");
    std::vector<double> grid(g.points);
    if (!g.log_spacing) {
        for (std::size_t i = 0; i < g.points; ++i)
            grid[i] = g.t_max * static_cast<double>(i) / static_cast<double>(g.points - 1);
        grid.back() = g.t_max;
        return grid;
    }
    // t = 0 followed by points - 1 logarithmically spaced times ending at t_max
    grid[0] = 0.0;
    const double lo = std::log(g.t_min.value_or(g.t_max * 1e-6));
    const double hi = std::log(g.t_max);
    const std::size_t n = g.points - 1;
    for (std::size_t i = 0; i < n; ++i) {
        const double u = n == 1 ? 1.0 : static_cast<double>(i) / static_cast<double>(n - 1);
        grid[i + 1] = std::exp(lo + u * (hi - lo));
    }
    grid.back() = g.t_max;
    return grid;
}

Model build_model(const ModelConfig& m) {
    const BathSpec bath{m.coupling, m.temperature};
    try {
        if (m.kind == ModelKind::TwoLevel) return build_two_level(m.delta, bath);
        return build_v_model(m.nu, m.delta, bath);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("model", e.what());
    } catch (const std::domain_error& e) {
        throw ConfigError("model", e.what());
    }
}

ComplexMatrix initial_state(const InitialStateConfig& s, const Model& model) {
    if (s.matrix) {
        if (s.matrix->rows() != model.dimension) {
            throw ConfigError("initialState.matrix", "expected a " + std::to_string(model.dimension) + "x" +
                                                         std::to_string(model.dimension) + " matrix");
        }
        try {
            validate_state(*s.matrix, 1e-10);
        } catch (const std::invalid_argument& e) {
            throw ConfigError("initialState.matrix", e.what());
        }
        return *s.matrix;
    }
    if (s.name == "ground") return ground_state(model);
    if (s.name == "thermal") return thermal_state(model);
    if (s.name == "mixed") {
        ComplexMatrix rho = ComplexMatrix::identity(model.dimension);
        rho *= 1.0 / static_cast<double>(model.dimension);
        return rho;
    }
    throw ConfigError("initialState", "unknown state '" + s.name + "'");
}

fs::path output_directory(const ScenarioConfig& config, const fs::path& output_root) {
    const fs::path dir(config.output.directory);
    return dir.is_absolute() ? dir : output_root / dir;
}

fs::path default_output_root() {
    if (const char* env = std::getenv("QTS_OUTPUT_ROOT"); env && *env) return fs::path(env);
    return fs::current_path();
}

RunResult run_scenario(const ScenarioConfig& config, const fs::path& output_root) {
    // Everything that can reject the configuration happens before any output exists.
    Model model = build_model(config.model);
    BasisTransform basis;
    try {
        basis = basis_for(model, config.basis);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("basis", e.what());
    }
    std::vector<double> grid;
    if (config.time_grid.points >= 2) grid = make_grid(config.time_grid);
    else if (config.mode != Mode::Timescales) throw ConfigError("timeGrid", "missing");
    const ComplexMatrix rho0 = initial_state(config.initial_state, model);

    Context cx{config, model, basis, grid, rho0, transform_state(rho0, basis), output_directory(config, output_root),
               {}, json::object()};
    std::error_code ec;
    fs::create_directories(cx.dir, ec);
    if (ec) throw IoError("cannot create " + cx.dir.string() + ": " + ec.message());

    cx.manifest["tool"] = {{"name", "qts"}, {"version", QTS_VERSION}};
    cx.manifest["config"] = to_json(config);
    cx.manifest["model"] = {{"label", model.label},
                            {"gamma", model.params.gamma},
                            {"beta", model.params.beta},
                            {"channels", model.channel_names},
                            {"warnings", model.warnings}};
    cx.manifest["basis"] = {{"name", to_string(config.basis)}, {"matrix", matrix_json(basis.matrix)}};
    if (!grid.empty()) {
        cx.manifest["grid"] = {{"points", grid.size()}, {"t_first", grid.front()}, {"t_last", grid.back()}};
    }
    cx.manifest["random"] = {{"generator", kGeneratorName},
                             {"base_seed", config.ensemble.base_seed},
                             {"seed_rule", "seed_i = derive_seed(baseSeed, i), i = 0..count-1"}};

    switch (config.mode) {
    case Mode::Master: run_master(cx); break;
    case Mode::Trajectory: run_trajectory(cx); break;
    case Mode::Ensemble: run_ensemble(cx); break;
    case Mode::Timescales: run_timescales(cx); break;
    case Mode::Bloch: run_bloch(cx); break;
    }

    cx.files.push_back("manifest.json");
    cx.manifest["files"] = cx.files;
    std::ofstream os(cx.dir / "manifest.json", std::ios::binary);
    if (!os) throw IoError("cannot open " + (cx.dir / "manifest.json").string() + " for writing");
    os << cx.manifest.dump(2) << '\n';
    if (!os) throw IoError("failed writing manifest");
    return {cx.dir, cx.files, model.warnings};
}

std::vector<std::string> preset_names() {
    std::vector<std::string> names;
    for (const auto& [name, text] : detail::bundled_presets()) names.push_back(name);
    return names;
}

std::string preset_text(const std::string& name) {
    for (const auto& [n, text] : detail::bundled_presets())
        if (n == name) return text;
    throw ConfigError("preset", "unknown preset '" + name + "'");
}

} // namespace qts::cli
