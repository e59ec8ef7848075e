#pragma once

// Experiment configuration files (strict JSON: unknown keys are rejected).
//
// {
//   "system": {"preset": "paper-R1"}            or {"J": [[..]], "R": .., "Q": .., "B": ..},
//   "x0": [1, 2, 1], "T": 10,
//   "input": [{"start": 0, "value": [0]}, {"start": 5, "value": [10]}],
//   "grid": {"intervals": 1000},
//   "perturbation": {"time": 5, "magnitude": 5, "component": 0},
//   "run": {"qoi": "local", "rho": 0, "theta": 0.5, "tol": 0, "max_iters": 30,
//           "max_intervals": 400, "adjoint_mode": "exact", "initial_M": 20},
//   "output": "out"
// }
//
// With a preset, x0, T and input default to the step-input scenario.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "phadapt/driver.hpp"
#include "phadapt/presets.hpp"

namespace phadapt::cli {

using json = nlohmann::json;

struct InputSegment {
    double start = 0.0;
    std::vector<double> value;

    friend bool operator==(const InputSegment&, const InputSegment&) = default;
};

struct PerturbationSpec {
    double time = 5.0;
    double magnitude = 5.0;
    int component = 0;

    friend bool operator==(const PerturbationSpec&, const PerturbationSpec&) = default;
};

struct ExperimentConfig {
    std::string preset;  // empty when the matrices are given explicitly
    Matrix J, R, Q, B;
    std::vector<double> x0;
    double T = 10.0;
    std::vector<InputSegment> input;
    std::size_t grid_intervals = 1000;
    PerturbationSpec perturbation;
    RunConfig run;
    std::string output = "out";

    PHSystem system() const { return PHSystem(J, R, Q, B); }
    Vector initial_state() const { return Eigen::Map<const Vector>(x0.data(), static_cast<Eigen::Index>(x0.size())); }

    InputSignal input_signal() const {
        std::vector<double> breaks;
        std::vector<Vector> values;
        for (const auto& s : input) {
            breaks.push_back(s.start);
            values.push_back(Eigen::Map<const Vector>(s.value.data(), static_cast<Eigen::Index>(s.value.size())));
        }
        breaks.push_back(T);
        return InputSignal(std::move(breaks), std::move(values));
    }

    friend bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
        auto same = [](const Matrix& x, const Matrix& y) {
            return x.rows() == y.rows() && x.cols() == y.cols() && x == y;
        };
        return a.preset == b.preset && same(a.J, b.J) && same(a.R, b.R) && same(a.Q, b.Q) && same(a.B, b.B) &&
               a.x0 == b.x0 && a.T == b.T && a.input == b.input && a.grid_intervals == b.grid_intervals &&
               a.perturbation == b.perturbation && a.run == b.run && a.output == b.output;
    }
};

namespace detail {

inline std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

inline void reject_unknown(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
    const std::set<std::string> known(allowed.begin(), allowed.end());
    for (const auto& item : obj.items()) {
        if (!known.count(item.key())) throw ConfigError(join(path, item.key()), "unknown key");
    }
}

inline double number(const json& v, const std::string& path, bool allow_inf = false) {
    if (allow_inf && v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
    }
    if (!v.is_number()) throw ConfigError(path, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(path, "expected a finite number");
    return d;
}

inline std::size_t count(const json& v, const std::string& path) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
        throw ConfigError(path, "expected a nonnegative integer");
    }
    return v.get<std::size_t>();
}

inline std::vector<double> vector(const json& v, const std::string& path) {
    if (!v.is_array()) throw ConfigError(path, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

inline Matrix matrix(const json& v, const std::string& path) {
    if (!v.is_array() || v.empty()) throw ConfigError(path, "expected a nonempty array of rows");
    const std::size_t rows = v.size();
    std::size_t cols = 0;
    Matrix m;
    for (std::size_t r = 0; r < rows; ++r) {
        const std::string row_path = path + "[" + std::to_string(r) + "]";
        const std::vector<double> row = vector(v[r], row_path);
        if (r == 0) {
            cols = row.size();
            if (cols == 0) throw ConfigError(row_path, "empty row");
            m.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        } else if (row.size() != cols) {
            throw ConfigError(row_path, "row length " + std::to_string(row.size()) + " differs from " +
                                            std::to_string(cols));
        }
        for (std::size_t c = 0; c < cols; ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
    }
    return m;
}

inline json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(row);
    }
    return rows;
}

inline QoiKind parse_qoi(const json& v, const std::string& path) {
    if (v == "global") return QoiKind::global;
    if (v == "local") return QoiKind::local;
    if (v == "local_weighted") return QoiKind::local_weighted;
    throw ConfigError(path, "expected one of global, local, local_weighted");
}

inline AdjointMode parse_mode(const json& v, const std::string& path) {
    if (v == "exact") return AdjointMode::exact;
    if (v == "jacobi") return AdjointMode::jacobi;
    throw ConfigError(path, "expected exact or jacobi");
}

inline RunConfig parse_run(const json& v) {
    reject_unknown(v, "run", {"qoi", "rho", "theta", "tol", "max_iters", "max_intervals", "adjoint_mode", "initial_M"});
    RunConfig run;
    if (v.contains("qoi")) run.qoi.kind = parse_qoi(v["qoi"], "run.qoi");
    if (v.contains("rho")) run.qoi.rho = number(v["rho"], "run.rho");
    if (v.contains("theta")) run.theta = number(v["theta"], "run.theta");
    if (v.contains("tol")) run.tol = number(v["tol"], "run.tol", true);
    if (v.contains("max_iters")) run.max_iters = count(v["max_iters"], "run.max_iters");
    if (v.contains("max_intervals")) run.max_intervals = count(v["max_intervals"], "run.max_intervals");
    if (v.contains("adjoint_mode")) run.adjoint_mode = parse_mode(v["adjoint_mode"], "run.adjoint_mode");
    if (v.contains("initial_M")) run.initial_M = count(v["initial_M"], "run.initial_M");

    if (!(run.qoi.rho >= 0.0)) throw ConfigError("run.rho", "must be nonnegative");
    if (!(run.theta > 0.0 && run.theta <= 1.0)) throw ConfigError("run.theta", "must lie in (0, 1]");
    if (!(run.tol >= 0.0)) throw ConfigError("run.tol", "must be nonnegative");
    if (run.initial_M < 2) throw ConfigError("run.initial_M", "must be at least 2");
    if (run.max_iters < 1) throw ConfigError("run.max_iters", "must be at least 1");
    if (run.max_intervals < run.initial_M) throw ConfigError("run.max_intervals", "must be at least initial_M");
    return run;
}

}  // namespace detail

inline ExperimentConfig parse_config(const json& root) {
    using namespace detail;
    reject_unknown(root, "", {"system", "x0", "T", "input", "grid", "perturbation", "run", "output"});
    ExperimentConfig cfg;

    if (!root.contains("system")) throw ConfigError("system", "missing");
    const json& sys = root["system"];
    if (!sys.is_object()) throw ConfigError("system", "expected an object");
    if (sys.contains("preset")) {
        reject_unknown(sys, "system", {"preset"});
        if (!sys["preset"].is_string()) throw ConfigError("system.preset", "expected a string");
        cfg.preset = sys["preset"].get<std::string>();
        const auto preset = presets::by_name(cfg.preset);
        if (!preset) throw ConfigError("system.preset", "unknown preset '" + cfg.preset + "'");
        cfg.J = preset->J();
        cfg.R = preset->R();
        cfg.Q = preset->Q();
        cfg.B = preset->B();
    } else {
        reject_unknown(sys, "system", {"J", "R", "Q", "B"});
        for (const char* key : {"J", "R", "Q", "B"}) {
            if (!sys.contains(key)) throw ConfigError(std::string("system.") + key, "missing");
        }
        cfg.J = matrix(sys["J"], "system.J");
        cfg.R = matrix(sys["R"], "system.R");
        cfg.Q = matrix(sys["Q"], "system.Q");
        cfg.B = matrix(sys["B"], "system.B");
    }
    try {
        (void)cfg.system();
    } catch (const ConfigError& e) {
        throw ConfigError("system." + e.field(), e.message());
    }
    const auto n = static_cast<std::size_t>(cfg.J.rows());
    const auto m = static_cast<std::size_t>(cfg.B.cols());

    const bool scenario_defaults = !cfg.preset.empty();
    if (root.contains("T")) {
        cfg.T = number(root["T"], "T");
    } else if (!scenario_defaults) {
        throw ConfigError("T", "missing");
    }
    if (!(cfg.T > 0.0)) throw ConfigError("T", "must be positive");

    if (root.contains("x0")) {
        cfg.x0 = vector(root["x0"], "x0");
    } else if (scenario_defaults) {
        const Vector d = presets::step_initial_state();
        cfg.x0.assign(d.data(), d.data() + d.size());
    } else {
        throw ConfigError("x0", "missing");
    }
    if (cfg.x0.size() != n) throw ConfigError("x0", "expected length " + std::to_string(n));

    if (root.contains("input")) {
        const json& in = root["input"];
        if (!in.is_array() || in.empty()) throw ConfigError("input", "expected a nonempty array of segments");
        for (std::size_t k = 0; k < in.size(); ++k) {
            const std::string path = "input[" + std::to_string(k) + "]";
            reject_unknown(in[k], path, {"start", "value"});
            if (!in[k].contains("start")) throw ConfigError(path + ".start", "missing");
            if (!in[k].contains("value")) throw ConfigError(path + ".value", "missing");
            InputSegment seg{number(in[k]["start"], path + ".start"), vector(in[k]["value"], path + ".value")};
            if (seg.value.size() != m) throw ConfigError(path + ".value", "expected length " + std::to_string(m));
            if (k == 0 && seg.start != 0.0) throw ConfigError(path + ".start", "first segment must start at 0");
            if (k > 0 && !(seg.start > cfg.input.back().start)) {
                throw ConfigError(path + ".start", "segment starts must be strictly increasing");
            }
            if (!(seg.start < cfg.T)) throw ConfigError(path + ".start", "segment starts must lie before T");
            cfg.input.push_back(std::move(seg));
        }
    } else if (scenario_defaults && m == 1 && cfg.T > presets::kStepTime) {
        cfg.input = {{0.0, {0.0}}, {presets::kStepTime, {presets::kStepHeight}}};
    } else if (scenario_defaults) {
        cfg.input = {{0.0, std::vector<double>(m, 0.0)}};
    } else {
        throw ConfigError("input", "missing");
    }

    if (root.contains("grid")) {
        reject_unknown(root["grid"], "grid", {"intervals"});
        if (root["grid"].contains("intervals")) cfg.grid_intervals = count(root["grid"]["intervals"], "grid.intervals");
    }
    if (cfg.grid_intervals < 1) throw ConfigError("grid.intervals", "must be at least 1");

    cfg.perturbation.time = 0.5 * cfg.T;
    if (root.contains("perturbation")) {
        const json& p = root["perturbation"];
        reject_unknown(p, "perturbation", {"time", "magnitude", "component"});
        if (p.contains("time")) cfg.perturbation.time = number(p["time"], "perturbation.time");
        if (p.contains("magnitude")) cfg.perturbation.magnitude = number(p["magnitude"], "perturbation.magnitude");
        if (p.contains("component")) {
            cfg.perturbation.component = static_cast<int>(count(p["component"], "perturbation.component"));
        }
    }
    if (!(cfg.perturbation.time >= 0.0 && cfg.perturbation.time <= cfg.T)) {
        throw ConfigError("perturbation.time", "must lie in [0, T]");
    }
    if (static_cast<std::size_t>(cfg.perturbation.component) >= n) {
        throw ConfigError("perturbation.component", "must be below the state dimension");
    }

    if (root.contains("run")) cfg.run = parse_run(root["run"]);
    if (root.contains("output")) {
        if (!root["output"].is_string()) throw ConfigError("output", "expected a string");
        cfg.output = root["output"].get<std::string>();
    }
    return cfg;
}

inline ExperimentConfig parse_config_text(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
    }
    return parse_config(root);
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read config " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_config_text(text);
}

/// Fully resolved config; parsing it yields an equal ExperimentConfig.
inline json to_json(const ExperimentConfig& cfg) {
    using detail::matrix_to_json;
    json root;
    if (!cfg.preset.empty()) {
        root["system"] = {{"preset", cfg.preset}};
    } else {
        root["system"] = {{"J", matrix_to_json(cfg.J)},
                          {"R", matrix_to_json(cfg.R)},
                          {"Q", matrix_to_json(cfg.Q)},
                          {"B", matrix_to_json(cfg.B)}};
    }
    root["x0"] = cfg.x0;
    root["T"] = cfg.T;
    json input = json::array();
    for (const auto& s : cfg.input) input.push_back({{"start", s.start}, {"value", s.value}});
    root["input"] = input;
    root["grid"] = {{"intervals", cfg.grid_intervals}};
    root["perturbation"] = {{"time", cfg.perturbation.time},
                            {"magnitude", cfg.perturbation.magnitude},
                            {"component", cfg.perturbation.component}};
    json tol = std::isinf(cfg.run.tol) ? json("inf") : json(cfg.run.tol);
    root["run"] = {{"qoi", std::string(to_string(cfg.run.qoi.kind))},
                   {"rho", cfg.run.qoi.rho},
                   {"theta", cfg.run.theta},
                   {"tol", tol},
                   {"max_iters", cfg.run.max_iters},
                   {"max_intervals", cfg.run.max_intervals},
                   {"adjoint_mode", std::string(to_string(cfg.run.adjoint_mode))},
                   {"initial_M", cfg.run.initial_M}};
    root["output"] = cfg.output;
    return root;
}

}  // namespace phadapt::cli
