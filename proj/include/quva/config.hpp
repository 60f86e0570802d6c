#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "quva/expectation.hpp"
#include "quva/gpr.hpp"
#include "quva/oracles.hpp"
#include "quva/pde_operators.hpp"

namespace quva {

/// Config parse/validation failure with the offending line and field.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& message, int line, std::string field)
        : std::runtime_error((line > 0 ? "line " + std::to_string(line) + ": " : "") + message),
          line_(line),
          field_(std::move(field)) {}
    int line() const { return line_; }
    const std::string& field() const { return field_; }

private:
    int line_;
    std::string field_;
};

/// Classical-oracle options: when a reference solution is requested, the
/// harness solves the same problem classically from f(0) = f0 and annotates
/// records with fidelity against it.
struct OracleSpec {
    bool enabled = false;
    double f0 = 0.0;
};

struct ExperimentConfig {
    DEProblem de;
    PotentialSpec potential;
    AnsatzSpec ansatz;
    SearchConfig search;
    MeasurementConfig measurement;
    OracleSpec oracle;
    CorrelationConfig correlation;
    std::string output_dir = "out";
    bool emit_plots = true;
    std::string source_path;
    std::string source_text;
};

namespace detail {

struct RawValue {
    std::string text;
    int line = 0;
};
using RawSections = std::map<std::string, std::map<std::string, RawValue>>;

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline RawSections tokenize_config(const std::string& text) {
    RawSections out;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("unterminated section header", lineno, "");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) throw ConfigError("empty section name", lineno, "");
            out[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("expected 'key = value'", lineno, "");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("empty key", lineno, "");
        if (section.empty()) throw ConfigError("key outside any [section]", lineno, key);
        if (out[section].count(key)) throw ConfigError("duplicate key '" + key + "'", lineno, key);
        out[section][key] = {value, lineno};
    }
    return out;
}

class SectionReader {
public:
    SectionReader(const RawSections& raw, std::string section) : raw_(raw), section_(std::move(section)) {}

    bool has(const std::string& key) const {
        auto it = raw_.find(section_);
        return it != raw_.end() && it->second.count(key) > 0;
    }

    const RawValue& raw(const std::string& key) const { return raw_.at(section_).at(key); }

    double number(const std::string& key) const {
        const RawValue& v = raw(key);
        try {
            size_t pos = 0;
            const double d = std::stod(v.text, &pos);
            if (pos != v.text.size()) throw std::invalid_argument("trailing characters");
            return d;
        } catch (const std::exception&) {
            throw ConfigError("field '" + key + "' in [" + section_ + "] is not a number: '" + v.text + "'",
                              v.line, key);
        }
    }

    double number_or(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

    long long integer(const std::string& key) const {
        const double d = number(key);
        const long long v = static_cast<long long>(d);
        if (static_cast<double>(v) != d)
            throw ConfigError("field '" + key + "' in [" + section_ + "] must be an integer", raw(key).line, key);
        return v;
    }

    long long integer_or(const std::string& key, long long fallback) const {
        return has(key) ? integer(key) : fallback;
    }

    std::string word(const std::string& key) const { return raw(key).text; }
    std::string word_or(const std::string& key, const std::string& fallback) const {
        return has(key) ? word(key) : fallback;
    }

    bool flag_or(const std::string& key, bool fallback) const {
        if (!has(key)) return fallback;
        const std::string v = word(key);
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        throw ConfigError("field '" + key + "' in [" + section_ + "] must be true/false", raw(key).line, key);
    }

    std::vector<double> number_list(const std::string& key) const {
        const RawValue& v = raw(key);
        std::vector<double> out;
        std::istringstream in(v.text);
        std::string tok;
        while (in >> tok) {
            try {
                out.push_back(std::stod(tok));
            } catch (const std::exception&) {
                throw ConfigError("field '" + key + "' in [" + section_ + "] has a non-numeric entry '" + tok + "'",
                                  v.line, key);
            }
        }
        return out;
    }

    void require(const std::string& key) const {
        if (!has(key))
            throw ConfigError("missing required field '" + key + "' in [" + section_ + "]", 0, key);
    }

private:
    const RawSections& raw_;
    std::string section_;
};

}  // namespace detail

/// Parses the key-value experiment description. Unknown sections or keys,
/// malformed values, and violated invariants are reported with line and
/// field names.
inline ExperimentConfig parse_experiment_config_text(const std::string& text, const std::string& name = "<inline>") {
    const detail::RawSections raw = detail::tokenize_config(text);

    static const std::map<std::string, std::vector<std::string>> known = {
        {"de", {"kappa2", "kappa1", "kappa0", "kappa_n", "v_max", "n_qubits", "depth"}},
        {"potential", {"kind", "v_max", "values"}},
        {"ansatz", {"layout"}},
        {"search", {"n_random_init", "n_guided", "p_c", "candidate_pool_size", "refit_every", "seed"}},
        {"measurement", {"mode", "shots", "seed"}},
        {"oracle", {"f0"}},
        {"correlation", {"n_samples", "kappa_min", "kappa_max", "seed"}},
        {"output", {"output_dir", "emit_plots"}},
    };
    for (const auto& [section, keys] : raw) {
        auto it = known.find(section);
        if (it == known.end()) throw ConfigError("unknown section [" + section + "]", 0, section);
        for (const auto& [key, value] : keys) {
            if (std::find(it->second.begin(), it->second.end(), key) == it->second.end())
                throw ConfigError("unknown field '" + key + "' in [" + section + "]", value.line, key);
        }
    }

    ExperimentConfig cfg;
    cfg.source_path = name;
    cfg.source_text = text;

    detail::SectionReader de(raw, "de");
    de.require("kappa0");
    cfg.de.kappa2 = de.number_or("kappa2", 1.0);
    cfg.de.kappa1 = de.number_or("kappa1", 0.0);
    cfg.de.kappa0 = de.number("kappa0");
    cfg.de.kappa_n = de.number_or("kappa_n", 0.0);
    cfg.de.v_max = de.number_or("v_max", 0.0);
    cfg.de.n_qubits = static_cast<int>(de.integer_or("n_qubits", 3));
    cfg.de.depth = static_cast<int>(de.integer_or("depth", 0));
    if (cfg.de.n_qubits < 1 || cfg.de.n_qubits > kMaxQubits)
        throw ConfigError("n_qubits outside [1, " + std::to_string(kMaxQubits) + "]",
                          de.has("n_qubits") ? de.raw("n_qubits").line : 0, "n_qubits");
    if (cfg.de.depth < 0) throw ConfigError("depth must be >= 0", de.raw("depth").line, "depth");

    detail::SectionReader pot(raw, "potential");
    const std::string kind = pot.word_or("kind", "harmonic");
    if (kind == "harmonic") cfg.potential.kind = PotentialKind::Harmonic;
    else if (kind == "custom") cfg.potential.kind = PotentialKind::Custom;
    else throw ConfigError("potential kind must be 'harmonic' or 'custom'", pot.raw("kind").line, "kind");
    cfg.potential.v_max = pot.number_or("v_max", cfg.de.v_max);
    if (pot.has("v_max") && de.has("v_max") && cfg.potential.v_max != cfg.de.v_max)
        throw ConfigError("v_max differs between [de] and [potential]", pot.raw("v_max").line, "v_max");
    cfg.de.v_max = cfg.potential.v_max;
    if (cfg.potential.kind == PotentialKind::Custom) {
        pot.require("values");
        const std::vector<double> vals = pot.number_list("values");
        cfg.potential.custom = Eigen::Map<const Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
        if (cfg.potential.custom.size() != (Eigen::Index(1) << cfg.de.n_qubits))
            throw ConfigError("custom potential needs 2^n_qubits values", pot.raw("values").line, "values");
    }

    detail::SectionReader ansatz(raw, "ansatz");
    const std::string layout = ansatz.word_or("layout", "six_param");
    if (layout == "six_param") cfg.ansatz.layout = AnsatzLayout::SixParam;
    else if (layout == "three_param") cfg.ansatz.layout = AnsatzLayout::ThreeParam;
    else throw ConfigError("ansatz layout must be 'six_param' or 'three_param'", ansatz.raw("layout").line, "layout");
    cfg.ansatz.n_qubits = cfg.de.n_qubits;
    cfg.ansatz.depth = cfg.de.depth;

    detail::SectionReader search(raw, "search");
    search.require("p_c");
    cfg.search.n_random_init = static_cast<int>(search.integer_or("n_random_init", 600));
    cfg.search.n_guided = static_cast<int>(search.integer_or("n_guided", 600));
    cfg.search.p_c = search.number("p_c");
    cfg.search.candidate_pool_size = static_cast<int>(search.integer_or("candidate_pool_size", 256));
    cfg.search.refit_every = static_cast<int>(search.integer_or("refit_every", 25));
    cfg.search.seed = static_cast<std::uint64_t>(search.integer_or("seed", 1));
    try {
        cfg.search.validate();
    } catch (const std::exception& e) {
        throw ConfigError(e.what(), 0, "search");
    }

    detail::SectionReader meas(raw, "measurement");
    const std::string mode = meas.word_or("mode", "exact");
    if (mode == "exact") {
        cfg.measurement = MeasurementConfig::exact();
    } else if (mode == "shots") {
        const long long shots = meas.integer_or("shots", 10000);
        if (shots < 1) throw ConfigError("shots must be >= 1", meas.raw("shots").line, "shots");
        cfg.measurement =
            MeasurementConfig::with_shots(shots, static_cast<std::uint64_t>(meas.integer_or("seed", 1)));
    } else {
        throw ConfigError("measurement mode must be 'exact' or 'shots'", meas.raw("mode").line, "mode");
    }

    detail::SectionReader oracle(raw, "oracle");
    if (oracle.has("f0")) {
        cfg.oracle.enabled = true;
        cfg.oracle.f0 = oracle.number("f0");
    }

    detail::SectionReader corr(raw, "correlation");
    cfg.correlation.n_samples = static_cast<int>(corr.integer_or("n_samples", 500));
    cfg.correlation.kappa_min = corr.number_or("kappa_min", -50.0);
    cfg.correlation.kappa_max = corr.number_or("kappa_max", 50.0);
    cfg.correlation.seed = static_cast<std::uint64_t>(corr.integer_or("seed", static_cast<long long>(cfg.search.seed)));

    detail::SectionReader output(raw, "output");
    cfg.output_dir = output.word_or("output_dir", "out");
    cfg.emit_plots = output.flag_or("emit_plots", true);
    return cfg;
}

inline ExperimentConfig parse_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'", 0, "");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_experiment_config_text(buf.str(), path);
}

}  // namespace quva
