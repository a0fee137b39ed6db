#include "spiked/harness/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace spiked::harness {

using nlohmann::json;

namespace {

constexpr std::pair<Algorithm, std::string_view> kAlgorithms[] = {
    {Algorithm::unfold, "unfold"},
    {Algorithm::rec_unfold, "rec_unfold"},
    {Algorithm::psd, "psd"},
    {Algorithm::power_random, "power_random"},
    {Algorithm::power_unfold, "power_unfold"},
    {Algorithm::power_rec_unfold, "power_rec_unfold"},
    {Algorithm::power_psd, "power_psd"},
    {Algorithm::amp, "amp"},
    {Algorithm::ml, "ml"},
};

constexpr std::pair<ExperimentKind, std::string_view> kKinds[] = {
    {ExperimentKind::comparison, "comparison"},
    {ExperimentKind::scaling_collapse, "scaling_collapse"},
    {ExperimentKind::side_info, "side_info"},
    {ExperimentKind::amp_vs_se, "amp_vs_se"},
};

const std::set<std::string> kFields = {
    "kind",     "experiment_id", "k",          "n_list",     "beta_spec", "algorithms",
    "replicates", "master_seed", "gamma",      "lambda_list", "max_iter", "tol",
    "restarts", "workers",       "noise",      "amp_memory", "large",     "timing",
    "output",   "summary",
};

std::string join(const std::vector<std::string>& v, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += sep;
        out += v[i];
    }
    return out;
}

std::string underscored(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        if (c == '-') c = '_';
    return out;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> p)
    : std::runtime_error("invalid experiment config: " + join(p, "; ")), problems(std::move(p)) {}

std::string_view kind_name(ExperimentKind k) {
    for (const auto& [kind, name] : kKinds)
        if (kind == k) return name;
    return "unknown";
}

std::optional<ExperimentKind> parse_kind(std::string_view s) {
    const std::string u = underscored(s);
    for (const auto& [kind, name] : kKinds)
        if (name == u) return kind;
    return std::nullopt;
}

std::string_view algorithm_name(Algorithm a) {
    for (const auto& [alg, name] : kAlgorithms)
        if (alg == a) return name;
    return "unknown";
}

std::optional<Algorithm> parse_algorithm(std::string_view s) {
    const std::string u = underscored(s);
    for (const auto& [alg, name] : kAlgorithms)
        if (name == u) return alg;
    return std::nullopt;
}

std::vector<double> BetaSpec::grid() const {
    if (!values.empty()) return values;
    std::vector<double> g;
    if (steps == 1) return {min};
    for (int i = 0; i < steps; ++i) {
        const double f = static_cast<double>(i) / (steps - 1);
        g.push_back(geometric ? min * std::pow(max / min, f) : min + (max - min) * f);
    }
    g.back() = max;
    return g;
}

ExperimentConfig default_config(ExperimentKind kind, bool large) {
    ExperimentConfig c;
    c.kind = kind;
    c.experiment_id = std::string(kind_name(kind));
    c.large = large;
    switch (kind) {
        case ExperimentKind::comparison:
        case ExperimentKind::scaling_collapse:
            c.n_list = {25, 50, 100, 200};
            if (large) c.n_list.insert(c.n_list.end(), {400, 800});
            c.algorithms = kind == ExperimentKind::comparison
                               ? std::vector<Algorithm>{Algorithm::unfold, Algorithm::rec_unfold,
                                                        Algorithm::psd, Algorithm::power_random,
                                                        Algorithm::power_unfold,
                                                        Algorithm::power_rec_unfold,
                                                        Algorithm::power_psd}
                               : std::vector<Algorithm>{Algorithm::rec_unfold};
            break;
        case ExperimentKind::side_info:
            c.n_list = {50, 200, 500};
            c.beta.values = {3.0};
            for (int i = 0; i <= 20; ++i) c.lambda_list.push_back(i / 10.0);
            break;
        case ExperimentKind::amp_vs_se:
            c.n_list = {500};
            c.beta.values = {3.0};
            c.gamma_list = {1.0};
            c.replicates = 20;
            c.max_iter = 10;
            break;
    }
    return c;
}

namespace {

template <class T>
bool read_number(const json& j, const char* field, T& out, std::vector<std::string>& problems) {
    if (!j.contains(field)) return false;
    const json& v = j.at(field);
    if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer() && !v.is_number_unsigned()) {
            problems.push_back(std::string(field) + ": expected an integer");
            return false;
        }
    } else {
        if (!v.is_number()) {
            problems.push_back(std::string(field) + ": expected a number");
            return false;
        }
    }
    out = v.get<T>();
    return true;
}

bool read_bool(const json& j, const char* field, bool& out, std::vector<std::string>& problems) {
    if (!j.contains(field)) return false;
    if (!j.at(field).is_boolean()) {
        problems.push_back(std::string(field) + ": expected true or false");
        return false;
    }
    out = j.at(field).get<bool>();
    return true;
}

bool read_string(const json& j, const char* field, std::string& out,
                 std::vector<std::string>& problems) {
    if (!j.contains(field)) return false;
    if (!j.at(field).is_string()) {
        problems.push_back(std::string(field) + ": expected a string");
        return false;
    }
    out = j.at(field).get<std::string>();
    return true;
}

bool read_number_list(const json& j, const char* field, std::vector<double>& out,
                      std::vector<std::string>& problems, bool allow_scalar) {
    if (!j.contains(field)) return false;
    const json& v = j.at(field);
    if (allow_scalar && v.is_number()) {
        out = {v.get<double>()};
        return true;
    }
    if (!v.is_array() || v.empty()) {
        problems.push_back(std::string(field) + ": expected a nonempty array of numbers");
        return false;
    }
    std::vector<double> vals;
    for (const json& e : v) {
        if (!e.is_number()) {
            problems.push_back(std::string(field) + ": expected a nonempty array of numbers");
            return false;
        }
        vals.push_back(e.get<double>());
    }
    out = std::move(vals);
    return true;
}

void parse_beta(const json& v, BetaSpec& b, std::vector<std::string>& problems) {
    if (v.is_number() || v.is_array()) {
        json wrap = {{"v", v}};
        read_number_list(wrap, "v", b.values, problems, true);
        return;
    }
    if (!v.is_object()) {
        problems.push_back("beta_spec: expected a number, an array, or an object");
        return;
    }
    for (const auto& [key, _] : v.items())
        if (key != "values" && key != "min" && key != "max" && key != "steps" && key != "scale")
            problems.push_back("beta_spec." + key + ": unknown field");
    if (v.contains("values")) {
        read_number_list(v, "values", b.values, problems, false);
        return;
    }
    b.values.clear();
    read_number(v, "min", b.min, problems);
    read_number(v, "max", b.max, problems);
    read_number(v, "steps", b.steps, problems);
    std::string scale = "linear";
    read_string(v, "scale", scale, problems);
    if (scale == "geometric") b.geometric = true;
    else if (scale == "linear") b.geometric = false;
    else problems.push_back("beta_spec.scale: expected \"linear\" or \"geometric\"");
    if (b.steps < 1) problems.push_back("beta_spec.steps: must be >= 1");
    if (!(b.max >= b.min)) problems.push_back("beta_spec: max must be >= min");
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
    std::vector<std::string> problems;
    if (!j.is_object()) throw ConfigError({"top level: expected a JSON object"});
    for (const auto& [key, _] : j.items())
        if (!kFields.count(key)) problems.push_back(key + ": unknown field");

    ExperimentKind kind = ExperimentKind::comparison;
    std::string kind_str;
    if (!read_string(j, "kind", kind_str, problems)) {
        if (!j.contains("kind")) problems.push_back("kind: required");
    } else if (auto k = parse_kind(kind_str)) {
        kind = *k;
    } else {
        problems.push_back("kind: expected comparison, scaling_collapse, side_info or amp_vs_se");
    }
    bool large = false;
    read_bool(j, "large", large, problems);
    ExperimentConfig c = default_config(kind, large);

    read_string(j, "experiment_id", c.experiment_id, problems);
    read_number(j, "k", c.k, problems);
    std::vector<double> ns;
    if (read_number_list(j, "n_list", ns, problems, true)) {
        c.n_list.clear();
        for (double n : ns) {
            if (n != std::floor(n) || n < 2) {
                problems.push_back("n_list: every n must be an integer >= 2");
                break;
            }
            c.n_list.push_back(static_cast<std::size_t>(n));
        }
    }
    if (j.contains("beta_spec")) parse_beta(j.at("beta_spec"), c.beta, problems);
    if (j.contains("algorithms")) {
        const json& a = j.at("algorithms");
        if (!a.is_array() || a.empty()) {
            problems.push_back("algorithms: expected a nonempty array of names");
        } else {
            c.algorithms.clear();
            for (const json& e : a) {
                const auto alg = e.is_string() ? parse_algorithm(e.get<std::string>()) : std::nullopt;
                if (!alg) {
                    problems.push_back("algorithms: unknown algorithm " + e.dump());
                    continue;
                }
                c.algorithms.push_back(*alg);
            }
        }
    }
    read_number(j, "replicates", c.replicates, problems);
    read_number(j, "master_seed", c.master_seed, problems);
    read_number_list(j, "gamma", c.gamma_list, problems, true);
    read_number_list(j, "lambda_list", c.lambda_list, problems, true);
    read_number(j, "max_iter", c.max_iter, problems);
    read_number(j, "tol", c.tol, problems);
    read_number(j, "restarts", c.restarts, problems);
    read_number(j, "workers", c.workers, problems);
    std::string noise;
    if (read_string(j, "noise", noise, problems)) {
        if (noise == "symmetric") c.noise = NoiseKind::symmetric;
        else if (noise == "asymmetric") c.noise = NoiseKind::asymmetric;
        else problems.push_back("noise: expected \"symmetric\" or \"asymmetric\"");
    }
    std::string memory;
    if (read_string(j, "amp_memory", memory, problems)) {
        if (memory == "divergence") c.amp_memory = AmpMemory::divergence;
        else if (memory == "literal") c.amp_memory = AmpMemory::literal;
        else if (memory == "none") c.amp_memory = AmpMemory::none;
        else problems.push_back("amp_memory: expected divergence, literal or none");
    }
    read_bool(j, "timing", c.timing, problems);
    read_string(j, "output", c.output, problems);
    read_string(j, "summary", c.summary, problems);

    // Range checks.
    if (c.k < 2 || c.k > 6) problems.push_back("k: must lie in [2, 6]");
    if (c.replicates < 1) problems.push_back("replicates: must be >= 1");
    if (c.max_iter < 1) problems.push_back("max_iter: must be >= 1");
    if (!(c.tol >= 0.0)) problems.push_back("tol: must be >= 0");
    if (c.restarts < 1) problems.push_back("restarts: must be >= 1");
    if (c.workers < 1) problems.push_back("workers: must be >= 1");
    for (double b : c.beta.grid())
        if (!(b > 0.0) || !std::isfinite(b)) {
            problems.push_back("beta_spec: beta values must be finite and > 0");
            break;
        }
    for (double g : c.gamma_list)
        if (!(g >= 0.0)) {
            problems.push_back("gamma: must be >= 0");
            break;
        }
    for (double l : c.lambda_list)
        if (!(l >= 0.0)) {
            problems.push_back("lambda_list: must be >= 0");
            break;
        }
    if (c.kind == ExperimentKind::side_info && c.k != 3)
        problems.push_back("k: side_info requires k = 3");
    if (c.kind == ExperimentKind::side_info && c.lambda_list.empty())
        problems.push_back("lambda_list: required for side_info");
    if (c.kind == ExperimentKind::amp_vs_se && c.gamma_list.empty())
        problems.push_back("gamma: required for amp_vs_se");
    if (c.kind == ExperimentKind::comparison || c.kind == ExperimentKind::scaling_collapse) {
        if (c.k < 3) problems.push_back("k: estimators require k >= 3");
        for (Algorithm a : c.algorithms)
            if ((a == Algorithm::psd || a == Algorithm::power_psd) && c.k != 3) {
                problems.push_back("algorithms: psd variants require k = 3");
                break;
            }
    }
    if ((c.kind == ExperimentKind::side_info || c.kind == ExperimentKind::amp_vs_se) &&
        j.contains("algorithms"))
        problems.push_back("algorithms: not used by " + std::string(kind_name(c.kind)));
    if (c.kind == ExperimentKind::amp_vs_se && c.k < 3)
        problems.push_back("k: amp_vs_se requires k >= 3");

    if (!problems.empty()) throw ConfigError(std::move(problems));
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError({"cannot open config file " + path});
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError({std::string("JSON parse error: ") + e.what()});
    }
    return parse_config(j);
}

json to_json(const ExperimentConfig& c) {
    json j;
    j["kind"] = kind_name(c.kind);
    j["experiment_id"] = c.experiment_id;
    j["k"] = c.k;
    j["n_list"] = c.n_list;
    j["beta_spec"] = {{"values", c.beta.grid()}};
    if (!c.algorithms.empty()) {
        json algs = json::array();
        for (Algorithm a : c.algorithms) algs.push_back(algorithm_name(a));
        j["algorithms"] = algs;
    }
    j["replicates"] = c.replicates;
    j["master_seed"] = c.master_seed;
    if (!c.gamma_list.empty()) j["gamma"] = c.gamma_list;
    if (!c.lambda_list.empty()) j["lambda_list"] = c.lambda_list;
    j["max_iter"] = c.max_iter;
    j["tol"] = c.tol;
    j["restarts"] = c.restarts;
    j["workers"] = c.workers;
    j["noise"] = c.noise == NoiseKind::symmetric ? "symmetric" : "asymmetric";
    j["amp_memory"] = c.amp_memory == AmpMemory::divergence ? "divergence"
                      : c.amp_memory == AmpMemory::literal  ? "literal"
                                                             : "none";
    j["large"] = c.large;
    j["timing"] = c.timing;
    if (!c.output.empty()) j["output"] = c.output;
    if (!c.summary.empty()) j["summary"] = c.summary;
    return j;
}

}  // namespace spiked::harness
