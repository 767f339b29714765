#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "tfomp/designs.hpp"
#include "tfomp/errors.hpp"
#include "tfomp/gard.hpp"

namespace tfomp {

enum class ExperimentId {
    hadamard_small,
    gaussian_fixed_k0,
    gaussian_scaling_k0,
    exp_decay,
    correlated,
    qtf_compare,
    mimo_overdetermined,
    gard_snr_sweep,
    gard_nout_sweep,
};

enum class ExperimentFamily { sparse_recovery, mimo, robust_regression };

inline constexpr std::array kAllExperiments = {
    ExperimentId::hadamard_small,      ExperimentId::gaussian_fixed_k0, ExperimentId::gaussian_scaling_k0,
    ExperimentId::exp_decay,           ExperimentId::correlated,        ExperimentId::qtf_compare,
    ExperimentId::mimo_overdetermined, ExperimentId::gard_snr_sweep,    ExperimentId::gard_nout_sweep,
};

inline std::string to_string(ExperimentId id) {
    switch (id) {
    case ExperimentId::hadamard_small: return "hadamard_small";
    case ExperimentId::gaussian_fixed_k0: return "gaussian_fixed_k0";
    case ExperimentId::gaussian_scaling_k0: return "gaussian_scaling_k0";
    case ExperimentId::exp_decay: return "exp_decay";
    case ExperimentId::correlated: return "correlated";
    case ExperimentId::qtf_compare: return "qtf_compare";
    case ExperimentId::mimo_overdetermined: return "mimo_overdetermined";
    case ExperimentId::gard_snr_sweep: return "gard_snr_sweep";
    case ExperimentId::gard_nout_sweep: return "gard_nout_sweep";
    }
    return "unknown";
}

inline ExperimentId parse_experiment_id(std::string_view s) {
    for (auto id : kAllExperiments) {
        if (to_string(id) == s) return id;
    }
    throw ConfigError("unknown experiment '" + std::string(s) + "'");
}

inline ExperimentFamily family_of(ExperimentId id) {
    switch (id) {
    case ExperimentId::mimo_overdetermined: return ExperimentFamily::mimo;
    case ExperimentId::gard_snr_sweep:
    case ExperimentId::gard_nout_sweep: return ExperimentFamily::robust_regression;
    default: return ExperimentFamily::sparse_recovery;
    }
}

/// Algorithm names accepted in the roster of each experiment family.
inline const std::vector<std::string>& known_algorithms(ExperimentFamily f) {
    static const std::vector<std::string> sparse = {"tf_omp", "qtf_omp1", "qtf_omp2", "omp_k0",
                                                    "omp_sigma", "lasso", "oracle_ls"};
    static const std::vector<std::string> mimo = {"lmmse", "lmmse_tf_omp", "lmmse_omp_k0", "lmmse_omp_sigma"};
    static const std::vector<std::string> robust = {"tf_gard", "gard_sigma", "gard_nout", "ls", "ls_wo"};
    switch (f) {
    case ExperimentFamily::mimo: return mimo;
    case ExperimentFamily::robust_regression: return robust;
    default: return sparse;
    }
}

/**
 * Declarative Monte Carlo experiment. Scalars give fixed parameters; a
 * non-empty *_list overrides its scalar and becomes a sweep axis. The grid
 * is the Cartesian product n x rho x alpha x n_out x snr_db.
 */
struct ExperimentConfig {
    ExperimentId experiment = ExperimentId::hadamard_small;
    Index n = 32;
    Index p = 64;
    Index k0 = 3;
    double k0_fraction = 0.0;  // > 0: k0 = floor(k0_fraction * n)
    double rho = 0.0;
    double alpha = 1.0;
    Index nt = 16;
    Index nr = 24;
    Index n_out = 10;
    std::vector<double> snr_db;
    double sir_db = -10.0;
    std::vector<Index> n_list;
    std::vector<double> rho_list;
    std::vector<double> alpha_list;
    std::vector<Index> n_out_list;
    long trials = 1000;
    std::uint64_t seed = 1;
    std::vector<std::string> algorithms;
    bool noiseless = false;
    bool record_timing = false;
    double lasso_lambda_scale = 2.0;
};

inline std::vector<double> snr_range(double from, double to, double step) {
    std::vector<double> v;
    for (double s = from; s <= to + 1e-9; s += step) v.push_back(s);
    return v;
}

inline std::vector<Index> n_range(Index from, Index to, Index step) {
    std::vector<Index> v;
    for (Index s = from; s <= to; s += step) v.push_back(s);
    return v;
}

/// Catalog defaults for each experiment.
inline ExperimentConfig default_config(ExperimentId id) {
    ExperimentConfig c;
    c.experiment = id;
    switch (id) {
    case ExperimentId::hadamard_small:
        c.n = 32;
        c.p = 64;
        c.k0 = 3;
        c.snr_db = snr_range(0, 30, 5);
        c.trials = 10000;
        c.algorithms = {"tf_omp", "omp_k0", "omp_sigma", "lasso", "oracle_ls"};
        break;
    case ExperimentId::gaussian_fixed_k0:
        c.p = 500;
        c.k0 = 10;
        c.n_list = n_range(100, 450, 50);
        c.snr_db = {10};
        c.algorithms = {"tf_omp", "omp_k0", "omp_sigma", "lasso"};
        break;
    case ExperimentId::gaussian_scaling_k0:
        c.p = 500;
        c.k0_fraction = 0.05;
        c.n_list = n_range(100, 450, 50);
        c.snr_db = {10};
        c.algorithms = {"tf_omp", "omp_k0", "omp_sigma", "lasso"};
        break;
    case ExperimentId::exp_decay:
        c.n = 32;
        c.p = 64;
        c.k0 = 3;
        c.alpha_list = {1.0, 0.75, 0.5, 0.25};
        c.snr_db = snr_range(0, 30, 5);
        c.algorithms = {"tf_omp", "omp_k0", "omp_sigma", "lasso"};
        break;
    case ExperimentId::correlated:
        c.n = 32;
        c.p = 64;
        c.k0 = 3;
        c.rho_list = {0.0, 0.25, 0.5, 0.75};
        c.snr_db = snr_range(0, 30, 5);
        c.algorithms = {"tf_omp", "omp_k0", "omp_sigma", "lasso"};
        break;
    case ExperimentId::qtf_compare:
        c.p = 500;
        c.k0 = 10;
        c.n_list = n_range(100, 450, 50);
        c.snr_db = {10};
        c.algorithms = {"tf_omp", "qtf_omp1", "qtf_omp2", "omp_k0"};
        break;
    case ExperimentId::mimo_overdetermined:
        c.nt = 16;
        c.nr = 24;
        c.snr_db = snr_range(4, 14, 2);
        c.trials = 10000;
        c.algorithms = {"lmmse", "lmmse_tf_omp", "lmmse_omp_k0", "lmmse_omp_sigma"};
        break;
    case ExperimentId::gard_snr_sweep:
        c.n = 250;
        c.p = 30;
        c.sir_db = -10;
        c.n_out_list = {10, 80};
        c.snr_db = snr_range(0, 40, 5);
        c.algorithms = {"tf_gard", "gard_sigma", "gard_nout", "ls", "ls_wo"};
        break;
    case ExperimentId::gard_nout_sweep:
        c.n = 250;
        c.p = 30;
        c.sir_db = -10;
        c.n_out_list = n_range(10, 100, 10);
        c.snr_db = {20};
        c.algorithms = {"tf_gard", "gard_sigma", "gard_nout", "ls", "ls_wo"};
        break;
    }
    return c;
}

/// Throws ConfigError when a parameter lies outside the experiment's domain.
inline void validate(const ExperimentConfig& c) {
    const auto fam = family_of(c.experiment);
    auto fail = [&](const std::string& msg) { throw ConfigError(to_string(c.experiment) + ": " + msg); };
    if (c.trials < 1) fail("trials must be >= 1");
    if (c.snr_db.empty()) fail("snr_db must be non-empty");
    if (c.algorithms.empty()) fail("algorithms must be non-empty");
    const auto& known = known_algorithms(fam);
    for (const auto& a : c.algorithms) {
        if (std::find(known.begin(), known.end(), a) == known.end()) fail("algorithm '" + a + "' not valid here");
    }
    std::vector<Index> ns = c.n_list.empty() ? std::vector<Index>{c.n} : c.n_list;
    std::vector<double> rhos = c.rho_list.empty() ? std::vector<double>{c.rho} : c.rho_list;
    std::vector<double> alphas = c.alpha_list.empty() ? std::vector<double>{c.alpha} : c.alpha_list;
    std::vector<Index> nouts = c.n_out_list.empty() ? std::vector<Index>{c.n_out} : c.n_out_list;
    for (double r : rhos) {
        if (!(r >= 0.0 && r < 1.0)) fail("rho must lie in [0, 1)");
    }
    for (double a : alphas) {
        if (!(a > 0.0 && a <= 1.0)) fail("alpha must lie in (0, 1]");
    }
    if (c.k0_fraction < 0.0 || c.k0_fraction > 0.5) fail("k0_fraction must lie in [0, 0.5]");
    if (!(c.lasso_lambda_scale > 0.0)) fail("lasso_lambda_scale must be positive");
    switch (fam) {
    case ExperimentFamily::sparse_recovery:
        for (Index n : ns) {
            if (n < 2) fail("n must be >= 2");
            const bool hadamard =
                c.experiment == ExperimentId::hadamard_small || c.experiment == ExperimentId::exp_decay;
            if (hadamard && !is_power_of_two(n)) fail("n must be a power of two for the Hadamard dictionary");
            const Index p = hadamard ? 2 * n : c.p;
            const Index k0 = c.k0_fraction > 0.0 ? static_cast<Index>(c.k0_fraction * static_cast<double>(n)) : c.k0;
            if (k0 < 1 || k0 > n || k0 > p) fail("k0 must satisfy 1 <= k0 <= min(n, p)");
        }
        if (c.experiment == ExperimentId::exp_decay && c.k0 != 3) fail("exp_decay needs k0 = 3");
        break;
    case ExperimentFamily::mimo:
        if (c.nt < 1 || c.nr < c.nt) fail("MIMO needs nr >= nt >= 1");
        if (c.nr == c.nt) fail("MIMO noise-variance estimate needs nr > nt");
        break;
    case ExperimentFamily::robust_regression:
        for (Index n : ns) {
            if (!(n > c.p && c.p >= 1)) fail("robust regression needs n > p >= 1");
            for (Index no : nouts) {
                if (no < 0 || no > tf_gard_kmax(n, c.p)) fail("n_out must lie in [0, floor((n-p+1)/2)]");
            }
        }
        break;
    }
}

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto t = trim(item);
        if (t.empty()) throw ConfigError("empty list element in '" + s + "'");
        out.push_back(std::move(t));
    }
    return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& s) {
    T value{};
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, value);
    if (ec != std::errc() || ptr != end) throw ConfigError("key '" + key + "': cannot parse '" + s + "'");
    return value;
}

inline bool parse_bool(const std::string& key, const std::string& s) {
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw ConfigError("key '" + key + "': expected true/false, got '" + s + "'");
}

template <class T>
std::vector<T> parse_number_list(const std::string& key, const std::string& s) {
    std::vector<T> out;
    for (const auto& item : split_list(s)) out.push_back(parse_number<T>(key, item));
    return out;
}

template <class T>
std::string str(const T& v) {
    if constexpr (std::is_floating_point_v<T>) {
        std::array<char, 64> buf{};
        auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
        return std::string(buf.data(), res.ptr);
    } else {
        std::ostringstream os;
        os << v;
        return os.str();
    }
}

template <class T>
std::string join(const std::vector<T>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + str(v[i]);
    return out;
}

} // namespace detail

/**
 * Parse the key = value configuration format. '#' starts a comment; lists
 * are comma separated. `experiment` is required and selects the defaults the
 * remaining keys override. Unknown or repeated keys are errors.
 */
inline ExperimentConfig parse_config(std::istream& in) {
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto body = detail::trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        auto key = detail::trim(std::string_view(body).substr(0, eq));
        auto value = detail::trim(std::string_view(body).substr(eq + 1));
        if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        if (!kv.emplace(key, value).second) throw ConfigError("duplicate key '" + key + "'");
    }
    const auto exp_it = kv.find("experiment");
    if (exp_it == kv.end()) throw ConfigError("missing required key 'experiment'");
    ExperimentConfig c = default_config(parse_experiment_id(exp_it->second));
    using detail::parse_number;
    using detail::parse_number_list;
    for (const auto& [key, value] : kv) {
        if (key == "experiment") continue;
        else if (key == "n") c.n = parse_number<Index>(key, value);
        else if (key == "p") c.p = parse_number<Index>(key, value);
        else if (key == "k0") c.k0 = parse_number<Index>(key, value);
        else if (key == "k0_fraction") c.k0_fraction = parse_number<double>(key, value);
        else if (key == "rho") c.rho = parse_number<double>(key, value);
        else if (key == "alpha") c.alpha = parse_number<double>(key, value);
        else if (key == "nt") c.nt = parse_number<Index>(key, value);
        else if (key == "nr") c.nr = parse_number<Index>(key, value);
        else if (key == "n_out") c.n_out = parse_number<Index>(key, value);
        else if (key == "snr_db") c.snr_db = parse_number_list<double>(key, value);
        else if (key == "sir_db") c.sir_db = parse_number<double>(key, value);
        else if (key == "n_list") c.n_list = parse_number_list<Index>(key, value);
        else if (key == "rho_list") c.rho_list = parse_number_list<double>(key, value);
        else if (key == "alpha_list") c.alpha_list = parse_number_list<double>(key, value);
        else if (key == "n_out_list") c.n_out_list = parse_number_list<Index>(key, value);
        else if (key == "trials") c.trials = parse_number<long>(key, value);
        else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
        else if (key == "algorithms") c.algorithms = detail::split_list(value);
        else if (key == "noiseless") c.noiseless = detail::parse_bool(key, value);
        else if (key == "record_timing") c.record_timing = detail::parse_bool(key, value);
        else if (key == "lasso_lambda_scale") c.lasso_lambda_scale = parse_number<double>(key, value);
        else throw ConfigError("unknown key '" + key + "'");
    }
    // a scalar given without its list form replaces the catalog's sweep
    auto given = [&](const char* k) { return kv.count(k) > 0; };
    if (given("n") && !given("n_list")) c.n_list.clear();
    if (given("rho") && !given("rho_list")) c.rho_list.clear();
    if (given("alpha") && !given("alpha_list")) c.alpha_list.clear();
    if (given("n_out") && !given("n_out_list")) c.n_out_list.clear();
    if (given("k0") && !given("k0_fraction")) c.k0_fraction = 0.0;
    validate(c);
    return c;
}

inline ExperimentConfig parse_config(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    return parse_config(in);
}

/// Render a config in the same format parse_config reads.
inline std::string to_text(const ExperimentConfig& c) {
    std::ostringstream os;
    os << "experiment = " << to_string(c.experiment) << "\n";
    const auto fam = family_of(c.experiment);
    if (fam == ExperimentFamily::mimo) {
        os << "nt = " << c.nt << "\nnr = " << c.nr << "\n";
    } else {
        if (c.n_list.empty()) os << "n = " << c.n << "\n";
        else os << "n_list = " << detail::join(c.n_list) << "\n";
        os << "p = " << c.p << "\n";
    }
    if (fam == ExperimentFamily::sparse_recovery) {
        if (c.k0_fraction > 0.0) os << "k0_fraction = " << detail::str(c.k0_fraction) << "\n";
        else os << "k0 = " << c.k0 << "\n";
        if (!c.rho_list.empty()) os << "rho_list = " << detail::join(c.rho_list) << "\n";
        else if (c.rho != 0.0) os << "rho = " << detail::str(c.rho) << "\n";
        if (!c.alpha_list.empty()) os << "alpha_list = " << detail::join(c.alpha_list) << "\n";
        else if (c.alpha != 1.0) os << "alpha = " << detail::str(c.alpha) << "\n";
        if (c.lasso_lambda_scale != 2.0) os << "lasso_lambda_scale = " << detail::str(c.lasso_lambda_scale) << "\n";
    }
    if (fam == ExperimentFamily::robust_regression) {
        os << "sir_db = " << detail::str(c.sir_db) << "\n";
        if (c.n_out_list.empty()) os << "n_out = " << c.n_out << "\n";
        else os << "n_out_list = " << detail::join(c.n_out_list) << "\n";
    }
    os << "snr_db = " << detail::join(c.snr_db) << "\n";
    os << "trials = " << c.trials << "\n";
    os << "seed = " << c.seed << "\n";
    os << "algorithms = " << detail::join(c.algorithms) << "\n";
    if (c.noiseless) os << "noiseless = true\n";
    if (c.record_timing) os << "record_timing = true\n";
    return os.str();
}

} // namespace tfomp
