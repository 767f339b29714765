#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <system_error>
#include <vector>

#include "tfomp/errors.hpp"
#include "tfomp/experiment.hpp"

namespace tfomp {

inline constexpr std::array<const char*, 19> kCsvColumns = {
    "experiment", "n",          "p",          "k0",         "rho",         "alpha",     "snr_db",
    "sir_db",     "n_out",      "algorithm",  "trials",     "mse_linear",  "mse_db",    "mse_stderr",
    "pe",         "pe_stderr",  "ser",        "iters_mean", "wall_ms_mean",
};

/// Shortest decimal that round-trips to the same double ('.' separator, locale independent).
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc()) throw IoError("format_double: conversion failed");
    return std::string(buf.data(), ptr);
}

namespace detail {

inline std::string cell(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }
inline std::string cell(const std::optional<Index>& v) { return v ? std::to_string(*v) : std::string(); }

} // namespace detail

/// One CSV row per (experiment, grid point, algorithm), header first.
inline void write_csv(std::ostream& os, std::span<const TrialMetrics> rows) {
    for (std::size_t i = 0; i < kCsvColumns.size(); ++i) os << (i ? "," : "") << kCsvColumns[i];
    os << "\n";
    using detail::cell;
    for (const auto& m : rows) {
        const auto& g = m.point;
        os << m.experiment << ',' << g.n << ',' << g.p << ',' << cell(g.k0) << ',' << cell(g.rho) << ','
           << cell(g.alpha) << ',' << format_double(g.snr_db) << ',' << cell(g.sir_db) << ',' << cell(g.n_out) << ','
           << m.algorithm << ',' << m.trials << ',' << format_double(m.mse_linear) << ','
           << format_double(m.mse_db) << ',' << format_double(m.mse_stderr) << ',' << cell(m.pe) << ','
           << cell(m.pe_stderr) << ',' << cell(m.ser) << ',' << format_double(m.iters_mean) << ','
           << cell(m.wall_ms_mean) << "\n";
    }
}

inline void emit_csv(std::span<const TrialMetrics> rows, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    write_csv(out, rows);
    if (!out) throw IoError("write to '" + path + "' failed");
}

/**
 * Whitespace-separated plot data: one block per algorithm, blocks separated
 * by two blank lines (gnuplot `index`). Missing values are written as NaN.
 */
inline void write_plotdata(std::ostream& os, std::span<const TrialMetrics> rows) {
    std::vector<std::string> algorithms;
    for (const auto& m : rows) {
        if (std::find(algorithms.begin(), algorithms.end(), m.algorithm) == algorithms.end()) {
            algorithms.push_back(m.algorithm);
        }
    }
    auto num = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string("NaN"); };
    auto idx = [](const std::optional<Index>& v) { return v ? std::to_string(*v) : std::string("NaN"); };
    bool first = true;
    for (const auto& alg : algorithms) {
        if (!first) os << "\n\n";
        first = false;
        os << "# algorithm " << alg << "\n";
        os << "# n p k0 rho alpha snr_db n_out mse_db mse_linear pe ser iters_mean\n";
        for (const auto& m : rows) {
            if (m.algorithm != alg) continue;
            const auto& g = m.point;
            os << g.n << ' ' << g.p << ' ' << idx(g.k0) << ' ' << num(g.rho) << ' ' << num(g.alpha) << ' '
               << format_double(g.snr_db) << ' ' << idx(g.n_out) << ' ' << format_double(m.mse_db) << ' '
               << format_double(m.mse_linear) << ' ' << num(m.pe) << ' ' << num(m.ser) << ' '
               << format_double(m.iters_mean) << "\n";
        }
    }
}

inline void emit_plotdata(std::span<const TrialMetrics> rows, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    write_plotdata(out, rows);
    if (!out) throw IoError("write to '" + path + "' failed");
}

} // namespace tfomp
