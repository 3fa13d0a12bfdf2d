// Copyright 2026 The WMPA Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file
 * JSON documents and CSV tables for configurations, counts and estimates.
 *
 * CountData has a flat record form (ordered key/value pairs) that is written
 * either as one CSV row or as a JSON object and read back for replay.
 */

#pragma once

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "wmpa/error.hpp"
#include "wmpa/estimation.hpp"
#include "wmpa/montecarlo.hpp"
#include "wmpa/protocol.hpp"

namespace wmpa {

using Json = nlohmann::ordered_json;

/// Shortest text that reads back to the same double ("%.17g").
inline std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline double parse_double(const std::string &s, const std::string &field) {
    if (s == "nan") return std::nan("");
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    std::size_t pos = 0;
    double v = 0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception &) {
        pos = 0;
    }
    if (pos == 0 || pos != s.size()) throw Error(ErrorCode::validation, field + ": not a number: '" + s + "'");
    return v;
}

inline std::int64_t parse_int(const std::string &s, const std::string &field) {
    std::size_t pos = 0;
    long long v = 0;
    try {
        v = std::stoll(s, &pos);
    } catch (const std::exception &) {
        pos = 0;
    }
    if (pos == 0 || pos != s.size()) throw Error(ErrorCode::validation, field + ": not an integer: '" + s + "'");
    return v;
}

inline std::uint64_t parse_uint(const std::string &s, const std::string &field) {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
        if (!s.empty() && s[0] != '-') v = std::stoull(s, &pos);
    } catch (const std::exception &) {
        pos = 0;
    }
    if (pos == 0 || pos != s.size()) throw Error(ErrorCode::validation, field + ": not an unsigned integer: '" + s + "'");
    return v;
}

// ---------------------------------------------------------------- JSON

inline Json to_json(const ProtocolConfig &c) {
    return Json{{"alpha", c.alpha}, {"beta", c.beta},   {"mu", c.mu},      {"nu", c.nu},
                {"gamma", c.gamma}, {"eta", c.eta},     {"theta", c.theta}};
}

inline Json to_json(const NoiseModel &n) {
    return Json{{"visibility", n.visibility}, {"lcvr_jitter_std", n.lcvr_jitter_std}, {"dark_rate", n.dark_rate}};
}

inline Json to_json(const CalibrationResult &c) {
    return Json{{"p_hat", c.p_hat},     {"r_hat", c.r_hat},
                {"delta_hat_deg", c.delta_hat_deg}, {"h_hat", c.h_hat},
                {"std_error_p", c.std_error_p}};
}

inline Json to_json(const PhaseEstimate &e) {
    return Json{{"kappa_hat", e.kappa_hat},
                {"theta_hat", e.theta_hat},
                {"sigma_x_hat", e.sigma_x_hat},
                {"std_error_sigma_x", e.std_error_sigma_x},
                {"std_error_kappa", e.std_error_kappa},
                {"analytic_sensitivity", e.analytic_sensitivity},
                {"std_error_theta", e.std_error_theta},
                {"clamped", e.clamped},
                {"n_detected", e.n_detected}};
}

/// NaN is not representable in JSON; it is written as null.
inline Json number_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

inline Json to_json(const ArmSummary &s) {
    return Json{{"arm", s.arm},
                {"h", s.h},
                {"n_runs", s.n_runs},
                {"mean_theta_hat", number_or_null(s.mean_theta_hat)},
                {"bias", number_or_null(s.bias)},
                {"empirical_std", number_or_null(s.empirical_std)},
                {"mean_std_error", number_or_null(s.mean_std_error)},
                {"analytic_sensitivity", number_or_null(s.analytic_sensitivity)},
                {"precision_floor", s.precision_floor},
                {"mean_n_detected", s.mean_n_detected},
                {"n_clamped", s.n_clamped}};
}

inline Json to_json(const ComparisonReport &r) {
    return Json{{"theta", r.theta},
                {"mode", std::string(to_string(r.mode))},
                {"budget", {{"rate", r.budget.rate}, {"duration", r.budget.duration}, {"photons", r.budget.photons()}}},
                {"noise", to_json(r.noise)},
                {"calibration", to_json(r.calibration)},
                {"amplified", to_json(r.amplified)},
                {"conventional", to_json(r.conventional)},
                {"std_ratio", number_or_null(r.std_ratio())},
                {"floor_ratio", number_or_null(r.floor_ratio())}};
}

namespace detail {

inline const Json &require_field(const Json &j, const char *key, const std::string &where) {
    if (!j.is_object() || !j.contains(key)) {
        throw Error(ErrorCode::validation, where + ": missing field '" + key + "'");
    }
    return j.at(key);
}

inline double json_number(const Json &j, const char *key, const std::string &where) {
    const Json &v = require_field(j, key, where);
    if (!v.is_number()) throw Error(ErrorCode::validation, where + "." + key + ": expected a number");
    return v.get<double>();
}

}  // namespace detail

inline ProtocolConfig protocol_config_from_json(const Json &j) {
    ProtocolConfig c;
    c.alpha = detail::json_number(j, "alpha", "config");
    c.beta = detail::json_number(j, "beta", "config");
    c.mu = detail::json_number(j, "mu", "config");
    c.nu = detail::json_number(j, "nu", "config");
    c.gamma = detail::json_number(j, "gamma", "config");
    c.eta = detail::json_number(j, "eta", "config");
    c.theta = detail::json_number(j, "theta", "config");
    c.validate();
    return c;
}

inline NoiseModel noise_model_from_json(const Json &j) {
    NoiseModel n;
    n.visibility = detail::json_number(j, "visibility", "noise");
    n.lcvr_jitter_std = detail::json_number(j, "lcvr_jitter_std", "noise");
    n.dark_rate = detail::json_number(j, "dark_rate", "noise");
    n.validate();
    return n;
}

// ------------------------------------------------------ CountData record

using FlatRecord = std::vector<std::pair<std::string, std::string>>;

/// Every field of a run, config and noise included, in a fixed order.
inline FlatRecord to_flat_record(const CountData &c) {
    return {
        {"seed", std::to_string(c.seed)},
        {"n_plus", std::to_string(c.n_plus)},
        {"n_minus", std::to_string(c.n_minus)},
        {"n_input", std::to_string(c.n_input)},
        {"n_survivors", std::to_string(c.n_survivors)},
        {"rate", format_double(c.rate)},
        {"duration", format_double(c.duration)},
        {"fixed_detected", c.fixed_detected ? "1" : "0"},
        {"theta_applied", format_double(c.theta_applied)},
        {"alpha", format_double(c.config.alpha)},
        {"beta", format_double(c.config.beta)},
        {"mu", format_double(c.config.mu)},
        {"nu", format_double(c.config.nu)},
        {"gamma", format_double(c.config.gamma)},
        {"eta", format_double(c.config.eta)},
        {"theta", format_double(c.config.theta)},
        {"visibility", format_double(c.noise.visibility)},
        {"lcvr_jitter_std", format_double(c.noise.lcvr_jitter_std)},
        {"dark_rate", format_double(c.noise.dark_rate)},
    };
}

inline CountData count_data_from_record(const std::map<std::string, std::string> &rec) {
    const auto get = [&rec](const char *key) -> const std::string & {
        const auto it = rec.find(key);
        if (it == rec.end()) throw Error(ErrorCode::validation, std::string("count record: missing field '") + key + "'");
        return it->second;
    };
    CountData c;
    c.seed = parse_uint(get("seed"), "seed");
    c.n_plus = parse_int(get("n_plus"), "n_plus");
    c.n_minus = parse_int(get("n_minus"), "n_minus");
    c.n_input = parse_int(get("n_input"), "n_input");
    c.n_survivors = parse_int(get("n_survivors"), "n_survivors");
    c.rate = parse_double(get("rate"), "rate");
    c.duration = parse_double(get("duration"), "duration");
    const std::string &fd = get("fixed_detected");
    if (fd != "0" && fd != "1") throw Error(ErrorCode::validation, "fixed_detected: expected 0 or 1");
    c.fixed_detected = fd == "1";
    c.theta_applied = parse_double(get("theta_applied"), "theta_applied");
    c.config.alpha = parse_double(get("alpha"), "alpha");
    c.config.beta = parse_double(get("beta"), "beta");
    c.config.mu = parse_double(get("mu"), "mu");
    c.config.nu = parse_double(get("nu"), "nu");
    c.config.gamma = parse_double(get("gamma"), "gamma");
    c.config.eta = parse_double(get("eta"), "eta");
    c.config.theta = parse_double(get("theta"), "theta");
    c.noise.visibility = parse_double(get("visibility"), "visibility");
    c.noise.lcvr_jitter_std = parse_double(get("lcvr_jitter_std"), "lcvr_jitter_std");
    c.noise.dark_rate = parse_double(get("dark_rate"), "dark_rate");
    if (c.n_plus < 0 || c.n_minus < 0 || c.n_input < 0 || c.n_survivors < 0) {
        throw Error(ErrorCode::validation, "count record: negative count");
    }
    c.config.validate();
    c.noise.validate();
    return c;
}

inline Json to_json(const CountData &c) {
    Json j = Json::object();
    for (const auto &[k, v] : to_flat_record(c)) j[k] = v;
    return j;
}

/// Values are stored as strings so that 64-bit seeds and doubles survive exactly.
inline CountData count_data_from_json(const Json &j) {
    if (!j.is_object()) throw Error(ErrorCode::validation, "count record must be a JSON object");
    std::map<std::string, std::string> rec;
    for (const auto &[k, v] : j.items()) {
        if (!v.is_string()) throw Error(ErrorCode::validation, "count record field '" + k + "' must be a string");
        rec[k] = v.get<std::string>();
    }
    return count_data_from_record(rec);
}

// ------------------------------------------------------------------ CSV

/// A table with a `#`-prefixed metadata header. Cells never contain commas
/// (numbers, identifiers), so no quoting is done.
class CsvTable {
  public:
    explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    void add_meta(const std::string &key, const std::string &value) { meta_.emplace_back(key, value); }

    void add_row(std::vector<std::string> cells) {
        if (cells.size() != columns_.size()) {
            throw Error(ErrorCode::validation, "CSV row has " + std::to_string(cells.size()) + " cells, expected " +
                                                   std::to_string(columns_.size()));
        }
        rows_.push_back(std::move(cells));
    }

    const std::vector<std::string> &columns() const { return columns_; }
    std::size_t size() const { return rows_.size(); }

    std::string str() const {
        std::ostringstream out;
        for (const auto &[k, v] : meta_) out << "# " << k << ": " << v << "\n";
        write_line(out, columns_);
        for (const auto &r : rows_) write_line(out, r);
        return out.str();
    }

  private:
    static void write_line(std::ostringstream &out, const std::vector<std::string> &cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
        out << "\n";
    }

    std::vector<std::string> columns_;
    std::vector<std::pair<std::string, std::string>> meta_;
    std::vector<std::vector<std::string>> rows_;
};

struct ParsedCsv {
    std::vector<std::pair<std::string, std::string>> meta;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    std::map<std::string, std::string> row_map(std::size_t i) const {
        std::map<std::string, std::string> m;
        for (std::size_t c = 0; c < columns.size(); ++c) m[columns[c]] = rows.at(i).at(c);
        return m;
    }
};

inline ParsedCsv parse_csv(const std::string &text) {
    ParsedCsv p;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    const auto split = [](const std::string &s) {
        std::vector<std::string> out;
        std::string cell;
        std::istringstream ss(s);
        while (std::getline(ss, cell, ',')) out.push_back(cell);
        if (!s.empty() && s.back() == ',') out.emplace_back();
        return out;
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto colon = line.find(": ");
            if (colon != std::string::npos) p.meta.emplace_back(line.substr(2, colon - 2), line.substr(colon + 2));
            continue;
        }
        auto cells = split(line);
        if (p.columns.empty()) {
            p.columns = std::move(cells);
        } else if (cells.size() != p.columns.size()) {
            throw Error(ErrorCode::validation, "CSV line " + std::to_string(line_no) + ": expected " +
                                                   std::to_string(p.columns.size()) + " cells");
        } else {
            p.rows.push_back(std::move(cells));
        }
    }
    return p;
}

inline CsvTable count_data_table(const std::vector<CountData> &runs) {
    FlatRecord proto = to_flat_record(CountData{});
    std::vector<std::string> cols;
    for (const auto &kv : proto) cols.push_back(kv.first);
    CsvTable t(cols);
    for (const auto &c : runs) {
        std::vector<std::string> cells;
        for (auto &kv : to_flat_record(c)) cells.push_back(std::move(kv.second));
        t.add_row(std::move(cells));
    }
    return t;
}

// ---------------------------------------------------------------- files

inline std::string read_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string &path, const std::string &content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io, "cannot open '" + path + "' for writing");
    out << content;
    if (!out.flush()) throw Error(ErrorCode::io, "write to '" + path + "' failed");
}

inline Json parse_json(const std::string &text, const std::string &what) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error &e) {
        throw Error(ErrorCode::validation, what + ": " + e.what());
    }
}

}  // namespace wmpa
