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
 * Experiment configuration file (YAML).
 *
 *   protocol:                 # one of delta_deg | ratio | magnification | coefficients
 *     delta_deg: 2.0          # post-selection plate offset [deg]
 *   sweep:
 *     deltas_deg: [1, 2, 4]
 *   signal:
 *     thetas: [0.03, 0.05]    # [rad]
 *   source:
 *     rate: 8.0e5             # [counts/s]
 *     duration: 10            # [s]
 *   noise:
 *     visibility: 1.0
 *     lcvr_jitter_std: 0.0    # [rad]
 *     dark_rate: 0.0          # [counts/s]
 *   seeds: {first: 1, count: 100}   # or an explicit list
 *   estimation:
 *     calibration: simulated  # or ideal
 *   compare: {mode: equal-detected, theta: 0.05}
 *   fig2: {magnifications: [3, 5, 10]}
 *   train_check: {delta_min_deg: 0.5, delta_max_deg: 20, delta_points: 20,
 *                 theta_max: 3.0, theta_points: 20}
 *   output: {prefix: results/run}
 *   jobs: 0                   # worker threads, 0 = all cores
 *
 * Every problem is reported as a config error naming the line and field.
 */

#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "wmpa/error.hpp"
#include "wmpa/estimation.hpp"
#include "wmpa/montecarlo.hpp"
#include "wmpa/protocol.hpp"
#include "wmpa/report_io.hpp"
#include "yaml-cpp/yaml.h"

namespace wmpa {

struct ProtocolSpec {
    enum class Kind { none, delta, ratio, magnification, coefficients };
    Kind kind = Kind::none;
    double value = 0.0;      ///< delta [deg], r or h depending on kind
    ProtocolConfig coefficients;

    bool given() const { return kind != Kind::none; }

    ProtocolConfig make(double theta) const {
        switch (kind) {
            case Kind::delta: return ProtocolConfig::from_selection_angle(value, theta);
            case Kind::ratio: return ProtocolConfig::from_ratio(value, theta);
            case Kind::magnification: return ProtocolConfig::from_ratio(1.0 / value - 1.0, theta);
            case Kind::coefficients: {
                ProtocolConfig c = coefficients;
                c.theta = theta;
                return c;
            }
            case Kind::none: break;
        }
        throw Error(ErrorCode::config,
                    "missing protocol setting: give protocol.delta_deg, ratio, magnification or coefficients");
    }
};

struct RunConfig {
    ProtocolSpec protocol;
    std::vector<double> sweep_deltas_deg{1.0, 2.0, 4.0, 8.0};
    std::vector<double> thetas{0.03, 0.05, 0.08, 0.1};
    double rate = 8e5;
    double duration = 10.0;
    NoiseModel noise;
    std::vector<std::uint64_t> seeds{1};
    bool simulated_calibration = true;
    CompareMode compare_mode = CompareMode::equal_detected;
    double compare_theta = 0.05;
    std::vector<double> fig2_magnifications{3.0, 5.0, 10.0};
    double train_delta_min_deg = 0.5;
    double train_delta_max_deg = 20.0;
    int train_delta_points = 20;
    double train_theta_max = 3.0;
    int train_theta_points = 20;
    std::string output_prefix = "wmpa_out";
    int jobs = 0;

    PhotonBudget budget() const { return {rate, duration}; }

    /// Replaces the seed list by `count` consecutive seeds starting at `first`.
    void set_seed_base(std::uint64_t first) {
        const std::size_t n = seeds.size();
        seeds.clear();
        for (std::size_t i = 0; i < n; ++i) seeds.push_back(first + i);
    }
};

namespace detail {

class Section {
  public:
    Section(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {
        if (node_.IsDefined() && !node_.IsNull() && !node_.IsMap()) fail(node_, "", "expected a section (key: value map)");
    }

    bool has(const std::string &key) const { return node_.IsMap() && node_[key]; }

    std::optional<YAML::Node> get(const std::string &key) {
        seen_.insert(key);
        if (!node_.IsMap()) return std::nullopt;
        YAML::Node v = node_[key];
        if (!v) return std::nullopt;
        return v;
    }

    double number(const std::string &key, double fallback) {
        const auto v = get(key);
        return v ? to_number(*v, key) : fallback;
    }

    std::int64_t integer(const std::string &key, std::int64_t fallback) {
        const auto v = get(key);
        return v ? to_integer(*v, key) : fallback;
    }

    std::string text(const std::string &key, const std::string &fallback) {
        const auto v = get(key);
        if (!v) return fallback;
        if (!v->IsScalar()) fail(*v, key, "expected a string");
        return v->Scalar();
    }

    std::vector<double> numbers(const std::string &key, const std::vector<double> &fallback) {
        const auto v = get(key);
        if (!v) return fallback;
        if (!v->IsSequence()) fail(*v, key, "expected a list of numbers");
        std::vector<double> out;
        for (const auto &item : *v) out.push_back(to_number(item, key));
        if (out.empty()) fail(*v, key, "list must not be empty");
        return out;
    }

    Section sub(const std::string &key) {
        const auto v = get(key);
        return Section(v ? *v : YAML::Node(), field(key));
    }

    /// Rejects keys that were never asked for.
    void finish() const {
        if (!node_.IsMap()) return;
        for (const auto &kv : node_) {
            const std::string key = kv.first.as<std::string>();
            if (!seen_.count(key)) fail(kv.first, key, "unknown key");
        }
    }

    std::string field(const std::string &key) const { return path_.empty() ? key : key.empty() ? path_ : path_ + "." + key; }

    [[noreturn]] void fail(const YAML::Node &at, const std::string &key, const std::string &msg) const {
        fail_at(at.Mark(), field(key), msg);
    }

    [[noreturn]] static void fail_at(const YAML::Mark &mark, const std::string &field, const std::string &msg) {
        std::string where = mark.is_null() ? "config" : "config line " + std::to_string(mark.line + 1);
        if (!field.empty()) where += ", field '" + field + "'";
        throw Error(ErrorCode::config, where + ": " + msg);
    }

    const YAML::Node &node() const { return node_; }

    double to_number(const YAML::Node &v, const std::string &key) const {
        if (!v.IsScalar()) fail(v, key, "expected a number");
        double x = 0;
        try {
            x = parse_double(v.Scalar(), field(key));
        } catch (const Error &) {
            fail(v, key, "expected a number, got '" + v.Scalar() + "'");
        }
        if (!std::isfinite(x)) fail(v, key, "must be finite");
        return x;
    }

    std::int64_t to_integer(const YAML::Node &v, const std::string &key) const {
        if (!v.IsScalar()) fail(v, key, "expected an integer");
        try {
            return parse_int(v.Scalar(), field(key));
        } catch (const Error &) {
            fail(v, key, "expected an integer, got '" + v.Scalar() + "'");
        }
    }

  private:
    YAML::Node node_;
    std::string path_;
    std::set<std::string> seen_;
};

/// Runs `check` and re-labels a validation failure as a config error at `at`.
template <typename F>
void validate_at(const Section &s, const YAML::Node &at, const std::string &key, F &&check) {
    try {
        check();
    } catch (const Error &e) {
        std::string msg = e.what();
        const std::string prefix = std::string(to_string(e.code())) + ": ";
        if (msg.rfind(prefix, 0) == 0) msg.erase(0, prefix.size());
        s.fail(at, key, msg);
    }
}

inline void parse_protocol(Section s, RunConfig &cfg) {
    const char *keys[] = {"delta_deg", "ratio", "magnification", "coefficients"};
    int given = 0;
    for (const char *k : keys) given += s.has(k) ? 1 : 0;
    if (given > 1) s.fail(s.node(), "", "give only one of delta_deg, ratio, magnification, coefficients");

    ProtocolSpec &p = cfg.protocol;
    if (const auto v = s.get("delta_deg")) {
        p.kind = ProtocolSpec::Kind::delta;
        p.value = s.to_number(*v, "delta_deg");
    } else if (const auto r = s.get("ratio")) {
        p.kind = ProtocolSpec::Kind::ratio;
        p.value = s.to_number(*r, "ratio");
        validate_at(s, *r, "ratio", [&] { magnification(p.value); });
    } else if (const auto h = s.get("magnification")) {
        p.kind = ProtocolSpec::Kind::magnification;
        p.value = s.to_number(*h, "magnification");
        if (p.value == 0.0) s.fail(*h, "magnification", "must be nonzero");
    } else if (s.has("coefficients")) {
        Section c = s.sub("coefficients");
        p.kind = ProtocolSpec::Kind::coefficients;
        ProtocolConfig &k = p.coefficients;
        k.alpha = c.number("alpha", k.alpha);
        k.beta = c.number("beta", k.beta);
        k.mu = c.number("mu", k.mu);
        k.nu = c.number("nu", k.nu);
        k.gamma = c.number("gamma", k.gamma);
        k.eta = c.number("eta", k.eta);
        c.finish();
        validate_at(c, c.node(), "", [&] { k.validate(); });
    }
    s.finish();
}

inline std::vector<std::uint64_t> parse_seeds(Section &root) {
    const auto v = root.get("seeds");
    if (!v) return {1};
    std::vector<std::uint64_t> seeds;
    if (v->IsSequence()) {
        for (const auto &item : *v) {
            const std::int64_t s = root.to_integer(item, "seeds");
            if (s < 0) root.fail(item, "seeds", "seeds must be >= 0");
            seeds.push_back(static_cast<std::uint64_t>(s));
        }
    } else if (v->IsMap()) {
        Section s(*v, "seeds");
        const std::int64_t first = s.integer("first", 1);
        const std::int64_t count = s.integer("count", 1);
        s.finish();
        if (first < 0) s.fail(*v, "first", "must be >= 0");
        if (count < 1) s.fail(*v, "count", "need at least one seed");
        for (std::int64_t i = 0; i < count; ++i) seeds.push_back(static_cast<std::uint64_t>(first + i));
    } else {
        root.fail(*v, "seeds", "expected a list of seeds or {first, count}");
    }
    if (seeds.empty()) root.fail(*v, "seeds", "need at least one seed");
    return seeds;
}

}  // namespace detail

inline RunConfig parse_run_config(const std::string &text) {
    YAML::Node doc;
    try {
        doc = YAML::Load(text);
    } catch (const YAML::Exception &e) {
        detail::Section::fail_at(e.mark, "", "YAML syntax error: " + e.msg);
    }
    RunConfig cfg;
    detail::Section root(doc, "");

    detail::parse_protocol(root.sub("protocol"), cfg);

    {
        auto s = root.sub("sweep");
        cfg.sweep_deltas_deg = s.numbers("deltas_deg", cfg.sweep_deltas_deg);
        s.finish();
    }
    {
        auto s = root.sub("signal");
        cfg.thetas = s.numbers("thetas", cfg.thetas);
        s.finish();
    }
    {
        auto s = root.sub("source");
        cfg.rate = s.number("rate", cfg.rate);
        cfg.duration = s.number("duration", cfg.duration);
        if (cfg.rate <= 0.0) s.fail(*s.get("rate"), "rate", "must be > 0");
        if (cfg.duration <= 0.0) s.fail(*s.get("duration"), "duration", "must be > 0");
        s.finish();
    }
    {
        auto s = root.sub("noise");
        cfg.noise.visibility = s.number("visibility", cfg.noise.visibility);
        cfg.noise.lcvr_jitter_std = s.number("lcvr_jitter_std", cfg.noise.lcvr_jitter_std);
        cfg.noise.dark_rate = s.number("dark_rate", cfg.noise.dark_rate);
        s.finish();
        detail::validate_at(s, s.node(), "", [&] { cfg.noise.validate(); });
    }
    cfg.seeds = detail::parse_seeds(root);
    {
        auto s = root.sub("estimation");
        const auto v = s.get("calibration");
        if (v) {
            const std::string mode = v->IsScalar() ? v->Scalar() : "";
            if (mode != "simulated" && mode != "ideal") {
                s.fail(*v, "calibration", "expected 'simulated' or 'ideal'");
            }
            cfg.simulated_calibration = mode == "simulated";
        }
        s.finish();
    }
    {
        auto s = root.sub("compare");
        if (const auto v = s.get("mode")) {
            detail::validate_at(s, *v, "mode", [&] {
                cfg.compare_mode = parse_compare_mode(v->IsScalar() ? v->Scalar() : "");
            });
        }
        cfg.compare_theta = s.number("theta", cfg.compare_theta);
        s.finish();
    }
    {
        auto s = root.sub("fig2");
        cfg.fig2_magnifications = s.numbers("magnifications", cfg.fig2_magnifications);
        for (double h : cfg.fig2_magnifications) {
            if (!(h > 0.0)) s.fail(*s.get("magnifications"), "magnifications", "magnifications must be > 0");
        }
        s.finish();
    }
    {
        auto s = root.sub("train_check");
        cfg.train_delta_min_deg = s.number("delta_min_deg", cfg.train_delta_min_deg);
        cfg.train_delta_max_deg = s.number("delta_max_deg", cfg.train_delta_max_deg);
        cfg.train_delta_points = static_cast<int>(s.integer("delta_points", cfg.train_delta_points));
        cfg.train_theta_max = s.number("theta_max", cfg.train_theta_max);
        cfg.train_theta_points = static_cast<int>(s.integer("theta_points", cfg.train_theta_points));
        if (!(cfg.train_delta_min_deg > 0.0 && cfg.train_delta_max_deg < 22.5 &&
              cfg.train_delta_min_deg <= cfg.train_delta_max_deg)) {
            s.fail(s.node(), "", "delta range must satisfy 0 < delta_min_deg <= delta_max_deg < 22.5");
        }
        if (cfg.train_delta_points < 1 || cfg.train_theta_points < 1) {
            s.fail(s.node(), "", "grid needs at least one point per axis");
        }
        s.finish();
    }
    {
        auto s = root.sub("output");
        cfg.output_prefix = s.text("prefix", cfg.output_prefix);
        if (cfg.output_prefix.empty()) s.fail(*s.get("prefix"), "prefix", "must not be empty");
        s.finish();
    }
    if (const auto v = root.get("jobs")) {
        const std::int64_t j = root.to_integer(*v, "jobs");
        if (j < 0) root.fail(*v, "jobs", "must be >= 0");
        cfg.jobs = static_cast<int>(j);
    }
    root.finish();
    return cfg;
}

inline RunConfig load_run_config(const std::string &path) { return parse_run_config(read_file(path)); }

/// The fully resolved configuration, embedded in every output file.
inline Json to_json(const RunConfig &c) {
    Json protocol = Json::object();
    switch (c.protocol.kind) {
        case ProtocolSpec::Kind::delta: protocol["delta_deg"] = c.protocol.value; break;
        case ProtocolSpec::Kind::ratio: protocol["ratio"] = c.protocol.value; break;
        case ProtocolSpec::Kind::magnification: protocol["magnification"] = c.protocol.value; break;
        case ProtocolSpec::Kind::coefficients: {
            Json k = to_json(c.protocol.coefficients);
            k.erase("theta");
            protocol["coefficients"] = k;
            break;
        }
        case ProtocolSpec::Kind::none: break;
    }
    return Json{{"protocol", protocol},
                {"sweep", {{"deltas_deg", c.sweep_deltas_deg}}},
                {"signal", {{"thetas", c.thetas}}},
                {"source", {{"rate", c.rate}, {"duration", c.duration}}},
                {"noise", to_json(c.noise)},
                {"seeds", c.seeds},
                {"estimation", {{"calibration", c.simulated_calibration ? "simulated" : "ideal"}}},
                {"compare", {{"mode", std::string(to_string(c.compare_mode))}, {"theta", c.compare_theta}}},
                {"fig2", {{"magnifications", c.fig2_magnifications}}},
                {"train_check",
                 {{"delta_min_deg", c.train_delta_min_deg},
                  {"delta_max_deg", c.train_delta_max_deg},
                  {"delta_points", c.train_delta_points},
                  {"theta_max", c.train_theta_max},
                  {"theta_points", c.train_theta_points}}},
                {"output", {{"prefix", c.output_prefix}}}};
}

}  // namespace wmpa
