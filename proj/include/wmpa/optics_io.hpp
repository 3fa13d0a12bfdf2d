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
 * Optical train <-> JSON document.
 *
 *   {"elements": [
 *     {"type": "HWP",   "label": "HWP1", "angle_deg": 22.5, "rails": "all"},
 *     {"type": "LCVR",  "label": "LCVR1", "retardance_rad": 0.05, "rails": [1]},
 *     {"type": "BD",    "label": "BD1", "length_mm": 39.7, "walkoff_mm": 4.21},
 *     {"type": "Block", "rails": [-2, -1, 0, 2]},
 *     {"type": "PBS"}]}
 */

#pragma once

#include <string>
#include <variant>

#include "wmpa/optics.hpp"
#include "wmpa/report_io.hpp"

namespace wmpa::optics {

inline Json rails_to_json(const RailSet &r) { return r.all ? Json("all") : Json(r.rails); }

inline RailSet rails_from_json(const Json &j, const std::string &where) {
    if (j.is_string() && j.get<std::string>() == "all") return RailSet::every();
    if (!j.is_array()) throw Error(ErrorCode::validation, where + ".rails: expected \"all\" or a list of integers");
    std::vector<int> rails;
    for (const auto &v : j) {
        if (!v.is_number_integer()) throw Error(ErrorCode::validation, where + ".rails: expected integers");
        rails.push_back(v.get<int>());
    }
    return RailSet::of(std::move(rails));
}

inline Json to_json(const OpticalElement &el) {
    Json j{{"type", element_tag(el.kind)}};
    if (!el.label.empty()) j["label"] = el.label;
    if (const auto *hwp = std::get_if<HalfWavePlate>(&el.kind)) {
        j["angle_deg"] = hwp->angle_deg;
        j["rails"] = rails_to_json(hwp->rails);
    } else if (const auto *lc = std::get_if<LiquidCrystalRetarder>(&el.kind)) {
        j["retardance_rad"] = lc->retardance;
        j["rails"] = rails_to_json(lc->rails);
    } else if (const auto *bd = std::get_if<BeamDisplacer>(&el.kind)) {
        j["length_mm"] = bd->length_mm;
        j["walkoff_mm"] = bd->walkoff_mm;
    } else if (const auto *blk = std::get_if<Block>(&el.kind)) {
        j["rails"] = rails_to_json(blk->rails);
    }
    return j;
}

inline Json to_json(const OpticalTrain &t) {
    Json els = Json::array();
    for (const auto &el : t.elements) els.push_back(to_json(el));
    return Json{{"elements", els}};
}

inline OpticalElement element_from_json(const Json &j, const std::string &where) {
    if (!j.is_object()) throw Error(ErrorCode::validation, where + ": element must be an object");
    if (!j.contains("type") || !j["type"].is_string()) {
        throw Error(ErrorCode::validation, where + ": missing string field 'type'");
    }
    const std::string type = j["type"].get<std::string>();
    OpticalElement el;
    if (j.contains("label")) {
        if (!j["label"].is_string()) throw Error(ErrorCode::validation, where + ".label: expected a string");
        el.label = j["label"].get<std::string>();
    }
    const auto rails = [&]() { return j.contains("rails") ? rails_from_json(j["rails"], where) : RailSet::every(); };
    const auto number = [&](const char *key) { return detail::json_number(j, key, where); };
    const auto allow_only = [&](std::initializer_list<const char *> keys) {
        for (const auto &[k, v] : j.items()) {
            bool ok = k == "type" || k == "label";
            for (const char *key : keys) ok = ok || k == key;
            if (!ok) throw Error(ErrorCode::validation, where + ": unknown field '" + k + "' for " + type);
        }
    };
    if (type == "HWP") {
        allow_only({"angle_deg", "rails"});
        el.kind = HalfWavePlate{number("angle_deg"), rails()};
    } else if (type == "LCVR") {
        allow_only({"retardance_rad", "rails"});
        el.kind = LiquidCrystalRetarder{number("retardance_rad"), rails()};
    } else if (type == "BD") {
        allow_only({"length_mm", "walkoff_mm"});
        BeamDisplacer bd;
        if (j.contains("length_mm")) bd.length_mm = number("length_mm");
        if (j.contains("walkoff_mm")) bd.walkoff_mm = number("walkoff_mm");
        el.kind = bd;
    } else if (type == "PBS") {
        allow_only({});
        el.kind = PolarizingBeamSplitter{};
    } else if (type == "Block") {
        allow_only({"rails"});
        if (!j.contains("rails")) throw Error(ErrorCode::validation, where + ": Block needs 'rails'");
        el.kind = Block{rails()};
    } else {
        throw Error(ErrorCode::validation, where + ": unknown element type '" + type + "'");
    }
    return el;
}

inline OpticalTrain train_from_json(const Json &j) {
    if (!j.is_object() || !j.contains("elements") || !j["elements"].is_array()) {
        throw Error(ErrorCode::validation, "train document needs an 'elements' list");
    }
    OpticalTrain t;
    std::size_t i = 0;
    for (const auto &e : j["elements"]) t.elements.push_back(element_from_json(e, "elements[" + std::to_string(i++) + "]"));
    t.validate();
    return t;
}

inline std::string train_to_text(const OpticalTrain &t) { return to_json(t).dump(2) + "\n"; }

inline OpticalTrain train_from_text(const std::string &text) { return train_from_json(parse_json(text, "train")); }

}  // namespace wmpa::optics
