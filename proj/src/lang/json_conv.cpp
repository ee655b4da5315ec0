/*
 * Copyright (C) 2026 The upvs authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "lang/json_conv.hpp"

namespace upvs {

void to_json(nlohmann::json& j, const Position& p) { j = {{"line", p.line}, {"character", p.character}}; }

void from_json(const nlohmann::json& j, Position& p) {
    p.line = j.at("line").get<int>();
    p.character = j.at("character").get<int>();
}

void to_json(nlohmann::json& j, const Range& r) { j = {{"start", r.start}, {"end", r.end}}; }

void from_json(const nlohmann::json& j, Range& r) {
    r.start = j.at("start").get<Position>();
    r.end = j.at("end").get<Position>();
}

void to_json(nlohmann::json& j, const Diagnostic& d) {
    j = {{"range", d.range}, {"severity", static_cast<int>(d.severity)}, {"message", d.message}, {"source", d.source}};
}

nlohmann::json diagnostics_json(const std::vector<Diagnostic>& diags) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& d : diags) out.push_back(d);
    return out;
}

} // namespace upvs
