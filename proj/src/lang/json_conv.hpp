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

#ifndef UPVS_LANG_JSON_CONV_HPP
#define UPVS_LANG_JSON_CONV_HPP

// LSP-shaped JSON for source positions and diagnostics.

#include <vector>

#include <json.hpp>

#include "lang/source.hpp"

namespace upvs {

void to_json(nlohmann::json& j, const Position& p);
void from_json(const nlohmann::json& j, Position& p);
void to_json(nlohmann::json& j, const Range& r);
void from_json(const nlohmann::json& j, Range& r);
/// {range, severity (1-3), message, source}
void to_json(nlohmann::json& j, const Diagnostic& d);

nlohmann::json diagnostics_json(const std::vector<Diagnostic>& diags);

} // namespace upvs

#endif // UPVS_LANG_JSON_CONV_HPP
