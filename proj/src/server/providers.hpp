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

#ifndef UPVS_SERVER_PROVIDERS_HPP
#define UPVS_SERVER_PROVIDERS_HPP

// Editor features computed from a workspace. Results are LSP-shaped JSON.
// None of these change workspace contents.

#include <string>

#include <json.hpp>

#include "workspace/workspace.hpp"

namespace upvs {

/// Hover markdown for the symbol at `pos`, or null.
nlohmann::json provide_hover(Workspace& ws, const std::string& uri, Position pos);
/// A Location when exact, an array of Locations for candidates, [] otherwise.
nlohmann::json provide_definition(Workspace& ws, const std::string& uri, Position pos);
nlohmann::json provide_completion(Workspace& ws, const std::string& uri, Position pos);
nlohmann::json provide_code_lens(Workspace& ws, const std::string& uri);
/// WorkspaceEdit. Throws Error(InvalidIdentifier | Capture | ReadOnlySymbol |
/// NotTypechecked | NoSymbol).
nlohmann::json provide_rename(Workspace& ws, const std::string& uri, Position pos, const std::string& new_name);

/// {id, kind, theory, decl, obligation, range, status} per TCC of the document.
nlohmann::json tcc_summaries(Workspace& ws, const std::string& uri);
nlohmann::json theory_tree_json(const TheoryTree& tree);

} // namespace upvs

#endif // UPVS_SERVER_PROVIDERS_HPP
