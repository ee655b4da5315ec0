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

#ifndef UPVS_BATCH_BATCH_HPP
#define UPVS_BATCH_BATCH_HPP

// Headless operations behind the command line. Each works on a workspace
// made of the file's directory (not its subdirectories), so sibling theories
// can be imported and statuses land in that directory's sidecar.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>

#include <json.hpp>

#include "workspace/workspace.hpp"

namespace upvs {

struct BatchWorkspace {
    std::unique_ptr<Workspace> workspace;
    std::string uri; // of the requested file
};

/// Throws Error(IoError) for unreadable files.
BatchWorkspace open_file_workspace(const std::filesystem::path& file);

/// {path, uri, diagnostics, tccs, errors}
nlohmann::json check_file(Workspace& ws, const std::string& uri);

/// Replays "<theory>.<formula>.proof.json" from `scripts_dir` for every
/// formula and TCC of the file and records the statuses.
/// {results: [{theory, formula, kind, status, message}], proved, total, typechecked}
nlohmann::json prove_file(Workspace& ws, const std::string& uri, const std::filesystem::path& scripts_dir);

/// Rendered value of `expr` in `theory` (empty: the file's first theory).
/// Throws Error(NotTypechecked | FormulaNotFound | evaluator errors).
std::string evaluate_in_file(Workspace& ws, const std::string& uri, const std::string& theory,
                             const std::string& expr, std::uint64_t fuel);

/// {declarations: [...], theories: TheoryTree}
nlohmann::json index_json(Workspace& ws);

} // namespace upvs

#endif // UPVS_BATCH_BATCH_HPP
