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

#ifndef UPVS_WORKSPACE_URI_HPP
#define UPVS_WORKSPACE_URI_HPP

#include <filesystem>
#include <optional>
#include <string>

namespace upvs {

/// "file://" URI for an absolute path, percent-encoding reserved bytes.
std::string path_to_uri(const std::filesystem::path& path);
/// Local path of a "file://" URI; nullopt for other schemes.
std::optional<std::filesystem::path> uri_to_path(const std::string& uri);

} // namespace upvs

#endif // UPVS_WORKSPACE_URI_HPP
