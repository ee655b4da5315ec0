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

#ifndef UPVS_TESTS_LSP_HARNESS_HPP
#define UPVS_TESTS_LSP_HARNESS_HPP

// Drives a Server in-process with a virtual clock and records everything it
// sends. Requests wait for asynchronous answers before returning.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "server/server.hpp"
#include "workspace/uri.hpp"

namespace upvs::test {

class LspHarness {
public:
    explicit LspHarness(ServerOptions options = {}) : clock_(std::make_shared<ManualScheduler>()) {
        server_ = std::make_unique<Server>(
            options,
            [this](const nlohmann::json& m) {
                std::lock_guard lock(mu_);
                if (on_message) on_message(m);
                sent_.push_back(m);
            },
            clock_);
    }

    Server& server() { return *server_; }
    ManualScheduler& clock() { return *clock_; }

    // Called (under the harness lock) for each outgoing message.
    std::function<void(const nlohmann::json&)> on_message;

    nlohmann::json initialize(const std::filesystem::path& root = {}, nlohmann::json init_options = nullptr) {
        nlohmann::json params = {{"capabilities", nlohmann::json::object()}};
        if (!root.empty()) params["rootUri"] = path_to_uri(root);
        if (!init_options.is_null()) params["initializationOptions"] = init_options;
        auto r = request("initialize", params);
        notify("initialized", nlohmann::json::object());
        return r;
    }

    /// The full response message for a new request.
    nlohmann::json request(const std::string& method, const nlohmann::json& params) {
        std::int64_t id = ++next_id_;
        server_->receive({{"jsonrpc", "2.0"}, {"id", id}, {"method", method}, {"params", params}});
        server_->wait_idle();
        return response(id);
    }

    /// Sends a request without waiting; returns its id.
    std::int64_t send_request(const std::string& method, const nlohmann::json& params) {
        std::int64_t id = ++next_id_;
        server_->receive({{"jsonrpc", "2.0"}, {"id", id}, {"method", method}, {"params", params}});
        return id;
    }

    /// The single response with this id; throws unless exactly one exists.
    nlohmann::json response(const nlohmann::json& id) {
        std::lock_guard lock(mu_);
        const nlohmann::json* found = nullptr;
        int count = 0;
        for (const auto& m : sent_) {
            if (m.contains("id") && m["id"] == id && !m.contains("method")) {
                found = &m;
                ++count;
            }
        }
        if (count != 1) throw std::runtime_error("expected one response for id " + id.dump() + ", got " +
                                                 std::to_string(count));
        return *found;
    }

    nlohmann::json result(const std::string& method, const nlohmann::json& params) {
        auto r = request(method, params);
        if (!r.contains("result")) throw std::runtime_error(method + " failed: " + r.dump());
        return r["result"];
    }

    /// The error code of a request expected to fail, or 0.
    int error_code(const std::string& method, const nlohmann::json& params) {
        auto r = request(method, params);
        return r.contains("error") ? r["error"]["code"].get<int>() : 0;
    }

    void notify(const std::string& method, const nlohmann::json& params) {
        server_->receive({{"jsonrpc", "2.0"}, {"method", method}, {"params", params}});
    }

    void open(const std::string& uri, const std::string& text, int version = 1) {
        notify("textDocument/didOpen",
               {{"textDocument", {{"uri", uri}, {"languageId", "pvs"}, {"version", version}, {"text", text}}}});
    }

    void change(const std::string& uri, const std::string& text, int version) {
        notify("textDocument/didChange",
               {{"textDocument", {{"uri", uri}, {"version", version}}}, {"contentChanges", {{{"text", text}}}}});
    }

    /// Notifications with this method sent so far.
    std::vector<nlohmann::json> notifications(const std::string& method) {
        std::lock_guard lock(mu_);
        std::vector<nlohmann::json> out;
        for (const auto& m : sent_) {
            if (m.contains("method") && m["method"] == method) out.push_back(m["params"]);
        }
        return out;
    }

    std::vector<nlohmann::json> sent() {
        std::lock_guard lock(mu_);
        return sent_;
    }

    void clear() {
        std::lock_guard lock(mu_);
        sent_.clear();
    }

private:
    std::shared_ptr<ManualScheduler> clock_;
    std::mutex mu_;
    std::vector<nlohmann::json> sent_;
    std::int64_t next_id_ = 0;
    std::unique_ptr<Server> server_; // last: destroyed before the sink state
};

inline nlohmann::json text_position(const std::string& uri, int line, int character) {
    return {{"textDocument", {{"uri", uri}}}, {"position", {{"line", line}, {"character", character}}}};
}

/// LSP position of the `nth` occurrence of `needle` in ASCII `text`, plus `shift` columns.
inline nlohmann::json find_position(const std::string& text, const std::string& needle, int shift = 0, int nth = 0) {
    std::size_t at = std::string::npos;
    std::size_t from = 0;
    for (int i = 0; i <= nth; ++i) {
        at = text.find(needle, from);
        if (at == std::string::npos) throw std::runtime_error("'" + needle + "' not found");
        from = at + 1;
    }
    int line = 0;
    std::size_t line_start = 0;
    for (std::size_t i = 0; i < at; ++i) {
        if (text[i] == '\n') {
            ++line;
            line_start = i + 1;
        }
    }
    return {{"line", line}, {"character", static_cast<int>(at - line_start) + shift}};
}

} // namespace upvs::test

#endif // UPVS_TESTS_LSP_HARNESS_HPP
