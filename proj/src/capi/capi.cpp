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

#include "upvs/upvs.h"

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>

#include "batch/batch.hpp"
#include "common/error.hpp"
#include "eval/evaluator.hpp"
#include "server/server.hpp"

using nlohmann::json;

struct upvs_workspace {
    std::unique_ptr<upvs::Workspace> workspace;
    std::string uri;
};

struct upvs_server {
    upvs::ServerOptions options;
    std::atomic<bool> stop{false};
};

namespace {

thread_local std::string last_error;
thread_local std::string last_error_data = "null";

char* dup(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

std::string dump(const json& j) { return j.dump(2, ' ', false, json::error_handler_t::replace) + "\n"; }

template <class F>
upvs_status guarded(F&& body) {
    last_error.clear();
    last_error_data = "null";
    try {
        body();
        return UPVS_OK;
    } catch (const upvs::Error& e) {
        last_error = e.what();
        last_error_data = e.data().dump(-1, ' ', false, json::error_handler_t::replace);
        return static_cast<upvs_status>(e.code());
    } catch (const std::exception& e) {
        last_error = e.what();
        return UPVS_ERR_INTERNAL;
    }
}

void need(bool ok, const char* what) {
    if (!ok) throw upvs::Error(upvs::ErrorCode::InvalidArgument, what);
}

} // namespace

extern "C" {

const char* upvs_version(void) { return "0.1.0"; }

const char* upvs_last_error(void) { return last_error.c_str(); }

const char* upvs_last_error_data(void) { return last_error_data.c_str(); }

void upvs_free_string(char* s) { std::free(s); }

upvs_status upvs_workspace_open_file(const char* file, upvs_workspace** out) {
    return guarded([&] {
        need(file && out, "file and out are required");
        auto bw = upvs::open_file_workspace(file);
        *out = new upvs_workspace{std::move(bw.workspace), std::move(bw.uri)};
    });
}

upvs_status upvs_workspace_open_dir(const char* root, upvs_workspace** out) {
    return guarded([&] {
        need(root && out, "root and out are required");
        auto ws = std::make_unique<upvs::Workspace>(root);
        ws->scan();
        *out = new upvs_workspace{std::move(ws), ""};
    });
}

void upvs_workspace_destroy(upvs_workspace* ws) { delete ws; }

const char* upvs_workspace_uri(const upvs_workspace* ws) { return ws ? ws->uri.c_str() : ""; }

upvs_status upvs_workspace_check(upvs_workspace* ws, char** json_out) {
    return guarded([&] {
        need(ws && json_out && !ws->uri.empty(), "a file workspace and json_out are required");
        *json_out = dup(dump(upvs::check_file(*ws->workspace, ws->uri)));
    });
}

upvs_status upvs_workspace_prove(upvs_workspace* ws, const char* scripts_dir, char** json_out) {
    return guarded([&] {
        need(ws && json_out && !ws->uri.empty(), "a file workspace and json_out are required");
        std::filesystem::path dir = scripts_dir ? std::filesystem::path(scripts_dir) : ws->workspace->root();
        *json_out = dup(dump(upvs::prove_file(*ws->workspace, ws->uri, dir)));
    });
}

upvs_status upvs_workspace_eval(upvs_workspace* ws, const char* theory, const char* expr, uint64_t fuel,
                                char** value_out) {
    return guarded([&] {
        need(ws && expr && value_out && !ws->uri.empty(), "a file workspace, expr and value_out are required");
        *value_out = dup(upvs::evaluate_in_file(*ws->workspace, ws->uri, theory ? theory : "", expr,
                                                fuel ? fuel : upvs::kDefaultFuel));
    });
}

upvs_status upvs_workspace_index(upvs_workspace* ws, char** json_out) {
    return guarded([&] {
        need(ws && json_out, "ws and json_out are required");
        *json_out = dup(dump(upvs::index_json(*ws->workspace)));
    });
}

upvs_status upvs_server_create(const upvs_server_options* options, upvs_server** out) {
    return guarded([&] {
        need(out != nullptr, "out is required");
        auto s = std::make_unique<upvs_server>();
        if (options) {
            if (options->debounce_ms > 0) s->options.debounce_ms = options->debounce_ms;
            if (options->pool_size > 0) s->options.pool_size = static_cast<std::size_t>(options->pool_size);
            if (options->eval_fuel > 0) s->options.eval_fuel = options->eval_fuel;
            if (options->scripts_dir) s->options.scripts_dir = options->scripts_dir;
            if (options->root) s->options.root = options->root;
        }
        *out = s.release();
    });
}

upvs_status upvs_server_serve_fds(upvs_server* server, int in_fd, int out_fd, int* exit_code) {
    return guarded([&] {
        need(server && exit_code, "server and exit_code are required");
        *exit_code = upvs::serve_fds(server->options, in_fd, out_fd, &server->stop);
    });
}

upvs_status upvs_server_serve_tcp(upvs_server* server, int port, void (*listening)(int, void*), void* user,
                                  int* exit_code) {
    return guarded([&] {
        need(server && exit_code, "server and exit_code are required");
        need(port >= 0 && port <= 65535, "port out of range");
        *exit_code = upvs::serve_tcp(server->options, port, &server->stop, [&](int p) {
            if (listening) listening(p, user);
        });
    });
}

void upvs_server_request_stop(upvs_server* server) {
    if (server) server->stop.store(true);
}

void upvs_server_destroy(upvs_server* server) { delete server; }

} // extern "C"
