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

#include "server/server.hpp"

#include <cerrno>
#include <cstring>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include "common/error.hpp"
#include "eval/evaluator.hpp"
#include "lang/json_conv.hpp"
#include "server/providers.hpp"
#include "server/transport.hpp"
#include "workspace/uri.hpp"

namespace upvs {

using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct ParamError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

const json& need(const json& params, const char* key) {
    if (!params.is_object() || !params.contains(key)) throw ParamError(std::string("missing parameter '") + key + "'");
    return params[key];
}

std::string need_string(const json& params, const char* key) {
    const json& v = need(params, key);
    if (!v.is_string()) throw ParamError(std::string("parameter '") + key + "' must be a string");
    return v.get<std::string>();
}

std::string opt_string(const json& params, const char* key) {
    if (!params.is_object() || !params.contains(key) || params[key].is_null()) return {};
    return need_string(params, key);
}

std::string text_document_uri(const json& params) { return need_string(need(params, "textDocument"), "uri"); }

Position need_position(const json& params) {
    const json& p = need(params, "position");
    if (!p.is_object() || !p.contains("line") || !p.contains("character") || !p["line"].is_number_integer() ||
        !p["character"].is_number_integer())
        throw ParamError("'position' must be {line, character}");
    return p.get<Position>();
}

std::string id_key(const json& id) { return id.dump(); }

json outcome_json(const CommandOutcome& out) {
    json result = {{"outcome", to_string(out.result.outcome)},
                   {"children", out.result.children},
                   {"active", out.result.active ? json(*out.result.active) : json(nullptr)},
                   {"effective", out.result.effective},
                   {"message", out.result.message}};
    return {{"result", std::move(result)},
            {"delta", out.delta},
            {"sequent", out.sequent},
            {"proved", out.proved},
            {"state", to_string(out.state)}};
}

// The theory a request refers to: named explicitly, or the one of `uri`
// declaring `formula`, or the first theory of `uri`.
std::string pick_theory(Workspace& ws, const json& params, const std::string& uri, const std::string& formula) {
    std::string theory = opt_string(params, "theory");
    if (!theory.empty()) return theory;
    if (uri.empty()) throw ParamError("either 'uri' or 'theory' is required");
    auto unit = ws.document(uri);
    if (!unit) throw Error(ErrorCode::DocumentNotOpen, "unknown document " + uri, {{"uri", uri}});
    for (const auto& th : unit->parse.ast.theories) {
        if (formula.empty()) return th.name;
        for (const auto& d : th.decls) {
            if (d->name == formula) return th.name;
        }
        for (const auto& r : ws.typecheck_document(uri)) {
            if (r->theory->name == th.name && r->find_tcc(formula)) return th.name;
        }
    }
    if (formula.empty()) throw Error(ErrorCode::FormulaNotFound, uri + " declares no theory", {{"uri", uri}});
    throw Error(ErrorCode::FormulaNotFound, "no formula '" + formula + "' in " + uri, {{"formula", formula}});
}

std::string apply_change(const std::string& text, const json& change) {
    if (!change.contains("range")) return need_string(change, "text");
    Range r = change["range"].get<Range>();
    LineIndex lines(text);
    std::size_t from = lines.offset_of(r.start);
    std::size_t to = std::max(from, lines.offset_of(r.end));
    return text.substr(0, from) + need_string(change, "text") + text.substr(to);
}

} // namespace

const std::vector<std::string>& custom_methods() {
    static const std::vector<std::string> names = {"pvs/typecheck",   "pvs/theories",   "pvs/prove-formula",
                                                   "pvs/proof-command", "pvs/quit-proof", "pvs/evaluate",
                                                   "pvs/proof-tree"};
    return names;
}

const std::map<std::string, Server::Handler>& Server::handlers() {
    static const std::map<std::string, Handler> table = {
        {"shutdown", &Server::shutdown},
        {"textDocument/hover", &Server::hover},
        {"textDocument/definition", &Server::definition},
        {"textDocument/completion", &Server::completion},
        {"textDocument/codeLens", &Server::code_lens},
        {"textDocument/rename", &Server::rename},
        {"pvs/typecheck", &Server::pvs_typecheck},
        {"pvs/theories", &Server::pvs_theories},
        {"pvs/prove-formula", &Server::pvs_prove_formula},
        {"pvs/proof-command", &Server::pvs_proof_command},
        {"pvs/quit-proof", &Server::pvs_quit_proof},
        {"pvs/evaluate", &Server::pvs_evaluate},
        {"pvs/proof-tree", &Server::pvs_proof_tree},
    };
    return table;
}

Server::Server(ServerOptions options, Sink sink, std::shared_ptr<Scheduler> scheduler)
    : options_(std::move(options)), sink_(std::move(sink)), scheduler_(std::move(scheduler)) {
    if (!scheduler_) scheduler_ = std::make_shared<ThreadScheduler>();
}

Server::~Server() { stop(); }

void Server::stop() {
    {
        std::lock_guard lock(docs_mu_);
        for (auto& [uri, doc] : docs_) {
            if (doc.timer) scheduler_->cancel(*doc.timer);
            doc.timer.reset();
            doc.seq = 0;
        }
    }
    // Joins the timer thread when it is ours.
    scheduler_.reset();
    if (sessions_) {
        sessions_->abandon_all();
        sessions_.reset();
    }
}

void Server::send(const json& message) {
    std::lock_guard lock(sink_mu_);
    sink_(message);
}

void Server::respond(const json& id, json result) {
    send({{"jsonrpc", "2.0"}, {"id", id}, {"result", std::move(result)}});
}

void Server::respond_error(const json& id, int code, const std::string& message, const json& data) {
    json error = {{"code", code}, {"message", message}};
    if (!data.is_null()) error["data"] = data;
    send({{"jsonrpc", "2.0"}, {"id", id}, {"error", std::move(error)}});
}

void Server::respond_exception(const json& id, std::exception_ptr err) {
    try {
        std::rethrow_exception(err);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::Cancelled) {
            respond_error(id, rpc::kRequestCancelled, e.what(), {{"code", static_cast<int>(e.code())}});
        } else {
            respond_error(id, static_cast<int>(e.code()), e.what(), e.data());
        }
    } catch (const ParamError& e) {
        respond_error(id, rpc::kInvalidParams, e.what());
    } catch (const json::exception& e) {
        respond_error(id, rpc::kInvalidParams, e.what());
    } catch (const std::exception& e) {
        respond_error(id, rpc::kInternalError, e.what());
    }
}

std::shared_ptr<std::atomic<bool>> Server::begin_async(const json& id) {
    std::lock_guard lock(pending_mu_);
    return pending_[id_key(id)].cancel;
}

void Server::finish_async(const json& id) {
    std::lock_guard lock(pending_mu_);
    pending_.erase(id_key(id));
    idle_cv_.notify_all();
}

void Server::wait_idle() {
    std::unique_lock lock(pending_mu_);
    idle_cv_.wait(lock, [this] { return pending_.empty(); });
}

void Server::receive_text(const std::string& body) {
    json message;
    try {
        message = json::parse(body);
    } catch (const json::parse_error& e) {
        respond_error(nullptr, rpc::kParseError, e.what());
        return;
    }
    receive(message);
}

void Server::receive(const json& message) {
    if (exited_) return;
    if (!message.is_object() || !message.contains("method")) {
        // Responses to server-initiated requests are not expected; anything
        // else that is not a request is invalid.
        if (message.is_object() && (message.contains("result") || message.contains("error"))) return;
        respond_error(message.is_object() && message.contains("id") ? message["id"] : json(nullptr),
                      rpc::kInvalidRequest, "not a JSON-RPC request");
        return;
    }
    const json& method = message["method"];
    bool has_id = message.contains("id");
    json id = has_id ? message["id"] : json(nullptr);
    if (has_id && !id.is_string() && !id.is_number_integer()) {
        respond_error(nullptr, rpc::kInvalidRequest, "request id must be a string or an integer");
        return;
    }
    if (!method.is_string()) {
        if (has_id) respond_error(id, rpc::kInvalidRequest, "method must be a string");
        return;
    }
    json params = message.contains("params") ? message["params"] : json::object();
    if (has_id)
        handle_request(id, method.get<std::string>(), params);
    else
        handle_notification(method.get<std::string>(), params);
}

void Server::handle_request(const json& id, const std::string& method, const json& params) {
    if (method == "initialize") {
        if (initialized_) {
            respond_error(id, static_cast<int>(ErrorCode::DoubleInitialize), "server already initialized");
            return;
        }
    } else if (!initialized_) {
        respond_error(id, rpc::kServerNotInitialized, "server not initialized");
        return;
    } else if (shutdown_) {
        respond_error(id, rpc::kInvalidRequest, "server is shutting down");
        return;
    }
    Handler handler = nullptr;
    if (method == "initialize") {
        handler = &Server::initialize;
    } else {
        auto it = handlers().find(method);
        if (it == handlers().end()) {
            respond_error(id, rpc::kMethodNotFound, "unknown method '" + method + "'");
            return;
        }
        handler = it->second;
    }
    try {
        if (auto result = (this->*handler)(id, params)) respond(id, std::move(*result));
    } catch (...) {
        respond_exception(id, std::current_exception());
    }
}

void Server::handle_notification(const std::string& method, const json& params) {
    if (method == "exit") {
        exit_code_ = shutdown_ ? 0 : 1;
        exited_ = true;
        return;
    }
    if (!initialized_ || shutdown_) return;
    try {
        if (method == "textDocument/didOpen") {
            did_open(params);
        } else if (method == "textDocument/didChange") {
            did_change(params);
        } else if (method == "textDocument/didClose") {
            did_close(params);
        } else if (method == "$/cancelRequest") {
            const json& id = need(params, "id");
            std::lock_guard lock(pending_mu_);
            auto it = pending_.find(id_key(id));
            if (it != pending_.end()) it->second.cancel->store(true);
        }
        // Other notifications (initialized, didSave, $/setTrace, ...) need no action.
    } catch (const std::exception&) {
        // Notifications have no way to report errors back.
    }
}

// --- lifecycle -------------------------------------------------------------

Server::Result Server::initialize(const json&, const json& params) {
    std::filesystem::path root = options_.root;
    if (params.is_object()) {
        if (params.contains("rootUri") && params["rootUri"].is_string()) {
            if (auto p = uri_to_path(params["rootUri"].get<std::string>())) root = *p;
        } else if (params.contains("rootPath") && params["rootPath"].is_string()) {
            root = params["rootPath"].get<std::string>();
        } else if (params.contains("workspaceFolders") && params["workspaceFolders"].is_array() &&
                   !params["workspaceFolders"].empty()) {
            if (auto p = uri_to_path(need_string(params["workspaceFolders"][0], "uri"))) root = *p;
        }
        if (params.contains("initializationOptions") && params["initializationOptions"].is_object()) {
            const json& o = params["initializationOptions"];
            if (o.contains("debounceMs")) options_.debounce_ms = std::max(0, o["debounceMs"].get<int>());
            if (o.contains("poolSize")) options_.pool_size = std::max<std::size_t>(1, o["poolSize"].get<std::size_t>());
            if (o.contains("evalFuel")) options_.eval_fuel = o["evalFuel"].get<std::uint64_t>();
            if (o.contains("scriptsDir")) options_.scripts_dir = o["scriptsDir"].get<std::string>();
        }
    }
    options_.root = root;
    workspace_ = std::make_unique<Workspace>(root);
    if (!root.empty()) {
        try {
            workspace_->scan();
        } catch (const Error&) {
            // An unreadable root leaves an empty workspace; documents still open.
        }
    }
    SessionOptions so;
    so.pool_size = options_.pool_size;
    so.scripts_dir = options_.scripts_dir;
    sessions_ = std::make_unique<SessionManager>(*workspace_, so);
    workspace_->subscribe([this](const StatusChange& c) {
        send({{"jsonrpc", "2.0"},
              {"method", "pvs/statusChanged"},
              {"params", {{"theory", c.theory}, {"formula", c.formula}, {"status", to_string(c.status)}}}});
    });
    initialized_ = true;

    json capabilities = {
        {"textDocumentSync", {{"openClose", true}, {"change", 1}}},
        {"hoverProvider", true},
        {"definitionProvider", true},
        {"completionProvider", {{"triggerCharacters", {"`", "."}}, {"resolveProvider", false}}},
        {"codeLensProvider", {{"resolveProvider", false}}},
        {"renameProvider", true},
        {"experimental",
         {{"pvs",
           {{"methods", custom_methods()},
            {"notifications", {"pvs/statusChanged"}},
            {"pushDiagnostics", true},
            {"debounceMs", options_.debounce_ms}}}}},
    };
    return json{{"capabilities", std::move(capabilities)}, {"serverInfo", {{"name", "upvs"}, {"version", kVersion}}}};
}

Server::Result Server::shutdown(const json&, const json&) {
    shutdown_ = true;
    return json(nullptr);
}

// --- documents -------------------------------------------------------------

void Server::install(const std::string& uri, const std::string& text, int version, Millis delay) {
    std::lock_guard lock(docs_mu_);
    try {
        workspace_->upsert_document(uri, text, version);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::StaleVersion) return; // the later version already won
        throw;
    }
    DocState& doc = docs_[uri];
    doc.seq = ++seq_;
    if (doc.timer) scheduler_->cancel(*doc.timer);
    std::uint64_t seq = doc.seq;
    doc.timer = scheduler_->schedule(delay, [this, uri, seq] { publish(uri, seq); });
}

void Server::publish(const std::string& uri, std::uint64_t seq) {
    auto current = [&] {
        auto it = docs_.find(uri);
        return it != docs_.end() && it->second.seq == seq;
    };
    {
        std::lock_guard lock(docs_mu_);
        if (!current()) return;
        docs_[uri].timer.reset();
    }
    auto unit = workspace_->document(uri);
    if (!unit) return;
    auto diags = workspace_->diagnostics(uri);
    std::lock_guard lock(docs_mu_);
    // A newer edit supersedes this run; its own timer will publish.
    if (!current()) return;
    send({{"jsonrpc", "2.0"},
          {"method", "textDocument/publishDiagnostics"},
          {"params", {{"uri", uri}, {"version", unit->version}, {"diagnostics", diagnostics_json(diags)}}}});
}

void Server::did_open(const json& params) {
    const json& td = need(params, "textDocument");
    install(need_string(td, "uri"), need_string(td, "text"), need(td, "version").get<int>(), Millis(0));
}

void Server::did_change(const json& params) {
    const json& td = need(params, "textDocument");
    std::string uri = need_string(td, "uri");
    int version = need(td, "version").get<int>();
    auto unit = workspace_->document(uri);
    std::string text = unit ? unit->text : std::string();
    for (const auto& change : need(params, "contentChanges")) {
        if (!unit && change.contains("range")) return; // nothing to patch
        text = apply_change(text, change);
    }
    install(uri, text, version, Millis(options_.debounce_ms));
    sessions_->document_changed(uri);
}

void Server::did_close(const json& params) {
    std::string uri = text_document_uri(params);
    {
        std::lock_guard lock(docs_mu_);
        auto it = docs_.find(uri);
        if (it != docs_.end()) {
            if (it->second.timer) scheduler_->cancel(*it->second.timer);
            docs_.erase(it);
        }
        workspace_->close_document(uri);
        send({{"jsonrpc", "2.0"},
              {"method", "textDocument/publishDiagnostics"},
              {"params", {{"uri", uri}, {"diagnostics", json::array()}}}});
    }
}

// --- standard providers ----------------------------------------------------

Server::Result Server::hover(const json&, const json& params) {
    return provide_hover(*workspace_, text_document_uri(params), need_position(params));
}

Server::Result Server::definition(const json&, const json& params) {
    return provide_definition(*workspace_, text_document_uri(params), need_position(params));
}

Server::Result Server::completion(const json&, const json& params) {
    return provide_completion(*workspace_, text_document_uri(params), need_position(params));
}

Server::Result Server::code_lens(const json&, const json& params) {
    return provide_code_lens(*workspace_, text_document_uri(params));
}

Server::Result Server::rename(const json&, const json& params) {
    return provide_rename(*workspace_, text_document_uri(params), need_position(params),
                          need_string(params, "newName"));
}

// --- pvs/* -----------------------------------------------------------------

Server::Result Server::pvs_typecheck(const json&, const json& params) {
    std::string uri = need_string(params, "uri");
    if (!workspace_->document(uri)) throw Error(ErrorCode::DocumentNotOpen, "unknown document " + uri, {{"uri", uri}});
    auto diags = workspace_->diagnostics(uri);
    return json{{"uri", uri}, {"diagnostics", diagnostics_json(diags)}, {"tccs", tcc_summaries(*workspace_, uri)}};
}

Server::Result Server::pvs_theories(const json&, const json& params) {
    std::string root = opt_string(params, "root");
    if (root.rfind("file:", 0) == 0) {
        if (auto p = uri_to_path(root)) root = p->string();
    }
    if (root.empty() || std::filesystem::path(root) == workspace_->root())
        return theory_tree_json(workspace_->theory_tree());
    Workspace other(root);
    other.scan();
    return theory_tree_json(other.theory_tree());
}

Server::Result Server::pvs_prove_formula(const json&, const json& params) {
    std::string uri = opt_string(params, "uri");
    std::string formula = need_string(params, "formula");
    std::string theory = pick_theory(*workspace_, params, uri, formula);
    if (uri.empty()) uri = workspace_->uri_of_theory(theory).value_or("");
    std::string sid = sessions_->create_session({uri, theory, formula});
    auto info = sessions_->info(sid);
    return json{{"sessionId", sid}, {"sequent", info.sequent}, {"tree", info.tree}};
}

Server::Result Server::pvs_proof_command(const json& id, const json& params) {
    std::string sid = need_string(params, "sessionId");
    std::string cmd = need_string(params, "cmd");
    auto cancel = begin_async(id);
    sessions_->submit_async(sid, cmd, cancel, [this, id](std::optional<CommandOutcome> out, std::exception_ptr err) {
        if (err)
            respond_exception(id, err);
        else
            respond(id, outcome_json(*out));
        finish_async(id);
    });
    return std::nullopt;
}

Server::Result Server::pvs_quit_proof(const json& id, const json& params) {
    std::string sid = need_string(params, "sessionId");
    bool persist = params.is_object() && params.value("persist", false);
    begin_async(id);
    sessions_->close_session_async(sid, persist,
                                   [this, id](std::optional<std::filesystem::path> path, std::exception_ptr err) {
                                       if (err)
                                           respond_exception(id, err);
                                       else
                                           respond(id, {{"scriptPath", path ? json(path->string()) : json(nullptr)}});
                                       finish_async(id);
                                   });
    return std::nullopt;
}

Server::Result Server::pvs_evaluate(const json& id, const json& params) {
    std::string expr = need_string(params, "expr");
    std::string uri = opt_string(params, "uri");
    std::string theory = pick_theory(*workspace_, params, uri, "");
    auto ctx = workspace_->typecheck_theory(theory);
    if (!ctx) throw Error(ErrorCode::UnknownFormula, "unknown theory '" + theory + "'", {{"theory", theory}});
    if (!ctx->typechecked())
        throw Error(ErrorCode::NotTypechecked, "theory '" + theory + "' does not typecheck",
                    {{"diagnostics", diagnostics_json(ctx->diagnostics)}});
    auto cancel = begin_async(id);
    std::uint64_t fuel = options_.eval_fuel;
    sessions_->post([this, id, expr, ctx, cancel, fuel] {
        try {
            EvalOptions opts;
            opts.fuel = fuel;
            opts.cancel = cancel.get();
            auto value = evaluate_text(expr, *ctx, opts);
            respond(id, {{"value", render(*value)}});
        } catch (...) {
            respond_exception(id, std::current_exception());
        }
        finish_async(id);
    });
    return std::nullopt;
}

Server::Result Server::pvs_proof_tree(const json&, const json& params) {
    auto info = sessions_->info(need_string(params, "sessionId"));
    return json{{"sessionId", info.id},
                {"theory", info.ref.theory},
                {"formula", info.ref.formula},
                {"state", to_string(info.state)},
                {"history", info.history},
                {"sequent", info.sequent},
                {"tree", info.tree}};
}

// --- serving ---------------------------------------------------------------

int serve_fds(const ServerOptions& options, int in_fd, int out_fd, const std::atomic<bool>* stop) {
    FramedWriter writer(out_fd);
    Server server(options, [&writer](const json& m) {
        writer.write_message(m.dump(-1, ' ', false, json::error_handler_t::replace));
    });
    FramedReader reader(in_fd, stop);
    for (;;) {
        std::optional<std::string> body;
        try {
            body = reader.read_message();
        } catch (const std::runtime_error&) {
            break; // unrecoverable framing error
        }
        if (!body) break;
        server.receive_text(*body);
        if (server.exited()) break;
    }
    if (stop && stop->load()) {
        server.stop();
        return 0;
    }
    if (!server.exited()) {
        server.stop();
        return 1;
    }
    server.wait_idle();
    return server.exit_code();
}

int serve_tcp(const ServerOptions& options, int port, const std::atomic<bool>* stop,
              const std::function<void(int)>& listening) {
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw Error(ErrorCode::IoError, std::string("socket: ") + std::strerror(errno));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(fd, 1) != 0) {
        int err = errno;
        ::close(fd);
        if (err == EADDRINUSE)
            throw Error(ErrorCode::PortInUse, "port " + std::to_string(port) + " is in use", {{"port", port}});
        throw Error(ErrorCode::IoError, std::string("bind: ") + std::strerror(err));
    }
    socklen_t len = sizeof addr;
    ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
    if (listening) listening(ntohs(addr.sin_port));

    int client = -1;
    while (client < 0) {
        if (stop && stop->load()) {
            ::close(fd);
            return 0;
        }
        pollfd p{fd, POLLIN, 0};
        int ready = ::poll(&p, 1, 100);
        if (ready < 0 && errno != EINTR) {
            ::close(fd);
            throw Error(ErrorCode::IoError, std::string("poll: ") + std::strerror(errno));
        }
        if (ready > 0) client = ::accept(fd, nullptr, nullptr);
    }
    ::close(fd);
    int code = serve_fds(options, client, client, stop);
    ::close(client);
    return code;
}

} // namespace upvs
