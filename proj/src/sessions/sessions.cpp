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

#include "sessions/sessions.hpp"

#include <fstream>

#include "common/error.hpp"
#include "lang/json_conv.hpp"
#include "workspace/uri.hpp"

namespace upvs {

const char* to_string(SessionState state) {
    switch (state) {
    case SessionState::Active: return "active";
    case SessionState::Quiescent: return "quiescent";
    case SessionState::Done: return "done";
    case SessionState::Abandoned: return "abandoned";
    }
    return "active";
}

namespace {

bool live(SessionState s) { return s == SessionState::Active || s == SessionState::Quiescent; }

void set_status_quietly(Workspace& ws, const FormulaRef& ref, FormulaStatus status) {
    try {
        ws.set_formula_status(ref.theory, ref.formula, status);
    } catch (const Error&) {
        // The formula may have been edited away while the session ran.
    }
}

} // namespace

SessionManager::SessionManager(Workspace& workspace, SessionOptions options)
    : workspace_(workspace), options_(std::move(options)), pool_(options_.pool_size) {}

// The pool member is destroyed first and finishes queued commands.
SessionManager::~SessionManager() = default;

std::string SessionManager::create_session(const FormulaRef& ref) {
    auto ctx = workspace_.typecheck_theory(ref.theory);
    if (!ctx) throw Error(ErrorCode::FormulaNotFound, "no theory named '" + ref.theory + "'");
    if (!ctx->typechecked())
        throw Error(ErrorCode::NotTypechecked, "theory " + ref.theory + " does not typecheck",
                    {{"diagnostics", diagnostics_json(ctx->diagnostics)}});
    auto tree = std::make_unique<ProofTree>(start_proof(ctx, ref.formula));

    std::lock_guard lock(mu_);
    for (const auto& [id, s] : sessions_) {
        if (s->ref.theory == ref.theory && s->ref.formula == ref.formula && live(s->state))
            throw Error(ErrorCode::DuplicateSession, "a session for " + ref.theory + "." + ref.formula + " is open",
                        {{"sessionId", id}});
    }
    auto s = std::make_shared<Session>();
    s->id = "s" + std::to_string(next_id_++);
    s->ref = ref;
    if (s->ref.uri.empty()) s->ref.uri = workspace_.uri_of_theory(ref.theory).value_or("");
    s->last_tree = tree->to_json();
    s->tree = std::move(tree);
    s->strand = std::make_shared<Strand>(pool_);
    sessions_[s->id] = s;
    return s->id;
}

std::shared_ptr<SessionManager::Session> SessionManager::find(const std::string& id) const {
    std::lock_guard lock(mu_);
    auto it = sessions_.find(id);
    if (it == sessions_.end() || it->second->closing)
        throw Error(ErrorCode::UnknownSession, "no session '" + id + "'", {{"sessionId", id}});
    return it->second;
}

std::future<CommandOutcome> SessionManager::submit(const std::string& id, const std::string& cmd,
                                                   std::shared_ptr<std::atomic<bool>> cancel) {
    auto promise = std::make_shared<std::promise<CommandOutcome>>();
    auto future = promise->get_future();
    submit_async(id, cmd, std::move(cancel), [promise](std::optional<CommandOutcome> out, std::exception_ptr err) {
        if (err)
            promise->set_exception(err);
        else
            promise->set_value(std::move(*out));
    });
    return future;
}

void SessionManager::submit_async(const std::string& id, const std::string& cmd,
                                  std::shared_ptr<std::atomic<bool>> cancel, Callback done) {
    std::shared_ptr<Session> s;
    try {
        s = find(id);
    } catch (...) {
        done(std::nullopt, std::current_exception());
        return;
    }
    s->strand->post([this, s, cmd, cancel, done = std::move(done)] {
        std::optional<CommandOutcome> out;
        std::exception_ptr err;
        try {
            if (cancel && cancel->load()) throw Error(ErrorCode::Cancelled, "command cancelled");
            out = run(*s, cmd, cancel.get());
        } catch (...) {
            err = std::current_exception();
        }
        done(std::move(out), err);
    });
}

CommandOutcome SessionManager::route_command(const std::string& id, const std::string& cmd) {
    return submit(id, cmd).get();
}

CommandOutcome SessionManager::run(Session& s, const std::string& cmd, const std::atomic<bool>* cancel) {
    std::unique_lock lock(s.mu);
    if (!live(s.state))
        throw Error(ErrorCode::SessionDone, "session " + s.id + " is " + to_string(s.state), {{"sessionId", s.id}});
    s.tree->set_cancel(cancel);
    CommandOutcome out;
    try {
        out.result = s.tree->apply(cmd);
    } catch (...) {
        s.tree->set_cancel(nullptr);
        throw;
    }
    s.tree->set_cancel(nullptr);
    auto now = s.tree->to_json();
    out.delta = delta(s.last_tree, now);
    s.last_tree = std::move(now);
    out.sequent = s.tree->active_rendering();
    out.proved = s.tree->proved();
    bool newly_proved = false;
    if (s.tree->abandoned()) {
        s.state = SessionState::Abandoned;
    } else if (out.proved) {
        s.state = SessionState::Done;
        newly_proved = true;
    }
    out.state = s.state;
    FormulaRef ref = s.ref;
    lock.unlock();
    if (newly_proved) set_status_quietly(workspace_, ref, FormulaStatus::Proved);
    return out;
}

std::optional<std::filesystem::path> SessionManager::close_session(const std::string& id, bool persist) {
    std::promise<std::optional<std::filesystem::path>> promise;
    auto result = promise.get_future();
    close_session_async(id, persist, [&promise](std::optional<std::filesystem::path> path, std::exception_ptr err) {
        if (err)
            promise.set_exception(err);
        else
            promise.set_value(std::move(path));
    });
    return result.get();
}

void SessionManager::close_session_async(const std::string& id, bool persist, CloseCallback done) {
    std::shared_ptr<Session> s;
    {
        std::lock_guard lock(mu_);
        auto it = sessions_.find(id);
        if (it == sessions_.end() || it->second->closing) {
            done(std::nullopt, std::make_exception_ptr(Error(ErrorCode::UnknownSession, "no session '" + id + "'",
                                                             {{"sessionId", id}})));
            return;
        }
        s = it->second;
        s->closing = true;
    }
    // Runs behind any queued commands so the script includes them.
    s->strand->post([this, s, id, persist, done = std::move(done)] {
        std::optional<std::filesystem::path> written;
        std::exception_ptr err;
        bool proved = false;
        try {
            std::lock_guard lock(s->mu);
            proved = s->tree->proved();
            if (persist) {
                std::filesystem::path dir = options_.scripts_dir;
                if (dir.empty()) {
                    if (auto p = uri_to_path(s->ref.uri)) dir = p->parent_path();
                }
                if (dir.empty()) throw Error(ErrorCode::IoError, "no directory to save the proof script in");
                auto path = dir / script_file_name(s->ref.theory, s->ref.formula);
                std::ofstream out(path, std::ios::binary | std::ios::trunc);
                if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
                out << script_to_text(save_script(*s->tree));
                written = path;
            }
        } catch (...) {
            err = std::current_exception();
        }
        {
            std::lock_guard lock(s->mu);
            if (live(s->state)) s->state = SessionState::Abandoned;
        }
        {
            std::lock_guard lock(mu_);
            sessions_.erase(id);
        }
        if (!proved) set_status_quietly(workspace_, s->ref, FormulaStatus::Unfinished);
        done(std::move(written), err);
    });
}

SessionInfo SessionManager::info(const std::string& id) const {
    auto s = find(id);
    std::lock_guard lock(s->mu);
    return SessionInfo{s->id, s->ref, s->state, s->tree->history(), s->tree->to_json(), s->tree->active_rendering()};
}

std::vector<std::string> SessionManager::session_ids() const {
    std::lock_guard lock(mu_);
    std::vector<std::string> out;
    for (const auto& [id, s] : sessions_) {
        if (!s->closing) out.push_back(id);
    }
    return out;
}

void SessionManager::document_changed(const std::string& uri) {
    std::vector<std::shared_ptr<Session>> all;
    {
        std::lock_guard lock(mu_);
        for (const auto& [id, s] : sessions_) all.push_back(s);
    }
    for (const auto& s : all) {
        // Posted so a running command is not waited on here.
        s->strand->post([s, uri] {
            std::lock_guard lock(s->mu);
            if (s->ref.uri == uri && s->state == SessionState::Active) s->state = SessionState::Quiescent;
        });
    }
}

void SessionManager::abandon_all() {
    std::vector<std::shared_ptr<Session>> all;
    {
        std::lock_guard lock(mu_);
        for (const auto& [id, s] : sessions_) all.push_back(s);
        sessions_.clear();
    }
    for (const auto& s : all) {
        s->strand->post([this, s] {
            bool unfinished = false;
            {
                std::lock_guard lock(s->mu);
                unfinished = live(s->state);
                s->state = SessionState::Abandoned;
            }
            if (unfinished) set_status_quietly(workspace_, s->ref, FormulaStatus::Unfinished);
        });
    }
}

nlohmann::json SessionManager::delta(const nlohmann::json& before, const nlohmann::json& after) {
    nlohmann::json changed = nlohmann::json::array();
    nlohmann::json removed = nlohmann::json::array();
    const auto& old_nodes = before.at("nodes");
    const auto& new_nodes = after.at("nodes");
    for (std::size_t i = 0; i < new_nodes.size(); ++i) {
        if (i >= old_nodes.size() || old_nodes[i] != new_nodes[i]) changed.push_back(new_nodes[i]);
    }
    for (std::size_t i = new_nodes.size(); i < old_nodes.size(); ++i) removed.push_back(old_nodes[i].at("id"));
    return {{"nodes", changed},
            {"removed", removed},
            {"active", after.at("active")},
            {"proved", after.at("proved")},
            {"history", after.at("history")}};
}

nlohmann::json apply_delta(const nlohmann::json& tree, const nlohmann::json& delta) {
    nlohmann::json out = tree;
    auto& nodes = out["nodes"];
    std::map<int, nlohmann::json> by_id;
    for (const auto& n : nodes) by_id[n.at("id").get<int>()] = n;
    for (const auto& id : delta.at("removed")) by_id.erase(id.get<int>());
    for (const auto& n : delta.at("nodes")) by_id[n.at("id").get<int>()] = n;
    nodes = nlohmann::json::array();
    for (auto& [id, n] : by_id) nodes.push_back(std::move(n));
    out["active"] = delta.at("active");
    out["proved"] = delta.at("proved");
    out["history"] = delta.at("history");
    return out;
}

} // namespace upvs
