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

#ifndef UPVS_SESSIONS_SESSIONS_HPP
#define UPVS_SESSIONS_SESSIONS_HPP

#include <atomic>
#include <filesystem>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "common/thread_pool.hpp"
#include "prover/prover.hpp"
#include "workspace/workspace.hpp"

namespace upvs {

struct FormulaRef {
    std::string uri;
    std::string theory;
    std::string formula;
};

// active: accepting commands; quiescent: still accepting commands, but the
// defining document changed after the session started; done: proved;
// abandoned: quit.
enum class SessionState { Active, Quiescent, Done, Abandoned };

const char* to_string(SessionState state);

struct CommandOutcome {
    ProverResult result;
    nlohmann::json delta; // {nodes: [changed or new], removed: [ids], active, proved}
    std::string sequent;  // rendering of the new active goal, "" when none
    bool proved = false;
    SessionState state = SessionState::Active;
};

struct SessionInfo {
    std::string id;
    FormulaRef ref;
    SessionState state = SessionState::Active;
    std::vector<std::string> history;
    nlohmann::json tree;
    std::string sequent;
};

struct SessionOptions {
    std::size_t pool_size = default_pool_size();
    // Where quit-with-persist writes scripts; empty means next to the source file.
    std::filesystem::path scripts_dir;
};

/// Isolated prover sessions running on a shared pool. Commands for one
/// session run in arrival order; different sessions run in parallel.
class SessionManager {
public:
    SessionManager(Workspace& workspace, SessionOptions options = {});
    ~SessionManager();
    SessionManager(const SessionManager&) = delete;
    SessionManager& operator=(const SessionManager&) = delete;

    /// Typechecks the theory and opens a session on the formula (or TCC).
    /// Throws Error(DuplicateSession | NotTypechecked | FormulaNotFound).
    std::string create_session(const FormulaRef& ref);

    /// Queues `cmd`; the future fails with Error(UnknownSession | SessionDone |
    /// Cancelled | command errors). `cancel` may be raised to drop or stop it.
    std::future<CommandOutcome> submit(const std::string& id, const std::string& cmd,
                                       std::shared_ptr<std::atomic<bool>> cancel = nullptr);
    CommandOutcome route_command(const std::string& id, const std::string& cmd);

    /// Like submit, but reports through `done` on the session's strand
    /// (or on the calling thread for unknown ids). Exactly one of the
    /// arguments is set.
    using Callback = std::function<void(std::optional<CommandOutcome>, std::exception_ptr)>;
    void submit_async(const std::string& id, const std::string& cmd, std::shared_ptr<std::atomic<bool>> cancel,
                      Callback done);

    /// Waits for queued commands, then closes. Returns the script path when
    /// persisted. Throws Error(UnknownSession | IoError).
    std::optional<std::filesystem::path> close_session(const std::string& id, bool persist);
    using CloseCallback = std::function<void(std::optional<std::filesystem::path>, std::exception_ptr)>;
    /// Non-blocking close; `done` runs on the session's strand.
    void close_session_async(const std::string& id, bool persist, CloseCallback done);

    SessionInfo info(const std::string& id) const;
    std::vector<std::string> session_ids() const;

    /// Marks sessions on theories of `uri` quiescent.
    void document_changed(const std::string& uri);
    /// Closes every session without persisting (connection loss).
    void abandon_all();

    /// Runs background work on the pool.
    void post(std::function<void()> task) { pool_.post(std::move(task)); }
    std::size_t pool_size() const { return pool_.size(); }

private:
    struct Session {
        std::string id;
        FormulaRef ref;
        std::unique_ptr<ProofTree> tree;
        SessionState state = SessionState::Active;
        std::shared_ptr<Strand> strand;
        nlohmann::json last_tree; // for deltas
        bool closing = false;     // guarded by the manager's mutex
        std::mutex mu;            // guards tree, state and last_tree
    };

    std::shared_ptr<Session> find(const std::string& id) const;
    CommandOutcome run(Session& s, const std::string& cmd, const std::atomic<bool>* cancel);
    static nlohmann::json delta(const nlohmann::json& before, const nlohmann::json& after);

    Workspace& workspace_;
    SessionOptions options_;
    mutable std::mutex mu_; // guards sessions_ and next_id_
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    std::uint64_t next_id_ = 1;
    ThreadPool pool_; // declared last: joined before the members above go away
};

/// Applies a delta produced by the session manager to a tree serialization.
nlohmann::json apply_delta(const nlohmann::json& tree, const nlohmann::json& delta);

} // namespace upvs

#endif // UPVS_SESSIONS_SESSIONS_HPP
