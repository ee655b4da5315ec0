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

#ifndef UPVS_SERVER_SERVER_HPP
#define UPVS_SERVER_SERVER_HPP

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include <json.hpp>

#include "server/scheduler.hpp"
#include "sessions/sessions.hpp"
#include "workspace/workspace.hpp"

namespace upvs {

// Standard JSON-RPC and LSP error codes; application codes are ErrorCode.
namespace rpc {
constexpr int kParseError = -32700;
constexpr int kInvalidRequest = -32600;
constexpr int kMethodNotFound = -32601;
constexpr int kInvalidParams = -32602;
constexpr int kInternalError = -32603;
constexpr int kServerNotInitialized = -32002;
constexpr int kRequestCancelled = -32800;
} // namespace rpc

struct ServerOptions {
    int debounce_ms = 250;
    std::size_t pool_size = default_pool_size();
    std::uint64_t eval_fuel = 1'000'000;
    std::filesystem::path scripts_dir;
    // Used when the client names no workspace root.
    std::filesystem::path root;
};

/// One LSP connection. receive() is called by a single dispatcher thread;
/// outgoing messages go to the sink, possibly from worker threads (calls
/// to the sink are serialized).
class Server {
public:
    using Sink = std::function<void(const nlohmann::json&)>;

    /// Without a scheduler a private timer thread is used.
    Server(ServerOptions options, Sink sink, std::shared_ptr<Scheduler> scheduler = nullptr);
    ~Server();
    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    void receive(const nlohmann::json& message);
    /// Parses a message body; malformed JSON gets a parse-error response.
    void receive_text(const std::string& body);

    bool exited() const { return exited_; }
    /// 0 when shutdown preceded exit, 1 otherwise.
    int exit_code() const { return exit_code_; }
    /// Blocks until every asynchronous request has been answered.
    void wait_idle();
    /// Abandons proof sessions and stops background work (connection loss).
    void stop();

    const ServerOptions& options() const { return options_; }
    /// Null before initialize.
    Workspace* workspace() { return workspace_.get(); }
    SessionManager* sessions() { return sessions_.get(); }

private:
    struct DocState {
        std::uint64_t seq = 0;
        std::optional<Scheduler::TimerId> timer;
    };

    struct Pending {
        std::shared_ptr<std::atomic<bool>> cancel = std::make_shared<std::atomic<bool>>(false);
    };

    using Result = std::optional<nlohmann::json>; // nullopt: answered later
    using Handler = Result (Server::*)(const nlohmann::json& id, const nlohmann::json& params);

    void send(const nlohmann::json& message);
    void respond(const nlohmann::json& id, nlohmann::json result);
    void respond_error(const nlohmann::json& id, int code, const std::string& message,
                       const nlohmann::json& data = nullptr);
    void respond_exception(const nlohmann::json& id, std::exception_ptr err);
    void handle_request(const nlohmann::json& id, const std::string& method, const nlohmann::json& params);
    void handle_notification(const std::string& method, const nlohmann::json& params);

    // Async bookkeeping.
    std::shared_ptr<std::atomic<bool>> begin_async(const nlohmann::json& id);
    void finish_async(const nlohmann::json& id);

    // Documents and diagnostics.
    void did_open(const nlohmann::json& params);
    void did_change(const nlohmann::json& params);
    void did_close(const nlohmann::json& params);
    void install(const std::string& uri, const std::string& text, int version, Millis delay);
    void publish(const std::string& uri, std::uint64_t seq);

    Result initialize(const nlohmann::json& id, const nlohmann::json& params);
    Result shutdown(const nlohmann::json& id, const nlohmann::json& params);
    Result hover(const nlohmann::json& id, const nlohmann::json& params);
    Result definition(const nlohmann::json& id, const nlohmann::json& params);
    Result completion(const nlohmann::json& id, const nlohmann::json& params);
    Result code_lens(const nlohmann::json& id, const nlohmann::json& params);
    Result rename(const nlohmann::json& id, const nlohmann::json& params);
    Result pvs_typecheck(const nlohmann::json& id, const nlohmann::json& params);
    Result pvs_theories(const nlohmann::json& id, const nlohmann::json& params);
    Result pvs_prove_formula(const nlohmann::json& id, const nlohmann::json& params);
    Result pvs_proof_command(const nlohmann::json& id, const nlohmann::json& params);
    Result pvs_quit_proof(const nlohmann::json& id, const nlohmann::json& params);
    Result pvs_evaluate(const nlohmann::json& id, const nlohmann::json& params);
    Result pvs_proof_tree(const nlohmann::json& id, const nlohmann::json& params);

    static const std::map<std::string, Handler>& handlers();

    ServerOptions options_;
    Sink sink_;
    std::mutex sink_mu_;
    std::shared_ptr<Scheduler> scheduler_;

    bool initialized_ = false;
    bool shutdown_ = false;
    std::atomic<bool> exited_{false};
    int exit_code_ = 1;

    std::mutex docs_mu_; // guards docs_ and seq_; held while publishing
    std::map<std::string, DocState> docs_;
    std::uint64_t seq_ = 0;

    std::mutex pending_mu_;
    std::condition_variable idle_cv_;
    std::map<std::string, Pending> pending_; // keyed by the serialized id

    std::unique_ptr<Workspace> workspace_;
    std::unique_ptr<SessionManager> sessions_;
};

/// Names of the "pvs/*" requests.
const std::vector<std::string>& custom_methods();

/// Serves one connection over a pair of file descriptors until exit, end of
/// input, or `stop` becoming true. Returns the process exit code.
int serve_fds(const ServerOptions& options, int in_fd, int out_fd, const std::atomic<bool>* stop = nullptr);

/// Listens on 127.0.0.1:`port` (0 picks a free port, reported through
/// `listening`) and serves the first connection. Throws Error(PortInUse).
int serve_tcp(const ServerOptions& options, int port, const std::atomic<bool>* stop = nullptr,
              const std::function<void(int)>& listening = nullptr);

} // namespace upvs

#endif // UPVS_SERVER_SERVER_HPP
