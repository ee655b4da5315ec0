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

// Command-line front end: LSP server and batch check/prove/eval/index.

#include <csignal>
#include <cstdio>
#include <iostream>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "upvs/upvs.h"

using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

upvs_server* g_server = nullptr;

extern "C" void on_signal(int) { upvs_server_request_stop(g_server); }

void install_signal_handlers() {
    struct sigaction sa {};
    sa.sa_handler = on_signal;
    sigemptyset(&sa.sa_mask);
    sigaction(SIGINT, &sa, nullptr);
    sigaction(SIGTERM, &sa, nullptr);
    std::signal(SIGPIPE, SIG_IGN);
}

// Takes ownership of a string from the C API.
std::string take(char* s) {
    std::string out = s ? s : "";
    upvs_free_string(s);
    return out;
}

std::string plural(long n, const std::string& word) { return std::to_string(n) + " " + word + (n == 1 ? "" : "s"); }

const char* severity_name(int s) {
    switch (s) {
    case 1: return "error";
    case 2: return "warning";
    default: return "information";
    }
}

std::string location(const std::string& path, const json& range) {
    return path + ":" + std::to_string(range["start"]["line"].get<int>() + 1) + ":" +
           std::to_string(range["start"]["character"].get<int>() + 1);
}

void print_diagnostics(std::ostream& out, const std::string& path, const json& diags) {
    for (const auto& d : diags)
        out << location(path, d["range"]) << ": " << severity_name(d["severity"]) << ": "
            << d["message"].get<std::string>() << "\n";
}

struct Workspace {
    upvs_workspace* ws = nullptr;
    ~Workspace() { upvs_workspace_destroy(ws); }
};

int io_failure(const std::string& path) {
    std::cerr << path << ": " << upvs_last_error() << "\n";
    return kExitUsage;
}

// --- subcommands -----------------------------------------------------------

struct ServeArgs {
    bool stdio = false;
    int port = -1;
    int debounce_ms = 250;
    int pool_size = 0;
    std::uint64_t eval_fuel = 0;
    std::string scripts;
    std::string root;
};

void report_port(int port, void*) { std::cerr << "listening on 127.0.0.1:" << port << std::endl; }

int run_serve(const ServeArgs& a) {
    upvs_server_options opts{};
    opts.debounce_ms = a.debounce_ms;
    opts.pool_size = a.pool_size;
    opts.eval_fuel = a.eval_fuel;
    opts.scripts_dir = a.scripts.empty() ? nullptr : a.scripts.c_str();
    opts.root = a.root.empty() ? nullptr : a.root.c_str();
    if (upvs_server_create(&opts, &g_server) != UPVS_OK) {
        std::cerr << "upvs: " << upvs_last_error() << "\n";
        return kExitUsage;
    }
    install_signal_handlers();
    int code = kExitOk;
    upvs_status st = a.port >= 0 ? upvs_server_serve_tcp(g_server, a.port, report_port, nullptr, &code)
                                 : upvs_server_serve_fds(g_server, STDIN_FILENO, STDOUT_FILENO, &code);
    upvs_server* s = g_server;
    g_server = nullptr;
    upvs_server_destroy(s);
    if (st != UPVS_OK) {
        std::cerr << "upvs: " << upvs_last_error() << "\n";
        return kExitUsage;
    }
    return code;
}

struct CheckResult {
    int status = UPVS_OK;
    std::string message;
    json report;
};

int run_check(const std::vector<std::string>& files, int jobs) {
    std::vector<CheckResult> results(files.size());
    std::size_t next = 0;
    std::mutex mu;
    auto worker = [&] {
        for (;;) {
            std::size_t i;
            {
                std::lock_guard lock(mu);
                if (next == files.size()) return;
                i = next++;
            }
            Workspace w;
            CheckResult& r = results[i];
            r.status = upvs_workspace_open_file(files[i].c_str(), &w.ws);
            char* out = nullptr;
            if (r.status == UPVS_OK) r.status = upvs_workspace_check(w.ws, &out);
            if (r.status == UPVS_OK)
                r.report = json::parse(take(out));
            else
                r.message = upvs_last_error();
        }
    };
    std::vector<std::thread> pool;
    int n = std::max(1, std::min<int>(jobs, static_cast<int>(files.size())));
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    long errors = 0;
    long tccs = 0;
    bool io = false;
    for (std::size_t i = 0; i < files.size(); ++i) {
        const auto& r = results[i];
        if (r.status != UPVS_OK) {
            std::cerr << files[i] << ": " << r.message << "\n";
            io = true;
            continue;
        }
        print_diagnostics(std::cout, files[i], r.report["diagnostics"]);
        for (const auto& t : r.report["tccs"]) {
            std::cout << location(files[i], t["range"]) << ": tcc: " << t["theory"].get<std::string>() << "."
                      << t["id"].get<std::string>() << " (" << t["kind"].get<std::string>()
                      << "): " << t["obligation"].get<std::string>() << "\n";
        }
        errors += r.report["errors"].get<long>();
        tccs += static_cast<long>(r.report["tccs"].size());
    }
    std::cout << plural(errors, "error") << ", " << plural(tccs, "TCC") << "\n";
    if (io) return kExitUsage;
    return errors == 0 ? kExitOk : kExitFailure;
}

int run_prove(const std::string& file, const std::string& scripts) {
    Workspace w;
    if (upvs_workspace_open_file(file.c_str(), &w.ws) != UPVS_OK) return io_failure(file);
    char* out = nullptr;
    if (upvs_workspace_check(w.ws, &out) != UPVS_OK) return io_failure(file);
    json check = json::parse(take(out));
    print_diagnostics(std::cout, file, check["diagnostics"]);
    if (upvs_workspace_prove(w.ws, scripts.empty() ? nullptr : scripts.c_str(), &out) != UPVS_OK)
        return io_failure(file);
    json report = json::parse(take(out));
    for (const auto& r : report["results"]) {
        std::cout << r["theory"].get<std::string>() << "." << r["formula"].get<std::string>() << ": "
                  << r["status"].get<std::string>();
        std::string msg = r["message"];
        if (!msg.empty()) std::cout << " (" << msg << ")";
        std::cout << "\n";
    }
    long proved = report["proved"];
    long total = report["total"];
    std::cout << proved << " of " << total << " proved\n";
    bool ok = report["typechecked"].get<bool>() && check["errors"] == 0 && proved == total;
    return ok ? kExitOk : kExitFailure;
}

int run_eval(const std::string& file, const std::string& expr, const std::string& theory, std::uint64_t fuel) {
    Workspace w;
    if (upvs_workspace_open_file(file.c_str(), &w.ws) != UPVS_OK) return io_failure(file);
    char* value = nullptr;
    upvs_status st = upvs_workspace_eval(w.ws, theory.empty() ? nullptr : theory.c_str(), expr.c_str(), fuel, &value);
    if (st != UPVS_OK) {
        std::cerr << "error: " << upvs_last_error() << " [" << st << "]\n";
        json data = json::parse(upvs_last_error_data(), nullptr, false);
        if (data.is_object() && data.contains("diagnostics")) data = data["diagnostics"];
        // Expression diagnostics are positioned in the expression text.
        if (data.is_array()) print_diagnostics(std::cerr, data.empty() || st != UPVS_ERR_EVAL_INVALID ? file : "<expr>", data);
        return st == UPVS_ERR_IO ? kExitUsage : kExitFailure;
    }
    std::cout << take(value) << "\n";
    return kExitOk;
}

int run_index(const std::string& root) {
    Workspace w;
    if (upvs_workspace_open_dir(root.c_str(), &w.ws) != UPVS_OK) return io_failure(root);
    char* out = nullptr;
    if (upvs_workspace_index(w.ws, &out) != UPVS_OK) return io_failure(root);
    std::cout << take(out);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"upvs: language server and batch tools for uPVS theories", "upvs"};
    app.set_version_flag("--version", std::string(upvs_version()));
    app.require_subcommand(1);

    ServeArgs serve;
    auto* serve_cmd = app.add_subcommand("serve", "Run the language server");
    auto* stdio_opt = serve_cmd->add_flag("--stdio", serve.stdio, "Talk LSP over stdin/stdout (default)");
    serve_cmd->add_option("--port", serve.port, "Listen on 127.0.0.1:PORT instead of stdio")
        ->check(CLI::Range(0, 65535))
        ->excludes(stdio_opt);
    serve_cmd->add_option("--debounce-ms", serve.debounce_ms, "Diagnostics debounce window")->check(CLI::Range(0, 60000));
    serve_cmd->add_option("--pool-size", serve.pool_size, "Worker threads for proofs and evaluation")
        ->check(CLI::Range(1, 1024));
    serve_cmd->add_option("--eval-fuel", serve.eval_fuel, "Evaluation step budget");
    serve_cmd->add_option("--scripts", serve.scripts, "Directory for saved proof scripts");
    serve_cmd->add_option("--root", serve.root, "Workspace root when the client names none");

    std::vector<std::string> check_files;
    int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    auto* check_cmd = app.add_subcommand("check", "Parse and typecheck files");
    check_cmd->add_option("files", check_files, "Files to check")->required();
    check_cmd->add_option("-j,--jobs", jobs, "Files checked in parallel")->check(CLI::Range(1, 1024));

    std::string prove_file;
    std::string scripts;
    auto* prove_cmd = app.add_subcommand("prove", "Replay saved proofs for every formula and TCC");
    prove_cmd->add_option("file", prove_file, "File to prove")->required();
    prove_cmd->add_option("--scripts", scripts, "Directory holding <theory>.<formula>.proof.json (default: the file's)");

    std::string eval_file;
    std::string expr;
    std::string theory;
    std::uint64_t fuel = 0;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a ground expression");
    eval_cmd->add_option("file", eval_file, "File providing the declarations")->required();
    eval_cmd->add_option("-e,--expr", expr, "Expression to evaluate")->required();
    eval_cmd->add_option("--theory", theory, "Theory to evaluate in (default: the first)");
    eval_cmd->add_option("--fuel", fuel, "Evaluation step budget");

    std::string index_root = ".";
    auto* index_cmd = app.add_subcommand("index", "Print the declaration index and theory tree as JSON");
    index_cmd->add_option("root", index_root, "Workspace directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    if (*serve_cmd) return run_serve(serve);
    if (*check_cmd) return run_check(check_files, jobs);
    if (*prove_cmd) return run_prove(prove_file, scripts);
    if (*eval_cmd) return run_eval(eval_file, expr, theory, fuel);
    if (*index_cmd) return run_index(index_root);
    return kExitUsage;
}
