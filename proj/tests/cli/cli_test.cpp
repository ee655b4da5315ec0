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

// Runs the installed command-line binary as a child process.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <csignal>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Child {
    pid_t pid = -1;
    int in = -1;  // write end of the child's stdin
    int out = -1; // read end of its stdout
    int err = -1; // read end of its stderr
};

Child spawn(const std::vector<std::string>& args) {
    int pin[2], pout[2], perr[2];
    REQUIRE(::pipe(pin) == 0);
    REQUIRE(::pipe(pout) == 0);
    REQUIRE(::pipe(perr) == 0);
    pid_t pid = ::fork();
    REQUIRE(pid >= 0);
    if (pid == 0) {
        ::dup2(pin[0], 0);
        ::dup2(pout[1], 1);
        ::dup2(perr[1], 2);
        for (int fd : {pin[0], pin[1], pout[0], pout[1], perr[0], perr[1]}) ::close(fd);
        std::vector<char*> argv;
        std::string bin = UPVS_CLI;
        argv.push_back(bin.data());
        std::vector<std::string> copy = args;
        for (auto& a : copy) argv.push_back(a.data());
        argv.push_back(nullptr);
        ::execv(bin.c_str(), argv.data());
        ::_exit(127);
    }
    ::close(pin[0]);
    ::close(pout[1]);
    ::close(perr[1]);
    return {pid, pin[1], pout[0], perr[0]};
}

std::string drain(int fd) {
    std::string out;
    char buf[4096];
    ssize_t n;
    while ((n = ::read(fd, buf, sizeof buf)) > 0) out.append(buf, static_cast<std::size_t>(n));
    ::close(fd);
    return out;
}

int wait_exit(pid_t pid) {
    int status = 0;
    ::waitpid(pid, &status, 0);
    return WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
}

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(const std::vector<std::string>& args) {
    Child c = spawn(args);
    ::close(c.in);
    std::string err;
    std::thread t([&] { err = drain(c.err); });
    std::string out = drain(c.out);
    t.join();
    return {wait_exit(c.pid), out, err};
}

fs::path fixtures() { return UPVS_FIXTURES_DIR; }

struct TempCopy {
    fs::path dir;
    explicit TempCopy(const fs::path& from) {
        static int n = 0;
        dir = fs::temp_directory_path() / ("upvs-cli-" + std::to_string(::getpid()) + "-" + std::to_string(++n));
        fs::remove_all(dir);
        fs::create_directories(dir);
        for (const auto& e : fs::directory_iterator(from)) fs::copy(e.path(), dir / e.path().filename());
    }
    ~TempCopy() { fs::remove_all(dir); }
};

std::string frame(const std::string& body) {
    return "Content-Length: " + std::to_string(body.size()) + "\r\n\r\n" + body;
}

// Reads one framed message, waiting at most `ms`.
std::optional<json> read_framed(int fd, std::string& buf, int ms = 5000) {
    for (;;) {
        auto header_end = buf.find("\r\n\r\n");
        if (header_end != std::string::npos) {
            auto len = std::stoul(buf.substr(buf.find(':') + 1, header_end));
            if (buf.size() >= header_end + 4 + len) {
                std::string body = buf.substr(header_end + 4, len);
                buf.erase(0, header_end + 4 + len);
                return json::parse(body);
            }
        }
        pollfd p{fd, POLLIN, 0};
        if (::poll(&p, 1, ms) <= 0) return std::nullopt;
        char chunk[4096];
        ssize_t n = ::read(fd, chunk, sizeof chunk);
        if (n <= 0) return std::nullopt;
        buf.append(chunk, static_cast<std::size_t>(n));
    }
}

void write_all(int fd, const std::string& s) {
    std::size_t done = 0;
    while (done < s.size()) {
        ssize_t n = ::write(fd, s.data() + done, s.size() - done);
        REQUIRE(n > 0);
        done += static_cast<std::size_t>(n);
    }
}

} // namespace

TEST_CASE("check") {
    TempCopy ws(fixtures() / "workspace");
    auto clean = run({"check", (ws.dir / "records.pvs").string()});
    CHECK(clean.code == 0);
    CHECK(clean.out == "0 errors, 0 TCCs\n");

    auto basics = run({"check", (ws.dir / "basics.pvs").string()});
    CHECK(basics.code == 0);
    CHECK(basics.out.find("0 errors, 2 TCCs\n") != std::string::npos);
    CHECK(basics.out.find("basics.pvs:6:55: tcc: basics.safe_div_TCC1 (nonzero-divisor): FORALL (x, y: int): NOT y = 0 "
                          "IMPLIES y /= 0") != std::string::npos);

    TempCopy prog(fixtures() / "programs");
    std::ofstream(prog.dir / "one.pvs") << "one: THEORY\nBEGIN\n  q(d: int): int = 10 / d\nEND one\n";
    auto one = run({"check", (prog.dir / "one.pvs").string()});
    CHECK(one.code == 0);
    CHECK(one.out.find("0 errors, 1 TCC\n") != std::string::npos);

    std::string bad = (fixtures() / "broken" / "type_error.pvs").string();
    auto r = run({"check", bad});
    CHECK(r.code == 1);
    CHECK(r.out == bad + ":3:12: error: expected int, found bool\n1 error, 0 TCCs\n");

    auto missing = run({"check", "/no/such/file.pvs"});
    CHECK(missing.code == 2);
    CHECK(missing.err.find("/no/such/file.pvs") != std::string::npos);

    // Several files, some in parallel.
    auto many = run({"check", "-j", "3", (ws.dir / "records.pvs").string(), bad, (ws.dir / "basics.pvs").string()});
    CHECK(many.code == 1);
    CHECK(many.out.find("1 error, 2 TCCs\n") != std::string::npos);
}

TEST_CASE("prove") {
    TempCopy ws(fixtures() / "workspace");
    auto file = (ws.dir / "basics.pvs").string();
    auto first = run({"prove", file});
    CHECK(first.code == 0);
    CHECK(first.out.find("7 of 7 proved") != std::string::npos);
    auto statuses = json::parse(std::ifstream(ws.dir / ".pvsstatus.json"));
    CHECK(statuses["basics.and_elim"] == "proved");
    CHECK(statuses["basics.safe_div_TCC1"] == "proved");
    // Idempotent.
    auto second = run({"prove", file});
    CHECK(second.code == 0);
    CHECK(second.out == first.out);

    // One broken script.
    std::ofstream(ws.dir / "basics.modus_ponens.proof.json")
        << R"({"theory": "basics", "formula": "modus_ponens", "commands": ["skolem"]})" << "\n";
    auto broken = run({"prove", file});
    CHECK(broken.code == 1);
    CHECK(broken.out.find("basics.modus_ponens: unfinished") != std::string::npos);
    CHECK(broken.out.find("basics.and_elim: proved") != std::string::npos);
    CHECK(json::parse(std::ifstream(ws.dir / ".pvsstatus.json"))["basics.modus_ponens"] == "unfinished");

    std::ofstream(ws.dir / "basics.and_elim.proof.json") << "{not json";
    auto garbled = run({"prove", file});
    CHECK(garbled.code == 1);
    CHECK(garbled.out.find("basics.and_elim: unfinished") != std::string::npos);

    auto none = run({"prove", file, "--scripts", (ws.dir / "absent").string()});
    CHECK(none.code == 1);
    CHECK(none.out.find("0 of 7 proved") != std::string::npos);

    CHECK(run({"prove", "/no/such.pvs"}).code == 2);
}

TEST_CASE("eval") {
    auto arith = (fixtures() / "programs" / "arith.pvs").string();
    auto r = run({"eval", arith, "-e", "1+2*3"});
    CHECK(r.code == 0);
    CHECK(r.out == "7\n");
    auto fuel = run({"eval", arith, "-e", "loop(1)", "--fuel", "5000"});
    CHECK(fuel.code == 1);
    CHECK(fuel.err.find("fuel") != std::string::npos);
    auto typed = run({"eval", arith, "-e", "fact(TRUE)"});
    CHECK(typed.code == 1);
    CHECK(typed.err.find("expected nat, found bool") != std::string::npos);
    CHECK(run({"eval", "/no/such.pvs", "-e", "1"}).code == 2);
}

TEST_CASE("index") {
    TempCopy ws(fixtures() / "workspace");
    auto r = run({"index", ws.dir.string()});
    CHECK(r.code == 0);
    auto j = json::parse(r.out);
    CHECK(j["theories"].size() == 5);
    bool abs_found = false;
    for (const auto& d : j["declarations"]) abs_found |= d["name"] == "abs" && d["theory"] == "prelude";
    CHECK(abs_found);
    CHECK(run({"index", "/no/such/dir"}).code == 2);
}

TEST_CASE("usage errors") {
    CHECK(run({"serve", "--bogus"}).code == 2);
    CHECK(run({}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({"eval", "x.pvs"}).code == 2); // -e missing
    auto help = run({"--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("serve") != std::string::npos);
}

TEST_CASE("serve --stdio transcript") {
    Child c = spawn({"serve", "--stdio"});
    std::string buf;
    write_all(c.in, frame(R"({"jsonrpc":"2.0","id":1,"method":"initialize","params":{"capabilities":{}}})"));
    auto init = read_framed(c.out, buf);
    REQUIRE(init);
    CHECK((*init)["id"] == 1);
    CHECK((*init)["result"]["capabilities"]["completionProvider"]["triggerCharacters"] == json::array({"`", "."}));
    write_all(c.in, frame(R"({"jsonrpc":"2.0","method":"initialized","params":{}})"));
    write_all(c.in, frame(R"({"jsonrpc":"2.0","method":"textDocument/didOpen","params":{"textDocument":)"
                          R"({"uri":"file:///mem/s.pvs","languageId":"pvs","version":1,"text":"sum: THEORY BEGIN x : END sum"}}})"));
    auto diag = read_framed(c.out, buf);
    REQUIRE(diag);
    CHECK((*diag)["method"] == "textDocument/publishDiagnostics");
    CHECK((*diag)["params"]["diagnostics"].size() == 1);
    write_all(c.in, frame(R"({"jsonrpc":"2.0","id":2,"method":"shutdown"})"));
    auto down = read_framed(c.out, buf);
    REQUIRE(down);
    CHECK((*down)["id"] == 2);
    write_all(c.in, frame(R"({"jsonrpc":"2.0","method":"exit"})"));
    ::close(c.in);
    CHECK(wait_exit(c.pid) == 0);
    ::close(c.out);
    ::close(c.err);
}

TEST_CASE("serve: end of input without shutdown") {
    Child c = spawn({"serve"});
    ::close(c.in);
    CHECK(wait_exit(c.pid) == 1);
    ::close(c.out);
    ::close(c.err);
}

TEST_CASE("serve: SIGINT exits cleanly") {
    Child c = spawn({"serve", "--stdio"});
    std::string buf;
    write_all(c.in, frame(R"({"jsonrpc":"2.0","id":1,"method":"initialize","params":{}})"));
    REQUIRE(read_framed(c.out, buf));
    ::kill(c.pid, SIGINT);
    CHECK(wait_exit(c.pid) == 0);
    for (int fd : {c.in, c.out, c.err}) ::close(fd);
}

TEST_CASE("serve --port") {
    Child a = spawn({"serve", "--port", "0"});
    // The chosen port is announced on stderr.
    std::string err;
    int port = 0;
    for (int i = 0; i < 100 && port == 0; ++i) {
        pollfd p{a.err, POLLIN, 0};
        if (::poll(&p, 1, 50) > 0) {
            char chunk[256];
            ssize_t n = ::read(a.err, chunk, sizeof chunk);
            if (n > 0) err.append(chunk, static_cast<std::size_t>(n));
            auto colon = err.rfind(':');
            if (colon != std::string::npos && err.find('\n', colon) != std::string::npos)
                port = std::stoi(err.substr(colon + 1));
        }
    }
    REQUIRE(port > 0);
    auto busy = run({"serve", "--port", std::to_string(port)});
    CHECK(busy.code == 2);
    CHECK(busy.err.find("in use") != std::string::npos);
    ::kill(a.pid, SIGINT);
    CHECK(wait_exit(a.pid) == 0);
    for (int fd : {a.in, a.out, a.err}) ::close(fd);
}
