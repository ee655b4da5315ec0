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

#include <doctest.h>

#include <random>
#include <set>
#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <thread>
#include <unistd.h>

#include "../support/lsp_harness.hpp"
#include "batch/batch.hpp"
#include "common/error.hpp"
#include "server/transport.hpp"
#include "test_support.hpp"

using namespace upvs;
using nlohmann::json;
using test::find_position;
using test::LspHarness;

namespace {

int code(ErrorCode c) { return static_cast<int>(c); }

json at(const std::string& uri, const json& pos) { return {{"textDocument", {{"uri", uri}}}, {"position", pos}}; }

std::string workspace_file(const test::TempDir& dir, const std::string& name) {
    return path_to_uri(dir.path() / name);
}

struct FixtureServer {
    test::TempDir dir;
    LspHarness lsp;

    explicit FixtureServer(ServerOptions options = {}) : lsp(options) {
        dir.copy_from(test::fixtures() / "workspace");
        lsp.initialize(dir.path());
    }

    std::string uri(const std::string& name) const { return workspace_file(dir, name); }
    std::string text(const std::string& name) const { return test::read_file(dir.path() / name); }

    // Opens a workspace file in the editor, optionally with replaced text.
    std::string open(const std::string& name, std::optional<std::string> text = std::nullopt) {
        auto u = uri(name);
        lsp.open(u, text ? *text : this->text(name));
        lsp.clock().advance(Millis(0));
        return u;
    }
};

} // namespace

TEST_CASE("framing: take_message") {
    std::string buf = frame("{\"a\":1}") + "Content-Type: x\r\ncontent-length: 2\r\n\r\n{}" + "Content-Length: 5\r\n\r\nab";
    CHECK(take_message(buf) == "{\"a\":1}");
    CHECK(take_message(buf) == "{}");
    CHECK_FALSE(take_message(buf).has_value());
    buf += "cde";
    CHECK(take_message(buf) == "abcde");
    CHECK(buf.empty());

    std::string bad = "Content-Type: x\r\n\r\n{}";
    CHECK_THROWS(take_message(bad));
    std::string bad_len = "Content-Length: 1x\r\n\r\n{}";
    CHECK_THROWS(take_message(bad_len));
    // The length counts bytes, not characters.
    std::string utf8 = frame("\"µ\"");
    CHECK(utf8.rfind("Content-Length: 4\r\n\r\n", 0) == 0);
    CHECK(take_message(utf8) == "\"µ\"");
}

TEST_CASE("lifecycle") {
    LspHarness lsp;
    CHECK(lsp.error_code("textDocument/hover", test::text_position("file:///x.pvs", 0, 0)) == rpc::kServerNotInitialized);

    auto init = lsp.request("initialize", {{"capabilities", json::object()}});
    REQUIRE(init.contains("result"));
    const json& caps = init["result"]["capabilities"];
    CHECK(caps["hoverProvider"] == true);
    CHECK(caps["definitionProvider"] == true);
    CHECK(caps["completionProvider"]["triggerCharacters"] == json::array({"`", "."}));
    CHECK(caps["codeLensProvider"].is_object());
    CHECK(caps["renameProvider"] == true);
    CHECK(caps["experimental"]["pvs"]["pushDiagnostics"] == true);
    CHECK(caps["experimental"]["pvs"]["methods"] == json(custom_methods()));

    CHECK(lsp.error_code("initialize", {{"capabilities", json::object()}}) == code(ErrorCode::DoubleInitialize));
    CHECK(lsp.error_code("no/such", json::object()) == rpc::kMethodNotFound);
    CHECK(lsp.error_code("textDocument/hover", {{"textDocument", {{"uri", "file:///x.pvs"}}}}) == rpc::kInvalidParams);
    CHECK(lsp.error_code("textDocument/hover", json::array({1, 2})) == rpc::kInvalidParams);

    lsp.clear();
    lsp.server().receive_text("{not json");
    auto sent = lsp.sent();
    REQUIRE(sent.size() == 1);
    CHECK(sent[0]["id"].is_null());
    CHECK(sent[0]["error"]["code"] == rpc::kParseError);

    lsp.clear();
    lsp.server().receive(json::array({1}));
    lsp.server().receive({{"jsonrpc", "2.0"}, {"id", json::array()}, {"method", "shutdown"}});
    sent = lsp.sent();
    REQUIRE(sent.size() == 2);
    CHECK(sent[0]["error"]["code"] == rpc::kInvalidRequest);
    CHECK(sent[1]["error"]["code"] == rpc::kInvalidRequest);

    // Notifications never get an answer, even unknown ones.
    lsp.clear();
    lsp.notify("no/such", json::object());
    lsp.notify("$/cancelRequest", {{"id", 99}});
    CHECK(lsp.sent().empty());

    CHECK(lsp.request("shutdown", nullptr)["result"].is_null());
    CHECK(lsp.error_code("textDocument/hover", test::text_position("file:///x.pvs", 0, 0)) == rpc::kInvalidRequest);
    CHECK_FALSE(lsp.server().exited());
    lsp.notify("exit", nullptr);
    CHECK(lsp.server().exited());
    CHECK(lsp.server().exit_code() == 0);
}

TEST_CASE("lifecycle: exit without shutdown") {
    LspHarness lsp;
    lsp.initialize();
    lsp.notify("exit", nullptr);
    CHECK(lsp.server().exit_code() == 1);
}

TEST_CASE("property: one response per request, none per notification") {
    std::mt19937 rng(5);
    LspHarness lsp;
    lsp.initialize();
    const std::string uri = "file:///mem/t.pvs";
    const std::string text = "t: THEORY\nBEGIN\n  a: int = abs(-2)\n  th: THEOREM a = 2\nEND t\n";
    lsp.open(uri, text);
    int version = 1;
    std::vector<std::function<json()>> requests = {
        [&] { return json{{"m", "textDocument/hover"}, {"p", test::text_position(uri, 2, 12)}}; },
        [&] { return json{{"m", "textDocument/definition"}, {"p", test::text_position(uri, 3, 15)}}; },
        [&] { return json{{"m", "textDocument/completion"}, {"p", test::text_position(uri, 2, 11)}}; },
        [&] { return json{{"m", "textDocument/codeLens"}, {"p", {{"textDocument", {{"uri", uri}}}}}}; },
        [&] { return json{{"m", "pvs/typecheck"}, {"p", {{"uri", uri}}}}; },
        [&] { return json{{"m", "pvs/evaluate"}, {"p", {{"uri", uri}, {"expr", "a * 3"}}}}; },
        [&] { return json{{"m", "pvs/proof-command"}, {"p", {{"sessionId", "s404"}, {"cmd", "prop"}}}}; },
        [&] { return json{{"m", "bogus/method"}, {"p", json::object()}}; },
        [&] { return json{{"m", "textDocument/rename"}, {"p", {{"textDocument", {{"uri", uri}}}}}}; },
    };
    std::map<std::int64_t, int> expected;
    std::size_t notifications_sent = 0;
    for (int step = 0; step < 400; ++step) {
        int pick = static_cast<int>(rng() % 10);
        if (pick < 7) {
            auto r = requests[rng() % requests.size()]();
            expected[lsp.send_request(r["m"], r["p"])] = 1;
        } else if (pick == 7) {
            lsp.change(uri, text + "% " + std::to_string(step) + "\n", ++version);
            ++notifications_sent;
        } else if (pick == 8) {
            lsp.notify("$/cancelRequest", {{"id", static_cast<int>(rng() % 50)}});
        } else {
            lsp.clock().advance(Millis(rng() % 400));
        }
    }
    lsp.server().wait_idle();
    lsp.clock().advance(Millis(1000));
    std::map<std::int64_t, int> seen;
    for (const auto& m : lsp.sent()) {
        if (m.contains("method")) {
            CHECK_FALSE(m.contains("id")); // server notifications only
            continue;
        }
        REQUIRE(m["id"].is_number_integer());
        ++seen[m["id"].get<std::int64_t>()];
    }
    std::map<std::int64_t, int> expected_with_init = expected;
    expected_with_init[1] = 1; // initialize
    CHECK(seen == expected_with_init);
    CHECK(notifications_sent > 0);
}

TEST_CASE("diagnostics: typo and fix") {
    LspHarness lsp;
    lsp.initialize();
    const std::string uri = "file:///mem/sum.pvs";
    lsp.open(uri, "sum: THEORY BEGIN x : END sum");
    CHECK(lsp.notifications("textDocument/publishDiagnostics").empty());
    lsp.clock().advance(Millis(0));
    auto pubs = lsp.notifications("textDocument/publishDiagnostics");
    REQUIRE(pubs.size() == 1);
    CHECK(pubs[0]["uri"] == uri);
    CHECK(pubs[0]["version"] == 1);
    REQUIRE(pubs[0]["diagnostics"].size() == 1);
    const json& d = pubs[0]["diagnostics"][0];
    CHECK(d["severity"] == 1);
    CHECK(d["source"] == "parser");
    CHECK(d["range"]["start"] == json{{"line", 0}, {"character", 22}});
    CHECK(d["range"]["end"] == json{{"line", 0}, {"character", 25}});

    lsp.change(uri, "sum: THEORY BEGIN x : int END sum", 2);
    lsp.clock().advance(Millis(249));
    CHECK(lsp.notifications("textDocument/publishDiagnostics").size() == 1);
    lsp.clock().advance(Millis(1));
    pubs = lsp.notifications("textDocument/publishDiagnostics");
    REQUIRE(pubs.size() == 2);
    CHECK(pubs[1]["version"] == 2);
    CHECK(pubs[1]["diagnostics"].empty());

    // Typechecker diagnostics follow a clean parse.
    lsp.change(uri, "sum: THEORY BEGIN x : int = TRUE END sum", 3);
    lsp.clock().advance(Millis(250));
    pubs = lsp.notifications("textDocument/publishDiagnostics");
    REQUIRE(pubs.size() == 3);
    REQUIRE(pubs[2]["diagnostics"].size() == 1);
    CHECK(pubs[2]["diagnostics"][0]["source"] == "typechecker");
    CHECK(pubs[2]["diagnostics"][0]["message"] == "expected int, found bool");

    // A stale version is dropped without a reply.
    lsp.change(uri, "garbage", 2);
    lsp.clock().advance(Millis(1000));
    CHECK(lsp.notifications("textDocument/publishDiagnostics").size() == 3);

    lsp.notify("textDocument/didClose", {{"textDocument", {{"uri", uri}}}});
    pubs = lsp.notifications("textDocument/publishDiagnostics");
    REQUIRE(pubs.size() == 4);
    CHECK(pubs[3]["diagnostics"].empty());
}

TEST_CASE("diagnostics: debounce collapses a burst") {
    LspHarness lsp;
    lsp.initialize();
    const std::string uri = "file:///mem/d.pvs";
    lsp.open(uri, "d: THEORY BEGIN END d");
    lsp.clock().advance(Millis(0));
    lsp.change(uri, "d: THEORY BEGIN x: int END d", 2);
    lsp.clock().advance(Millis(50));
    lsp.change(uri, "d: THEORY BEGIN x: int = 1 END d", 3);
    lsp.clock().advance(Millis(1000));
    auto pubs = lsp.notifications("textDocument/publishDiagnostics");
    REQUIRE(pubs.size() == 2);
    CHECK(pubs[1]["version"] == 3);

    // A custom window from initializationOptions.
    LspHarness slow;
    slow.initialize({}, {{"debounceMs", 40}});
    slow.open(uri, "d: THEORY BEGIN END d");
    slow.change(uri, "d: THEORY BEGIN END d ", 2);
    slow.clock().advance(Millis(39));
    CHECK(slow.notifications("textDocument/publishDiagnostics").empty());
    slow.clock().advance(Millis(1));
    CHECK(slow.notifications("textDocument/publishDiagnostics").size() == 1);
}

TEST_CASE("diagnostics: incremental changes") {
    LspHarness lsp;
    lsp.initialize();
    const std::string uri = "file:///mem/i.pvs";
    lsp.open(uri, "i: THEORY\nBEGIN\n  x: int = 1\nEND i\n");
    lsp.notify("textDocument/didChange",
               {{"textDocument", {{"uri", uri}, {"version", 2}}},
                {"contentChanges",
                 {{{"range", {{"start", {{"line", 2}, {"character", 11}}}, {"end", {{"line", 2}, {"character", 12}}}}},
                   {"text", "TRUE"}}}}});
    CHECK(lsp.server().workspace()->document(uri)->text == "i: THEORY\nBEGIN\n  x: int = TRUE\nEND i\n");
    lsp.clock().advance(Millis(250));
    auto pubs = lsp.notifications("textDocument/publishDiagnostics");
    REQUIRE(pubs.size() == 1);
    CHECK(pubs[0]["diagnostics"].size() == 1);
}

TEST_CASE("property: published diagnostics are never stale") {
    std::mt19937 rng(99);
    const std::string uri = "file:///mem/p.pvs";
    const std::vector<std::string> texts = {"p: THEORY BEGIN x : END p", "p: THEORY BEGIN x: int = 1 END p",
                                            "p: THEORY BEGIN x: int = TRUE END p",
                                            "p: THEORY BEGIN q(d: int): int = 10 / d END p"};
    for (int trial = 0; trial < 500; ++trial) {
        LspHarness lsp;
        lsp.initialize();
        int latest = 0;
        bool open = false;
        int stale = 0;
        std::vector<std::string> published_texts;
        lsp.on_message = [&](const json& m) {
            if (m.value("method", "") != "textDocument/publishDiagnostics" || !m["params"].contains("version")) return;
            if (!open || m["params"]["version"] != latest) ++stale;
        };
        for (int step = 0; step < 12; ++step) {
            int op = static_cast<int>(rng() % 6);
            if (!open || op == 0) {
                if (open) lsp.notify("textDocument/didClose", {{"textDocument", {{"uri", uri}}}});
                latest += 1;
                lsp.open(uri, texts[rng() % texts.size()], latest);
                open = true;
            } else if (op <= 3) {
                int v = rng() % 5 == 0 ? latest - 1 : ++latest; // occasionally stale
                lsp.change(uri, texts[rng() % texts.size()], v);
            } else if (op == 4) {
                lsp.notify("$/cancelRequest", {{"id", static_cast<int>(rng() % 4)}});
            } else {
                lsp.clock().advance(Millis(rng() % 300));
            }
        }
        lsp.clock().advance(Millis(300));
        // After a quiet period the latest version has been published.
        auto pubs = lsp.notifications("textDocument/publishDiagnostics");
        REQUIRE_FALSE(pubs.empty());
        CHECK(pubs.back()["version"] == latest);
        CHECK(stale == 0);
        lsp.on_message = nullptr;
    }
}

TEST_CASE("hover") {
    FixtureServer fx;
    std::string src = "h: THEORY\nBEGIN\n  v: int = abs(-2)   % abs\nEND h\n";
    const std::string uri = "file:///mem/h.pvs";
    fx.lsp.open(uri, src);

    auto h = fx.lsp.result("textDocument/hover", at(uri, find_position(src, "abs", 1)));
    REQUIRE(h.is_object());
    CHECK(h["contents"]["kind"] == "markdown");
    std::string md = h["contents"]["value"];
    CHECK(md.find("function (prelude)") != std::string::npos);
    CHECK(md.find("[prelude.pvs:6:3](upvs:/prelude.pvs#L6,3)") != std::string::npos);
    CHECK(md.find("```pvs\nabs(x: int): int = IF x < 0 THEN -x ELSE x ENDIF\n```") != std::string::npos);
    CHECK(h["range"]["start"] == find_position(src, "abs"));

    CHECK(fx.lsp.result("textDocument/hover", at(uri, find_position(src, "=", 1))).is_null());   // whitespace
    CHECK(fx.lsp.result("textDocument/hover", at(uri, find_position(src, "abs", 1, 1))).is_null()); // comment
    CHECK(fx.lsp.result("textDocument/hover", at(uri, find_position(src, "THEORY", 2))).is_null()); // keyword

    // Overloaded f in a theory that no longer typechecks.
    std::string ov = fx.text("overload.pvs");
    ov.replace(ov.find("END ov_use"), 0, "  broken: int = TRUE\n");
    auto ov_uri = fx.open("overload.pvs", ov);
    auto pos = find_position(ov, "f(n)");
    h = fx.lsp.result("textDocument/hover", at(ov_uri, pos));
    md = h["contents"]["value"];
    CHECK(md.find("_2 candidates_") != std::string::npos);
    CHECK(md.find("function (ov_a)") != std::string::npos);
}

TEST_CASE("definition") {
    FixtureServer fx;
    std::string ov = fx.text("overload.pvs");
    auto uri = fx.open("overload.pvs");
    // Typechecked: exact, by argument type.
    auto d = fx.lsp.result("textDocument/definition", at(uri, find_position(ov, "f(p)")));
    REQUIRE(d.is_object());
    CHECK(d["uri"] == uri);
    CHECK(d["range"]["start"] == find_position(ov, "f(b"));
    d = fx.lsp.result("textDocument/definition", at(uri, find_position(ov, "f(n)")));
    CHECK(d["range"]["start"] == find_position(ov, "f(x"));

    // Local variable: the binder.
    d = fx.lsp.result("textDocument/definition", at(uri, find_position(ov, "n) * 2")));
    CHECK(d["range"]["start"] == find_position(ov, "n: int"));

    // Broken: candidates.
    std::string broken = ov;
    broken.replace(broken.find("END ov_use"), 0, "  broken: int = TRUE\n");
    fx.lsp.change(uri, broken, 2);
    d = fx.lsp.result("textDocument/definition", at(uri, find_position(broken, "f(n)")));
    REQUIRE(d.is_array());
    REQUIRE(d.size() == 2);
    CHECK(d[0]["range"]["start"] == find_position(broken, "f(x"));
    CHECK(d[1]["range"]["start"] == find_position(broken, "f(b"));

    std::string unknown = "u: THEORY BEGIN z: int = nosuch END u";
    fx.lsp.open("file:///mem/u.pvs", unknown);
    CHECK(fx.lsp.result("textDocument/definition", at("file:///mem/u.pvs", find_position(unknown, "nosuch"))) ==
          json::array());
}

TEST_CASE("completion") {
    FixtureServer fx;
    std::string rec = fx.text("records.pvs");
    rec.replace(rec.find("END records"), 0, "  probe: int = r`\n");
    auto uri = fx.open("records.pvs", rec);
    auto items = fx.lsp.result("textDocument/completion", at(uri, find_position(rec, "r`", 2)));
    std::set<std::string> labels;
    for (const auto& i : items) labels.insert(i["label"]);
    CHECK(labels == std::set<std::string>{"x", "y"});

    // With a typed prefix, and on a compound expression.
    std::string rec2 = fx.text("records.pvs");
    rec2.replace(rec2.find("END records"), 0, "  probe: int = shift(origin, 1)`y\n");
    fx.lsp.change(uri, rec2, 2);
    items = fx.lsp.result("textDocument/completion", at(uri, find_position(rec2, ")`y", 3)));
    REQUIRE(items.size() == 1);
    CHECK(items[0]["label"] == "y");
    CHECK(items[0]["detail"] == "int");

    // Accessor completion on a non-record gives nothing.
    std::string rec3 = fx.text("records.pvs");
    rec3.replace(rec3.find("END records"), 0, "  probe: int = 3`\n");
    fx.lsp.change(uri, rec3, 3);
    CHECK(fx.lsp.result("textDocument/completion", at(uri, find_position(rec3, "3`", 2))).empty());

    // Keywords at a declaration position.
    std::string th = "c: THEORY\nBEGIN\n  TH\nEND c\n";
    fx.lsp.open("file:///mem/c.pvs", th);
    items = fx.lsp.result("textDocument/completion", at("file:///mem/c.pvs", find_position(th, "TH\n", 2)));
    labels.clear();
    for (const auto& i : items) labels.insert(i["label"]);
    CHECK(labels.count("THEORY"));
    CHECK(labels.count("THEOREM"));
    CHECK_FALSE(labels.count("abs"));

    // Snippet and scope-aware names.
    std::string ex = "e: THEORY\nBEGIN\n  k(mine: int): int = if\n  other: int = 1\nEND e\n";
    fx.lsp.open("file:///mem/e.pvs", ex);
    items = fx.lsp.result("textDocument/completion", at("file:///mem/e.pvs", find_position(ex, "if\n", 2)));
    bool snippet = false;
    for (const auto& i : items) {
        if (i["label"] == "if" && i["kind"] == 15) {
            snippet = true;
            CHECK(i["insertText"] == "IF ${1:cond} THEN ${2:expr} ELSE ${3:expr} ENDIF");
            CHECK(i["insertTextFormat"] == 2);
        }
    }
    CHECK(snippet);
    std::string scoped = "e: THEORY\nBEGIN\n  k(mine: int): int = m\n  other: int = 1\nEND e\n";
    fx.lsp.change("file:///mem/e.pvs", scoped, 2);
    items = fx.lsp.result("textDocument/completion", at("file:///mem/e.pvs", find_position(scoped, "m\n", 1)));
    labels.clear();
    for (const auto& i : items) labels.insert(i["label"]);
    CHECK(labels.count("mine"));
    CHECK(labels.count("max"));
    CHECK(labels.count("min"));
    CHECK_FALSE(labels.count("modus_ponens")); // basics is not imported
}

TEST_CASE("code lens") {
    FixtureServer fx;
    auto basics = fx.open("basics.pvs");
    auto lenses = fx.lsp.result("textDocument/codeLens", {{"textDocument", {{"uri", basics}}}});
    std::vector<std::string> names;
    for (const auto& l : lenses) {
        CHECK(l["command"]["title"] == "prove");
        CHECK(l["command"]["command"] == "pvs.prove");
        names.push_back(l["command"]["arguments"][0]["formula"]);
        CHECK(l["command"]["arguments"][0]["theory"] == "basics");
    }
    CHECK(names == std::vector<std::string>{"and_elim", "excluded_middle", "abs1_ground", "safe_div_zero",
                                            "modus_ponens"});
    CHECK(lenses[1]["range"]["start"] == find_position(fx.text("basics.pvs"), "excluded_middle"));

    fx.lsp.open("file:///mem/n.pvs", "n: THEORY BEGIN a: int = 1 END n");
    CHECK(fx.lsp.result("textDocument/codeLens", {{"textDocument", {{"uri", "file:///mem/n.pvs"}}}}).empty());
    // A recovered prefix still gets lenses.
    fx.lsp.open("file:///mem/r.pvs", "r: THEORY BEGIN t1: LEMMA TRUE\n  bad: THEOREM 1 +\nEND r");
    CHECK(fx.lsp.result("textDocument/codeLens", {{"textDocument", {{"uri", "file:///mem/r.pvs"}}}}).size() == 1);
}

TEST_CASE("rename") {
    FixtureServer fx;
    std::string src = fx.text("basics.pvs");
    auto uri = fx.open("basics.pvs");

    // A binder: only the function's own occurrences change.
    auto edit = fx.lsp.result("textDocument/rename", {{"textDocument", {{"uri", uri}}},
                                                      {"position", find_position(src, "x: int): int = IF x > 0")},
                                                      {"newName", "n"}});
    REQUIRE(edit["changes"].size() == 1);
    const json& edits = edit["changes"][uri];
    std::vector<json> starts;
    for (const auto& e : edits) {
        CHECK(e["newText"] == "n");
        CHECK(e["range"]["start"]["line"] == 3);
        starts.push_back(e["range"]["start"]);
    }
    // Hand-listed: the binder and the three uses in abs1's body.
    CHECK(starts.size() == 4);
    int line3 = 3;
    std::string line = "  abs1(x: int): int = IF x > 0 THEN x ELSE -x ENDIF";
    std::set<int> cols;
    for (const auto& s : starts) cols.insert(s["character"].get<int>());
    CHECK(cols == std::set<int>{static_cast<int>(line.find("x:")), static_cast<int>(line.find("x >")),
                                static_cast<int>(line.find("x ELSE")), static_cast<int>(line.find("-x") + 1)});
    CHECK(line3 == 3);

    // A top-level declaration used by a theorem.
    edit = fx.lsp.result("textDocument/rename",
                         {{"textDocument", {{"uri", uri}}}, {"position", find_position(src, "safe_div(x, 0)")},
                          {"newName", "guarded_div"}});
    CHECK(edit["changes"][uri].size() == 2);

    auto rename_error = [&](const json& pos, const std::string& name) {
        return fx.lsp.error_code("textDocument/rename",
                                 {{"textDocument", {{"uri", uri}}}, {"position", pos}, {"newName", name}});
    };
    CHECK(rename_error(find_position(src, "x, y: int"), "y") == code(ErrorCode::Capture));
    CHECK(rename_error(find_position(src, "abs1(x"), "safe_div") == code(ErrorCode::Capture));
    CHECK(rename_error(find_position(src, "abs1(x"), "abs") == code(ErrorCode::Capture)); // prelude name
    CHECK(rename_error(find_position(src, "abs1(x"), "1x") == code(ErrorCode::InvalidIdentifier));
    CHECK(rename_error(find_position(src, "abs1(x"), "THEORY") == code(ErrorCode::InvalidIdentifier));
    CHECK(rename_error(find_position(src, "BEGIN"), "zz") == code(ErrorCode::NoSymbol));

    std::string uses = "w: THEORY BEGIN v: int = abs(-1) END w";
    fx.lsp.open("file:///mem/w.pvs", uses);
    CHECK(fx.lsp.error_code("textDocument/rename", {{"textDocument", {{"uri", "file:///mem/w.pvs"}}},
                                                    {"position", find_position(uses, "abs")},
                                                    {"newName", "absolute"}}) == code(ErrorCode::ReadOnlySymbol));
    std::string broken = "w: THEORY BEGIN v: int = TRUE END w";
    fx.lsp.change("file:///mem/w.pvs", broken, 2);
    CHECK(fx.lsp.error_code("textDocument/rename", {{"textDocument", {{"uri", "file:///mem/w.pvs"}}},
                                                    {"position", find_position(broken, "v:")},
                                                    {"newName", "v2"}}) == code(ErrorCode::NotTypechecked));

    // Shadowing an outer name from inside a binder is capture too.
    std::string shadow = "s: THEORY\nBEGIN\n  k: int = 1\n  g(a: int): int = a + k\nEND s\n";
    fx.lsp.open("file:///mem/s.pvs", shadow);
    CHECK(fx.lsp.error_code("textDocument/rename", {{"textDocument", {{"uri", "file:///mem/s.pvs"}}},
                                                    {"position", find_position(shadow, "a: int")},
                                                    {"newName", "k"}}) == code(ErrorCode::Capture));
}

TEST_CASE("pvs/typecheck and pvs/theories") {
    FixtureServer fx;
    auto tc = fx.lsp.result("pvs/typecheck", {{"uri", fx.uri("basics.pvs")}});
    CHECK(tc["diagnostics"].empty());
    REQUIRE(tc["tccs"].size() == 2);
    CHECK(tc["tccs"][0]["id"] == "safe_div_TCC1");
    CHECK(tc["tccs"][0]["kind"] == "nonzero-divisor");
    CHECK(tc["tccs"][1]["id"] == "pos_or_one_TCC1");
    CHECK(tc["tccs"][1]["kind"] == "subtype");
    CHECK(fx.lsp.error_code("pvs/typecheck", {{"uri", "file:///nowhere.pvs"}}) == code(ErrorCode::DocumentNotOpen));

    auto tree = fx.lsp.result("pvs/theories", json::object());
    std::vector<std::string> theories;
    for (const auto& t : tree) theories.push_back(t["name"]);
    CHECK(theories == std::vector<std::string>{"basics", "ov_a", "ov_b", "ov_use", "records"});
    CHECK(tree[0]["formulas"][0] == json{{"name", "and_elim"},
                                         {"kind", "theorem"},
                                         {"status", "unchecked"},
                                         {"range", tree[0]["formulas"][0]["range"]}});

    test::TempDir empty;
    CHECK(fx.lsp.result("pvs/theories", {{"root", empty.path().string()}}).empty());
    CHECK(fx.lsp.error_code("pvs/theories", {{"root", (empty.path() / "missing").string()}}) ==
          code(ErrorCode::IoError));
}

TEST_CASE("pvs proof workflow over the wire") {
    test::TempDir scripts;
    ServerOptions opts;
    FixtureServer fx(opts);
    auto uri = fx.uri("basics.pvs");
    auto started = fx.lsp.result("pvs/prove-formula", {{"uri", uri}, {"theory", "basics"}, {"formula", "and_elim"}});
    std::string sid = started["sessionId"];
    CHECK(started["sequent"] == "|-------\n[1] FORALL (a, b: bool): a AND b IMPLIES a\n");
    json view = started["tree"];

    CHECK(fx.lsp.error_code("pvs/prove-formula", {{"uri", uri}, {"theory", "basics"}, {"formula", "and_elim"}}) ==
          code(ErrorCode::DuplicateSession));

    for (const std::string cmd : {"skolem", "flatten"}) {
        auto r = fx.lsp.result("pvs/proof-command", {{"sessionId", sid}, {"cmd", cmd}});
        CHECK(r["result"]["effective"] == true);
        CHECK(r["proved"] == false);
        view = apply_delta(view, r["delta"]);
    }
    auto bogus = fx.lsp.request("pvs/proof-command", {{"sessionId", sid}, {"cmd", "bogus"}});
    CHECK(bogus["error"]["code"] == code(ErrorCode::UnknownCommand));
    auto last = fx.lsp.result("pvs/proof-command", {{"sessionId", sid}, {"cmd", "assert"}});
    CHECK(last["proved"] == true);
    CHECK(last["state"] == "done");
    view = apply_delta(view, last["delta"]);

    auto snapshot = fx.lsp.result("pvs/proof-tree", {{"sessionId", sid}});
    CHECK(snapshot["tree"] == view);
    CHECK(snapshot["history"] == json::array({"skolem", "flatten", "assert"}));
    CHECK(snapshot["state"] == "done");

    auto statuses = fx.lsp.notifications("pvs/statusChanged");
    REQUIRE_FALSE(statuses.empty());
    CHECK(statuses.back() == json{{"theory", "basics"}, {"formula", "and_elim"}, {"status", "proved"}});

    auto quit = fx.lsp.result("pvs/quit-proof", {{"sessionId", sid}, {"persist", true}});
    REQUIRE(quit["scriptPath"].is_string());
    CHECK(std::filesystem::exists(quit["scriptPath"].get<std::string>()));
    CHECK(fx.lsp.error_code("pvs/proof-tree", {{"sessionId", sid}}) == code(ErrorCode::UnknownSession));
    CHECK(fx.lsp.error_code("pvs/quit-proof", {{"sessionId", sid}}) == code(ErrorCode::UnknownSession));

    // Quitting an unfinished proof marks the formula unfinished.
    auto mp = fx.lsp.result("pvs/prove-formula", {{"uri", uri}, {"formula", "modus_ponens"}});
    fx.lsp.result("pvs/proof-command", {{"sessionId", mp["sessionId"]}, {"cmd", "skolem"}});
    CHECK(fx.lsp.result("pvs/quit-proof", {{"sessionId", mp["sessionId"]}})["scriptPath"].is_null());
    CHECK(fx.lsp.notifications("pvs/statusChanged").back()["status"] == "unfinished");
    auto tree = fx.lsp.result("pvs/theories", json::object());
    CHECK(tree[0]["formulas"][0]["status"] == "proved");
    CHECK(tree[0]["formulas"][4]["status"] == "unfinished");

    // TCCs are provable by id.
    auto tcc = fx.lsp.result("pvs/prove-formula", {{"uri", uri}, {"formula", "safe_div_TCC1"}});
    CHECK(fx.lsp.result("pvs/proof-command", {{"sessionId", tcc["sessionId"]}, {"cmd", "grind"}})["proved"] == true);

    // A theory that does not typecheck reports its diagnostics.
    std::string bad = test::read_file(test::fixtures() / "broken" / "type_error.pvs") ;
    bad.replace(bad.find("END bad"), 0, "  t: THEOREM TRUE\n");
    fx.lsp.open("file:///mem/bad.pvs", bad);
    auto err = fx.lsp.request("pvs/prove-formula", {{"uri", "file:///mem/bad.pvs"}, {"formula", "t"}});
    CHECK(err["error"]["code"] == code(ErrorCode::NotTypechecked));
    CHECK(err["error"]["data"]["diagnostics"].size() == 1);
    CHECK(fx.lsp.error_code("pvs/prove-formula", {{"uri", uri}, {"theory", "basics"}, {"formula", "nope"}}) ==
          code(ErrorCode::FormulaNotFound));
}

TEST_CASE("pvs/evaluate") {
    test::TempDir dir;
    dir.copy_from(test::fixtures() / "programs");
    LspHarness lsp(ServerOptions{250, 2, 50'000, {}, {}});
    lsp.initialize(dir.path());
    auto uri = path_to_uri(dir.path() / "arith.pvs");
    CHECK(lsp.result("pvs/evaluate", {{"uri", uri}, {"expr", "1+2*3"}})["value"] == "7");
    CHECK(lsp.result("pvs/evaluate", {{"theory", "arith"}, {"expr", "fact(5)"}})["value"] == "120");
    CHECK(lsp.error_code("pvs/evaluate", {{"uri", uri}, {"expr", "loop(1)"}}) == code(ErrorCode::FuelExhausted));
    CHECK(lsp.error_code("pvs/evaluate", {{"uri", uri}, {"expr", "q(0)"}}) == code(ErrorCode::DivisionByZero));
    CHECK(lsp.error_code("pvs/evaluate", {{"uri", uri}, {"expr", "1 +"}}) == code(ErrorCode::EvalInvalid));
    CHECK(lsp.error_code("pvs/evaluate", {{"uri", uri}}) == rpc::kInvalidParams);

    // A large fuel budget and a cancel request.
    LspHarness big(ServerOptions{250, 2, 1'000'000'000'000ULL, {}, {}});
    big.initialize(dir.path());
    auto id = big.send_request("pvs/evaluate", {{"uri", uri}, {"expr", "loop(1)"}});
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    big.notify("$/cancelRequest", {{"id", id}});
    big.server().wait_idle();
    auto r = big.response(id);
    CHECK(r["error"]["code"] == rpc::kRequestCancelled);
}

TEST_CASE("serve over a socket pair") {
    int fds[2];
    REQUIRE(::socketpair(AF_UNIX, SOCK_STREAM, 0, fds) == 0);
    int code_out = -1;
    std::thread server([&] { code_out = serve_fds(ServerOptions{}, fds[1], fds[1]); });
    FramedWriter to(fds[0]);
    FramedReader from(fds[0]);
    to.write_message(R"({"jsonrpc":"2.0","id":1,"method":"initialize","params":{"capabilities":{}}})");
    auto reply = json::parse(*from.read_message());
    CHECK(reply["id"] == 1);
    CHECK(reply["result"]["capabilities"]["hoverProvider"] == true);
    to.write_message(R"({"jsonrpc":"2.0","id":2,"method":"shutdown"})");
    CHECK(json::parse(*from.read_message())["id"] == 2);
    to.write_message(R"({"jsonrpc":"2.0","method":"exit"})");
    server.join();
    CHECK(code_out == 0);
    ::close(fds[0]);
    ::close(fds[1]);
}

TEST_CASE("serve over TCP") {
    std::atomic<int> port{0};
    std::atomic<bool> stop{false};
    int code_out = -1;
    std::thread server([&] { code_out = serve_tcp(ServerOptions{}, 0, &stop, [&](int p) { port = p; }); });
    while (port == 0) std::this_thread::sleep_for(std::chrono::milliseconds(5));

    // A second listener on the same port fails.
    try {
        serve_tcp(ServerOptions{}, port, &stop);
        FAIL("expected port-in-use");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::PortInUse);
    }

    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = htons(static_cast<std::uint16_t>(port.load()));
    REQUIRE(::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0);
    FramedWriter to(fd);
    FramedReader from(fd);
    to.write_message(R"({"jsonrpc":"2.0","id":"a","method":"initialize","params":{}})");
    CHECK(json::parse(*from.read_message())["id"] == "a");
    stop = true;
    server.join();
    CHECK(code_out == 0);
    ::close(fd);
}

TEST_CASE("batch check agrees with published diagnostics") {
    const std::vector<std::string> texts = {
        "sum: THEORY BEGIN x : END sum",
        "a: THEORY\nBEGIN\n  y: int = TRUE\n  z: bool = 1 + nosuch\nEND a\n",
        "b: THEORY\nBEGIN\n  q(d: int): int = 10 / d\n  bad: THEOREM 1 +\n  c: int = 2\nEND b\n",
        "c: THEORY\nBEGIN\n  f(x: int): int = x\n  t: THEOREM f(1) = 1\nEND c\n",
    };
    for (const auto& text : texts) {
        test::TempDir dir;
        test::write_file(dir.path() / "doc.pvs", text);
        auto batch = open_file_workspace(dir.path() / "doc.pvs");
        json checked = check_file(*batch.workspace, batch.uri);

        LspHarness lsp;
        lsp.initialize();
        lsp.open(batch.uri, text);
        lsp.clock().advance(Millis(0));
        auto pubs = lsp.notifications("textDocument/publishDiagnostics");
        REQUIRE(pubs.size() == 1);
        CHECK(pubs[0]["diagnostics"] == checked["diagnostics"]);
    }
}
