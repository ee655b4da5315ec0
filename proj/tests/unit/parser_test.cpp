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

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "lang/parser.hpp"
#include "lang/printer.hpp"

using namespace upvs;

namespace {

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ExprPtr parse_ok(const std::string& text) {
    auto r = parse_expression(text);
    REQUIRE_MESSAGE(r.diagnostics.empty(), text);
    REQUIRE(r.value);
    return r.value;
}

struct ExprGen {
    std::mt19937& rng;

    int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }

    TypePtr type(int depth) {
        int k = depth <= 0 ? pick(3) : pick(6);
        switch (k) {
        case 0: return make_base_type(BaseType::Int);
        case 1: return make_base_type(BaseType::Bool);
        case 2: return make_named_type("T");
        case 3: return make_function_type({type(depth - 1), type(depth - 1)}, type(depth - 1));
        case 4: {
            auto t = std::make_shared<Type>();
            t->kind = Type::Kind::Record;
            t->fields.push_back({"x", type(depth - 1), {}});
            t->fields.push_back({"y", type(depth - 1), {}});
            return t;
        }
        default: {
            auto t = std::make_shared<Type>();
            t->kind = Type::Kind::Subtype;
            t->name = "v";
            t->supertype = make_base_type(BaseType::Int);
            t->predicate = make_binary(BinaryOp::Gt, make_name("v"), make_int("0"));
            return t;
        }
        }
    }

    ExprPtr expr(int depth) {
        static const char* names[] = {"a", "b", "c", "x", "f", "r"};
        if (depth <= 0) {
            switch (pick(4)) {
            case 0: return make_bool(pick(2) == 0);
            case 1: return make_int(std::to_string(pick(100)));
            default: return make_name(names[pick(6)]);
            }
        }
        switch (pick(10)) {
        case 0:
        case 1:
        case 2: return make_binary(static_cast<BinaryOp>(pick(14)), expr(depth - 1), expr(depth - 1));
        case 3: return make_unary(pick(2) ? UnaryOp::Not : UnaryOp::Neg, expr(depth - 1));
        case 4: return make_if(expr(depth - 1), expr(depth - 1), expr(depth - 1));
        case 5: {
            std::vector<Binding> bs{{"x", type(1), {}, nullptr}};
            if (pick(2)) bs.push_back({"y", bs[0].type, {}, nullptr});
            if (pick(2)) bs.push_back({"z", type(1), {}, nullptr});
            return make_quantifier(pick(2) ? ExprKind::Forall : ExprKind::Exists, bs, expr(depth - 1));
        }
        case 6: {
            auto e = std::make_shared<Expr>();
            e->kind = ExprKind::Let;
            e->lets.push_back({"v", pick(2) ? type(0) : nullptr, expr(depth - 1), {}});
            e->args.push_back(expr(depth - 1));
            return e;
        }
        case 7: return make_apply(expr(depth - 1), {expr(depth - 1), expr(depth - 1)});
        case 8: {
            auto e = std::make_shared<Expr>();
            e->kind = ExprKind::Field;
            e->text = "y";
            e->args.push_back(expr(depth - 1));
            return e;
        }
        default: {
            auto e = std::make_shared<Expr>();
            e->kind = ExprKind::Record;
            e->fields.push_back({"x", expr(depth - 1), {}});
            e->fields.push_back({"y", expr(depth - 1), {}});
            return e;
        }
        }
    }
};

} // namespace

TEST_CASE("parse: empty theory") {
    auto r = parse_theory_file("file:///sum.pvs", "sum: THEORY BEGIN END sum");
    CHECK(r.diagnostics.empty());
    REQUIRE(r.ast.theories.size() == 1);
    CHECK(r.ast.theories[0].name == "sum");
    CHECK(r.ast.theories[0].decls.empty());
}

TEST_CASE("parse: function definition with IF body") {
    auto r = parse_theory_file("file:///t.pvs",
                               "t: THEORY BEGIN abs1(x: int): int = IF x < 0 THEN -x ELSE x ENDIF END t");
    CHECK(r.diagnostics.empty());
    REQUIRE(r.ast.theories.size() == 1);
    REQUIRE(r.ast.theories[0].decls.size() == 1);
    const Decl& d = *r.ast.theories[0].decls[0];
    CHECK(d.kind == DeclKind::Function);
    CHECK(d.name == "abs1");
    REQUIRE(d.params.size() == 1);
    CHECK(d.params[0].name == "x");
    CHECK(d.body->kind == ExprKind::If);
    CHECK_FALSE(d.recursive);
}

TEST_CASE("parse: missing type reports one diagnostic at END") {
    auto r = parse_theory_file("file:///sum.pvs", "sum: THEORY BEGIN x : END sum");
    REQUIRE(r.diagnostics.size() == 1);
    CHECK(r.diagnostics[0].severity == Severity::Error);
    CHECK(r.diagnostics[0].range == Range{{0, 22}, {0, 25}});
    REQUIRE(r.ast.theories.size() == 1);
    CHECK(r.ast.theories[0].decls.empty());
}

TEST_CASE("parse: recovery keeps later declarations") {
    std::string text =
        "t: THEORY\nBEGIN\n  a: int = 1 +\n  b: int = 2\n  c(x: int): int = ( x\n  d: bool = TRUE\nEND t\n";
    auto r = parse_theory_file("file:///t.pvs", text);
    CHECK(r.diagnostics.size() == 2);
    REQUIRE(r.ast.theories.size() == 1);
    std::vector<std::string> names;
    for (const auto& d : r.ast.theories[0].decls) names.push_back(d->name);
    CHECK(std::find(names.begin(), names.end(), "b") != names.end());
    CHECK(std::find(names.begin(), names.end(), "d") != names.end());
}

TEST_CASE("parse: END name mismatch and missing END") {
    auto r = parse_theory_file("u", "a: THEORY BEGIN END b");
    REQUIRE(r.diagnostics.size() == 1);
    CHECK(r.diagnostics[0].message.find("does not match") != std::string::npos);

    auto m = parse_theory_file("u", "a: THEORY BEGIN x: int = 1");
    REQUIRE(m.diagnostics.size() == 1);
    REQUIRE(m.ast.theories.size() == 1);
    CHECK(m.ast.theories[0].decls.size() == 1);
}

TEST_CASE("parse: recursion is detected from self-reference") {
    auto r = parse_theory_file(
        "u", "t: THEORY BEGIN fact(n: nat): nat = IF n = 0 THEN 1 ELSE n * fact(n - 1) ENDIF\n"
             "g(g: int): int = g + 1 END t");
    REQUIRE(r.diagnostics.empty());
    REQUIRE(r.ast.theories[0].decls.size() == 2);
    CHECK(r.ast.theories[0].decls[0]->recursive);
    CHECK_FALSE(r.ast.theories[0].decls[1]->recursive);
}

TEST_CASE("parse: multiple theories and importings") {
    auto r = parse_theory_file("u", "a: THEORY BEGIN T: TYPE END a\nb: THEORY BEGIN IMPORTING a x: T END b");
    CHECK(r.diagnostics.empty());
    REQUIRE(r.ast.theories.size() == 2);
    REQUIRE(r.ast.theories[1].importings.size() == 1);
    CHECK(r.ast.theories[1].importings[0].name == "a");
}

TEST_CASE("parse: precedence and associativity") {
    CHECK(pretty_print(parse_ok("a => b => c")) == "a IMPLIES b IMPLIES c");
    CHECK(pretty_print(parse_ok("(a => b) => c")) == "(a IMPLIES b) IMPLIES c");
    CHECK(pretty_print(parse_ok("a - (b - c)")) == "a - (b - c)");
    CHECK(pretty_print(parse_ok("(a - b) - c")) == "a - b - c");
    CHECK(pretty_print(parse_ok("a AND b OR c")) == "a AND b OR c");
    CHECK(pretty_print(parse_ok("a AND (b OR c)")) == "a AND (b OR c)");
    CHECK(pretty_print(parse_ok("NOT a = b")) == "NOT a = b");
    CHECK(pretty_print(parse_ok("-(x * y)")) == "-(x * y)");
    CHECK(pretty_print(parse_ok("a AND (FORALL (x: int): x > 0)")) == "a AND (FORALL (x: int): x > 0)");
    CHECK(pretty_print(parse_ok("f(x)(y)`z")) == "f(x)(y)`z");
    auto e = parse_ok("1 + 2 * 3");
    CHECK(e->bop == BinaryOp::Add);
    CHECK(e->args[1]->bop == BinaryOp::Mul);
}

TEST_CASE("pretty: declaration forms") {
    auto r = parse_theory_file(
        "u", "t: THEORY BEGIN y:int=1+2 th:THEOREM FORALL(d:int):d/=0 "
             "R: TYPE = [# x: int, y: int #] F: TYPE = [int, int -> int] P: TYPE = {i: int | i > 0} "
             "rr: R = (# x := 1, y := 2 #) g(a, b: int, c: bool): int = a END t");
    REQUIRE(r.diagnostics.empty());
    const auto& ds = r.ast.theories[0].decls;
    REQUIRE(ds.size() == 7);
    CHECK(pretty_print(*ds[0]) == "y: int = 1 + 2");
    CHECK(pretty_print(*ds[1]) == "th: THEOREM FORALL (d: int): d /= 0");
    CHECK(pretty_print(*ds[2]) == "R: TYPE = [# x: int, y: int #]");
    CHECK(pretty_print(*ds[3]) == "F: TYPE = [int, int -> int]");
    CHECK(pretty_print(*ds[4]) == "P: TYPE = {i: int | i > 0}");
    CHECK(pretty_print(*ds[5]) == "rr: R = (# x := 1, y := 2 #)");
    CHECK(pretty_print(*ds[6]) == "g(a, b: int, c: bool): int = a");
}

TEST_CASE("fragments: expression and type parsers") {
    CHECK(parse_expression("x +").diagnostics.size() == 1);
    CHECK_FALSE(parse_expression("x +").value);
    CHECK(parse_expression("x y").diagnostics.size() == 1);
    auto t = parse_type("[# a: int #]");
    REQUIRE(t.value);
    CHECK(t.value->kind == Type::Kind::Record);
    auto toks = tokenize("r: [# a: int, b: bool #] % c");
    auto at = parse_type_at(toks.tokens, 2);
    REQUIRE(at);
    CHECK(at->fields.size() == 2);
    CHECK_FALSE(parse_type_at(toks.tokens, 1));
}

TEST_CASE("property: printed random expressions parse back to equal trees") {
    std::mt19937 rng(7);
    ExprGen gen{rng};
    for (int i = 0; i < 2000; ++i) {
        auto e = gen.expr(4);
        auto printed = pretty_print(e);
        auto r = parse_expression(printed);
        REQUIRE_MESSAGE(r.diagnostics.empty(), printed);
        REQUIRE_MESSAGE(structurally_equal(e, r.value), printed << "\n  reprinted: " << pretty_print(r.value));
        CHECK(pretty_print(r.value) == printed);
    }
}

TEST_CASE("property: fixture theories survive pretty-print round trip and ranges nest") {
    namespace fs = std::filesystem;
    int files = 0;
    for (const auto& entry : fs::recursive_directory_iterator(UPVS_FIXTURES_DIR)) {
        if (entry.path().extension() != ".pvs") continue;
        auto text = read_file(entry.path());
        auto r = parse_theory_file(entry.path().string(), text);
        if (!r.diagnostics.empty()) continue; // broken-on-purpose fixtures
        ++files;
        auto printed = pretty_print(r.ast);
        auto again = parse_theory_file("reparsed", printed);
        REQUIRE_MESSAGE(again.diagnostics.empty(), entry.path().string());
        CHECK_MESSAGE(structurally_equal(r.ast, again.ast), entry.path().string());
        for (const auto& th : r.ast.theories) {
            for_each_range_pair(th, [&](const Range& parent, const Range& child, const char* what) {
                CHECK_MESSAGE(parent.contains(child), what);
            });
        }
    }
    CHECK(files >= 3);
}

TEST_CASE("property: the parser is total on random bytes") {
    std::mt19937 rng(99);
    std::uniform_int_distribution<int> byte(0, 255);
    std::uniform_int_distribution<int> len(0, 200);
    for (int i = 0; i < 2000; ++i) {
        std::string s;
        int n = len(rng);
        for (int k = 0; k < n; ++k) s.push_back(static_cast<char>(byte(rng)));
        auto r = parse_theory_file("fuzz", s);
        for (std::size_t k = 1; k < r.diagnostics.size(); ++k) {
            CHECK(r.diagnostics[k - 1].range.start <= r.diagnostics[k].range.start);
        }
    }
    std::string deep(100000, '(');
    auto r = parse_expression(deep);
    CHECK_FALSE(r.diagnostics.empty());
}
