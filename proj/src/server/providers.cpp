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

#include "server/providers.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "common/error.hpp"
#include "lang/json_conv.hpp"
#include "lang/lexer.hpp"
#include "lang/printer.hpp"

namespace upvs {

using nlohmann::json;

namespace {

// LSP CompletionItemKind values.
constexpr int kKindFunction = 3;
constexpr int kKindField = 5;
constexpr int kKindVariable = 6;
constexpr int kKindKeyword = 14;
constexpr int kKindSnippet = 15;
constexpr int kKindConstant = 21;
constexpr int kKindTypeParameter = 25;

json location(const std::string& uri, const Range& range) { return {{"uri", uri}, {"range", range}}; }

std::string file_name(const std::string& uri) {
    auto slash = uri.find_last_of("/:");
    return slash == std::string::npos ? uri : uri.substr(slash + 1);
}

std::string hover_markdown(const DeclEntry& e, std::size_t candidates) {
    std::string line = std::to_string(e.range.start.line + 1);
    std::string col = std::to_string(e.range.start.character + 1);
    std::string md = "**" + e.name + "**: " + e.description + "\n\n";
    md += "[" + file_name(e.uri) + ":" + line + ":" + col + "](" + e.uri + "#L" + line + "," + col + ")\n\n";
    md += "```pvs\n" + e.preview + "\n```";
    if (candidates > 1) md += "\n\n_" + std::to_string(candidates) + " candidates_";
    return md;
}

bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '?'; }

bool starts_with_nocase(const std::string& s, const std::string& prefix) {
    if (prefix.size() > s.size()) return false;
    for (std::size_t i = 0; i < prefix.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(s[i])) != std::tolower(static_cast<unsigned char>(prefix[i])))
            return false;
    }
    return true;
}

int item_kind(const std::string& decl_kind) {
    if (decl_kind == "function") return kKindFunction;
    if (decl_kind == "type") return kKindTypeParameter;
    if (decl_kind == "variable") return kKindVariable;
    return kKindConstant;
}

struct Snippet {
    const char* label;
    const char* body;
};

const Snippet kSnippets[] = {
    {"if", "IF ${1:cond} THEN ${2:expr} ELSE ${3:expr} ENDIF"},
    {"let", "LET ${1:x} = ${2:expr} IN ${3:expr}"},
    {"forall", "FORALL (${1:x}: ${2:int}): ${3:expr}"},
    {"exists", "EXISTS (${1:x}: ${2:int}): ${3:expr}"},
    {"theory", "${1:name}: THEORY\nBEGIN\n  $0\nEND ${1:name}"},
};

// Field names of the record-typed expression that ends at `at`, found by
// typechecking the text with the accessor removed.
std::optional<json> record_fields(Workspace& ws, const std::string& uri, const std::string& patched, Position at) {
    auto parsed = parse_theory_file(uri, patched);
    const Theory* theory = nullptr;
    for (const auto& th : parsed.ast.theories) {
        if (th.range.touches(at)) theory = &th;
    }
    if (!theory) return std::nullopt;
    auto checked = typecheck(*theory, uri, [&ws](const std::string& name) {
        auto r = ws.typecheck_theory(name);
        return r ? ImportLookup{r, ""} : ImportLookup{nullptr, "unknown theory '" + name + "'"};
    });
    const Expr* best = nullptr;
    auto consider = [&](const Expr& e) {
        if (e.range.end != at || !e.type) return;
        auto t = strip_subtypes(e.type);
        if (!t || t->kind != Type::Kind::Record) return;
        if (!best || best->range.start < e.range.start) best = &e;
    };
    for (const auto& d : checked->theory->decls) {
        if (!d->range.touches(at)) continue;
        for (const auto& p : d->params) {
            if (p.type && p.type->predicate) for_each_expr(p.type->predicate, consider);
        }
        if (d->body) for_each_expr(d->body, consider);
    }
    if (!best) return std::nullopt;
    json items = json::array();
    for (const auto& f : strip_subtypes(best->type)->fields) {
        items.push_back({{"label", f.name}, {"kind", kKindField}, {"detail", pretty_print(f.type)}});
    }
    return items;
}

const Reference* reference_covering(const TypecheckResult& r, Position pos) {
    for (const auto& ref : r.references) {
        if (ref.range.touches(pos)) return &ref;
    }
    return nullptr;
}

bool within(const Range& inner, const Range& outer) { return outer.start <= inner.start && inner.end <= outer.end; }

} // namespace

json provide_hover(Workspace& ws, const std::string& uri, Position pos) {
    auto res = ws.resolve_symbol(uri, pos);
    if (!res.found()) return nullptr;
    const DeclEntry& e = res.exact ? *res.exact : res.candidates.front();
    std::size_t n = res.exact ? 1 : res.candidates.size();
    return {{"contents", {{"kind", "markdown"}, {"value", hover_markdown(e, n)}}}, {"range", res.range}};
}

json provide_definition(Workspace& ws, const std::string& uri, Position pos) {
    auto res = ws.resolve_symbol(uri, pos);
    if (res.exact) return location(res.exact->uri, res.exact->range);
    json out = json::array();
    for (const auto& c : res.candidates) out.push_back(location(c.uri, c.range));
    return out;
}

json provide_completion(Workspace& ws, const std::string& uri, Position pos) {
    auto unit = ws.document(uri);
    if (!unit) return json::array();
    const std::string& text = unit->text;
    std::size_t cursor = std::min(unit->lines.offset_of(pos), text.size());
    std::size_t start = cursor;
    while (start > 0 && ident_char(text[start - 1])) --start;
    std::string prefix = text.substr(start, cursor - start);

    if (start > 0 && text[start - 1] == '`') {
        std::string patched = text.substr(0, start - 1) + text.substr(cursor);
        Position at = unit->lines.position_of(start - 1);
        auto fields = record_fields(ws, uri, patched, at);
        if (!fields) return json::array();
        json out = json::array();
        for (auto& item : *fields) {
            if (starts_with_nocase(item["label"].get<std::string>(), prefix)) out.push_back(std::move(item));
        }
        return out;
    }
    // A "." trigger only completes accessors; elsewhere it is punctuation.
    if (start > 0 && text[start - 1] == '.' && prefix.empty()) return json::array();

    json out = json::array();
    std::set<std::string> seen;
    auto add = [&](json item) {
        std::string key = item["label"].get<std::string>() + "\x1f" + std::to_string(item["kind"].get<int>());
        if (seen.insert(key).second) out.push_back(std::move(item));
    };
    for (const auto& s : kSnippets) {
        if (starts_with_nocase(s.label, prefix))
            add({{"label", s.label}, {"kind", kKindSnippet}, {"insertText", s.body}, {"insertTextFormat", 2},
                 {"detail", "snippet"}});
    }
    for (const auto& kw : keywords()) {
        if (starts_with_nocase(kw, prefix)) add({{"label", kw}, {"kind", kKindKeyword}});
    }

    std::set<std::string> visible;
    TypecheckResultPtr checked;
    if (auto theory = ws.theory_at(uri, pos)) {
        checked = ws.typecheck_theory(*theory);
        visible.insert(*theory);
        if (checked) {
            for (const auto& imp : checked->imports) visible.insert(imp->theory->name);
            for (const auto& scope : checked->scopes) {
                if (scope.id == 0 || !scope.range.touches(pos)) continue;
                for (const auto& e : scope.entries) {
                    if (starts_with_nocase(e.name, prefix))
                        add({{"label", e.name}, {"kind", kKindVariable}, {"detail", pretty_print(e.type)}});
                }
            }
        }
    }
    for (const auto& e : ws.all_declarations()) {
        if (e.kind == "tcc" || e.kind == "variable") continue;
        bool in_scope = visible.empty() || visible.count(e.theory) || e.uri == kPreludeUri;
        if (in_scope && starts_with_nocase(e.name, prefix))
            add({{"label", e.name}, {"kind", item_kind(e.kind)}, {"detail", e.description},
                 {"documentation", {{"kind", "markdown"}, {"value", "```pvs\n" + e.preview + "\n```"}}}});
    }
    return out;
}

json provide_code_lens(Workspace& ws, const std::string& uri) {
    json out = json::array();
    auto unit = ws.document(uri);
    if (!unit) return out;
    for (const auto& th : unit->parse.ast.theories) {
        for (const auto& d : th.decls) {
            if (d->kind != DeclKind::Formula) continue;
            json args = {{"uri", uri}, {"theory", th.name}, {"formula", d->name}};
            out.push_back({{"range", d->name_range},
                           {"command", {{"title", "prove"}, {"command", "pvs.prove"}, {"arguments", json::array({args})}}}});
        }
    }
    return out;
}

json provide_rename(Workspace& ws, const std::string& uri, Position pos, const std::string& new_name) {
    if (!is_identifier(new_name))
        throw Error(ErrorCode::InvalidIdentifier, "'" + new_name + "' is not a valid identifier");
    std::string old_name;
    auto occ = ws.occurrences(uri, pos, &old_name);

    auto capture = [&](const std::string& why) {
        throw Error(ErrorCode::Capture, "renaming '" + old_name + "' to '" + new_name + "' " + why,
                    {{"name", new_name}});
    };
    if (new_name != old_name) {
        // The symbol being renamed, seen from the document it was asked for.
        std::optional<Range> local_scope;
        for (const auto& r : ws.typecheck_document(uri)) {
            const Reference* ref = reference_covering(*r, pos);
            if (!ref || ref->target.kind != SymbolRef::Kind::Local) continue;
            for (const auto& scope : r->scopes) {
                for (const auto& e : scope.entries) {
                    if (e.range == ref->binding) local_scope = scope.range;
                }
            }
            // Uses of an outer `new_name` inside the binder's scope would be shadowed.
            for (const auto& other : r->references) {
                if (other.name != new_name || !local_scope || !within(other.range, *local_scope)) continue;
                bool inner = other.target.kind == SymbolRef::Kind::Local && within(other.binding, *local_scope);
                if (!inner) capture("would shadow an outer '" + new_name + "'");
            }
        }
        for (const auto& [ouri, ranges] : occ) {
            for (const auto& r : ws.typecheck_document(ouri)) {
                std::set<std::string> imported;
                for (const auto& imp : r->imports) imported.insert(imp->theory->name);
                for (const auto& range : ranges) {
                    if (!r->theory->range.touches(range.start)) continue;
                    for (const auto& scope : r->scopes) {
                        if (!scope.range.touches(range.start)) continue;
                        for (const auto& e : scope.entries) {
                            if (e.name == new_name) capture("clashes with an existing '" + new_name + "'");
                        }
                    }
                    for (const auto& e : ws.find_declaration(new_name)) {
                        if (imported.count(e.theory)) capture("clashes with '" + new_name + "' from " + e.theory);
                    }
                }
            }
        }
    }
    json changes = json::object();
    for (const auto& [ouri, ranges] : occ) {
        json edits = json::array();
        for (const auto& range : ranges) edits.push_back({{"range", range}, {"newText", new_name}});
        changes[ouri] = std::move(edits);
    }
    return {{"changes", std::move(changes)}};
}

json tcc_summaries(Workspace& ws, const std::string& uri) {
    json out = json::array();
    for (const auto& r : ws.typecheck_document(uri)) {
        for (const auto& tcc : r->tccs) {
            out.push_back({{"id", tcc.id},
                           {"kind", to_string(tcc.kind)},
                           {"theory", r->theory->name},
                           {"decl", tcc.decl},
                           {"obligation", pretty_print(tcc.obligation)},
                           {"range", tcc.origin},
                           {"status", to_string(ws.formula_status(r->theory->name, tcc.id))}});
        }
    }
    return out;
}

json theory_tree_json(const TheoryTree& tree) {
    json out = json::array();
    for (const auto& th : tree) {
        json formulas = json::array();
        for (const auto& f : th.formulas) {
            formulas.push_back({{"name", f.name}, {"kind", f.kind}, {"status", to_string(f.status)}, {"range", f.range}});
        }
        out.push_back({{"uri", th.uri}, {"name", th.name}, {"range", th.range}, {"formulas", std::move(formulas)}});
    }
    return out;
}

} // namespace upvs
