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

#include "workspace/workspace.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "common/error.hpp"
#include "lang/printer.hpp"
#include "workspace/uri.hpp"

namespace upvs {

SourceUnit::SourceUnit(std::string uri_, int version_, std::string text_)
    : uri(std::move(uri_)), version(version_), text(std::move(text_)), parse(parse_theory_file(uri, text)),
      lines(text) {}

const char* to_string(FormulaStatus status) {
    switch (status) {
    case FormulaStatus::Unchecked: return "unchecked";
    case FormulaStatus::Unfinished: return "unfinished";
    case FormulaStatus::Proved: return "proved";
    case FormulaStatus::Failed: return "failed";
    }
    return "unchecked";
}

std::optional<FormulaStatus> parse_status(const std::string& text) {
    for (auto s : {FormulaStatus::Unchecked, FormulaStatus::Unfinished, FormulaStatus::Proved, FormulaStatus::Failed}) {
        if (text == to_string(s)) return s;
    }
    return std::nullopt;
}

namespace {

std::string decl_kind(DeclKind kind) {
    switch (kind) {
    case DeclKind::Type: return "type";
    case DeclKind::Const: return "const";
    case DeclKind::Function: return "function";
    case DeclKind::Formula: return "formula";
    }
    return "const";
}

std::string formula_kind(FormulaKind kind) {
    switch (kind) {
    case FormulaKind::Theorem: return "theorem";
    case FormulaKind::Lemma: return "lemma";
    case FormulaKind::Conjecture: return "conjecture";
    }
    return "theorem";
}

std::string read_text(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + p.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string status_key(const std::string& theory, const std::string& formula) { return theory + "." + formula; }

} // namespace

Workspace::Workspace(std::filesystem::path root) : root_(std::move(root)) {}

void Workspace::scan(bool recursive) {
    std::lock_guard lock(mu_);
    if (root_.empty()) return;
    std::error_code ec;
    if (!std::filesystem::is_directory(root_, ec)) throw Error(ErrorCode::IoError, "cannot read workspace " + root_.string());
    std::vector<std::filesystem::path> files;
    auto collect = [&](auto it) {
        if (ec) throw Error(ErrorCode::IoError, "cannot read workspace " + root_.string() + ": " + ec.message());
        for (decltype(it) end; it != end; it.increment(ec)) {
            if (ec) break;
            if (it->is_regular_file(ec) && it->path().extension() == ".pvs") files.push_back(it->path());
        }
    };
    if (recursive)
        collect(std::filesystem::recursive_directory_iterator(root_, ec));
    else
        collect(std::filesystem::directory_iterator(root_, ec));
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        auto uri = path_to_uri(f);
        if (overlays_.count(uri)) continue;
        install(std::make_shared<const SourceUnit>(uri, 0, read_text(f)));
    }
    load_statuses_locked();
}

std::string Workspace::load_file(const std::filesystem::path& file) {
    std::lock_guard lock(mu_);
    std::error_code ec;
    if (!std::filesystem::is_regular_file(file, ec)) throw Error(ErrorCode::IoError, "cannot read " + file.string());
    auto uri = path_to_uri(file);
    if (!overlays_.count(uri)) install(std::make_shared<const SourceUnit>(uri, 0, read_text(file)));
    return uri;
}

void Workspace::install(SourceUnitPtr unit) {
    const std::string uri = unit->uri;
    std::vector<StatusChange> invalidated;
    auto old = docs_.find(uri);
    if (old != docs_.end()) {
        for (auto it = theories_.begin(); it != theories_.end();) {
            it = it->second.uri == uri ? theories_.erase(it) : std::next(it);
        }
        // Editing a file forgets what was proved about it.
        if (old->second->text != unit->text) {
            std::set<std::string> names;
            for (const auto* u : {old->second.get(), unit.get()}) {
                for (const auto& th : u->parse.ast.theories) names.insert(th.name);
            }
            for (auto it = statuses_.begin(); it != statuses_.end();) {
                auto dot = it->first.find('.');
                if (names.count(it->first.substr(0, dot))) {
                    invalidated.push_back({it->first.substr(0, dot), it->first.substr(dot + 1), FormulaStatus::Unchecked});
                    it = statuses_.erase(it);
                } else {
                    ++it;
                }
            }
        }
    }
    for (std::size_t i = 0; i < unit->parse.ast.theories.size(); ++i) {
        const auto& name = unit->parse.ast.theories[i].name;
        auto existing = theories_.find(name);
        // On duplicate theory names the smaller uri wins, independent of load order.
        if (existing == theories_.end() || uri < existing->second.uri) theories_[name] = TheoryLoc{uri, i};
    }
    docs_[uri] = std::move(unit);
    cache_.clear();
    if (!invalidated.empty()) {
        save_statuses_locked();
        notify(invalidated);
    }
}

SourceUnitPtr Workspace::upsert_document(const std::string& uri, const std::string& text, int version) {
    std::lock_guard lock(mu_);
    auto it = docs_.find(uri);
    if (it != docs_.end() && overlays_.count(uri) && version <= it->second->version)
        throw Error(ErrorCode::StaleVersion,
                    "version " + std::to_string(version) + " is not newer than " + std::to_string(it->second->version),
                    {{"uri", uri}, {"version", version}, {"current", it->second->version}});
    auto unit = std::make_shared<const SourceUnit>(uri, version, text);
    overlays_.insert(uri);
    install(unit);
    return unit;
}

void Workspace::close_document(const std::string& uri) {
    std::lock_guard lock(mu_);
    if (!overlays_.erase(uri)) return;
    auto path = uri_to_path(uri);
    std::error_code ec;
    if (path && std::filesystem::is_regular_file(*path, ec)) {
        install(std::make_shared<const SourceUnit>(uri, 0, read_text(*path)));
        return;
    }
    for (auto it = theories_.begin(); it != theories_.end();) {
        it = it->second.uri == uri ? theories_.erase(it) : std::next(it);
    }
    docs_.erase(uri);
    cache_.clear();
}

SourceUnitPtr Workspace::document(const std::string& uri) const {
    std::lock_guard lock(mu_);
    auto it = docs_.find(uri);
    return it == docs_.end() ? nullptr : it->second;
}

std::vector<std::string> Workspace::document_uris() const {
    std::lock_guard lock(mu_);
    std::vector<std::string> out;
    for (const auto& [uri, unit] : docs_) out.push_back(uri);
    return out;
}

// --- typechecking ------------------------------------------------------------------

TypecheckResultPtr Workspace::typecheck_theory(const std::string& theory) {
    std::lock_guard lock(mu_);
    std::set<std::string> active;
    return typecheck_locked(theory, active);
}

TypecheckResultPtr Workspace::typecheck_locked(const std::string& theory, std::set<std::string>& active) {
    if (auto hit = cache_.find(theory); hit != cache_.end()) return hit->second;
    auto loc = theories_.find(theory);
    if (loc == theories_.end()) return nullptr;
    const SourceUnitPtr unit = docs_.at(loc->second.uri);
    const Theory& th = unit->parse.ast.theories.at(loc->second.index);
    active.insert(theory);
    auto result = typecheck(th, unit->uri, [&](const std::string& name) -> ImportLookup {
        if (active.count(name)) return {nullptr, "circular IMPORTING of '" + name + "'"};
        auto dep = typecheck_locked(name, active);
        if (!dep) return {nullptr, "unknown theory '" + name + "'"};
        return {dep, ""};
    });
    active.erase(theory);
    // A theory whose text did not parse completely is not considered checked.
    std::vector<Diagnostic> parse_errors;
    for (const auto& d : unit->parse.diagnostics) {
        if (d.severity == Severity::Error && th.range.contains(d.range.start)) parse_errors.push_back(d);
    }
    if (!parse_errors.empty()) {
        auto copy = std::make_shared<TypecheckResult>(*result);
        copy->diagnostics.insert(copy->diagnostics.begin(), parse_errors.begin(), parse_errors.end());
        result = copy;
    }
    cache_[theory] = result;
    return result;
}

std::vector<TypecheckResultPtr> Workspace::typecheck_document(const std::string& uri) {
    std::lock_guard lock(mu_);
    std::vector<TypecheckResultPtr> out;
    auto it = docs_.find(uri);
    if (it == docs_.end()) return out;
    for (const auto& th : it->second->parse.ast.theories) {
        std::set<std::string> active;
        auto loc = theories_.find(th.name);
        if (loc == theories_.end() || loc->second.uri != uri) continue; // shadowed duplicate
        if (auto r = typecheck_locked(th.name, active)) out.push_back(r);
    }
    return out;
}

std::vector<Diagnostic> Workspace::diagnostics(const std::string& uri) {
    std::lock_guard lock(mu_);
    auto it = docs_.find(uri);
    if (it == docs_.end()) return {};
    std::vector<Diagnostic> out = it->second->parse.diagnostics;
    if (!has_errors(out)) {
        for (const auto& r : typecheck_document(uri)) {
            for (const auto& d : r->diagnostics) {
                if (std::find(out.begin(), out.end(), d) == out.end()) out.push_back(d);
            }
        }
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const Diagnostic& a, const Diagnostic& b) { return a.range.start < b.range.start; });
    return out;
}

std::optional<std::string> Workspace::theory_at(const std::string& uri, Position pos) const {
    std::lock_guard lock(mu_);
    auto it = docs_.find(uri);
    if (it == docs_.end() || it->second->parse.ast.theories.empty()) return std::nullopt;
    const auto& theories = it->second->parse.ast.theories;
    for (const auto& th : theories) {
        if (th.range.touches(pos)) return th.name;
    }
    return theories.front().name;
}

std::optional<std::string> Workspace::uri_of_theory(const std::string& theory) const {
    std::lock_guard lock(mu_);
    if (theory == "prelude") return std::string(kPreludeUri);
    auto it = theories_.find(theory);
    if (it == theories_.end()) return std::nullopt;
    return it->second.uri;
}

// --- index ----------------------------------------------------------------------------

void Workspace::add_entries(const TypecheckResult* checked, const Theory& th, const std::string& uri,
                            std::vector<DeclEntry>& out) const {
    for (std::size_t i = 0; i < th.decls.size(); ++i) {
        const Decl& d = *th.decls[i];
        DeclEntry e;
        e.name = d.name;
        e.kind = decl_kind(d.kind);
        e.theory = th.name;
        e.uri = uri;
        e.range = d.name_range;
        e.full_range = d.range;
        e.preview = pretty_print(d);
        e.description = (d.kind == DeclKind::Formula ? formula_kind(d.formula_kind) : e.kind) + " (" + th.name + ")";
        e.decl_index = static_cast<int>(i);
        out.push_back(std::move(e));
    }
    if (!checked) return;
    for (const auto& tcc : checked->tccs) {
        DeclEntry e;
        e.name = tcc.id;
        e.kind = "tcc";
        e.theory = th.name;
        e.uri = uri;
        e.range = tcc.origin;
        e.full_range = tcc.origin;
        e.preview = tcc.id + ": OBLIGATION " + pretty_print(tcc.obligation);
        e.description = std::string(to_string(tcc.kind)) + " TCC (" + th.name + ")";
        out.push_back(std::move(e));
    }
}

std::vector<DeclEntry> Workspace::entries_locked() const {
    std::vector<DeclEntry> out;
    for (const auto& [uri, unit] : docs_) {
        for (const auto& th : unit->parse.ast.theories) {
            auto c = cache_.find(th.name);
            const TypecheckResult* checked = nullptr;
            if (c != cache_.end() && c->second && c->second->uri == uri) checked = c->second.get();
            add_entries(checked, th, uri, out);
        }
    }
    auto pre = prelude();
    add_entries(nullptr, *pre->theory, kPreludeUri, out);
    std::stable_sort(out.begin(), out.end(), [](const DeclEntry& a, const DeclEntry& b) {
        if (a.uri != b.uri) return a.uri < b.uri;
        return a.range.start < b.range.start;
    });
    return out;
}

std::vector<DeclEntry> Workspace::all_declarations() const {
    std::lock_guard lock(mu_);
    return entries_locked();
}

std::vector<DeclEntry> Workspace::find_declaration(const std::string& name) const {
    std::lock_guard lock(mu_);
    std::vector<DeclEntry> out;
    for (auto& e : entries_locked()) {
        if (e.name == name) out.push_back(std::move(e));
    }
    return out;
}

namespace {

const Token* identifier_at(const SourceUnit& unit, Position pos) {
    const Token* best = nullptr;
    for (const auto& t : unit.parse.tokens) {
        if (t.kind != TokenKind::Identifier) continue;
        if (t.range.contains(pos)) return &t;
        if (t.range.touches(pos)) best = &t;
    }
    return best;
}

const Reference* reference_at(const TypecheckResult& r, const Range& token) {
    for (const auto& ref : r.references) {
        if (ref.range == token) return &ref;
    }
    return nullptr;
}

} // namespace

Resolution Workspace::resolve_symbol(const std::string& uri, Position pos) {
    std::lock_guard lock(mu_);
    Resolution res;
    auto doc = docs_.find(uri);
    if (doc == docs_.end()) return res;
    const Token* tok = identifier_at(*doc->second, pos);
    if (!tok) return res;
    res.name = tok->lexeme;
    res.range = tok->range;
    if (auto theory = theory_at(uri, pos)) {
        std::set<std::string> active;
        auto r = typecheck_locked(*theory, active);
        if (r && r->typechecked() && r->uri == uri) {
            if (const Reference* ref = reference_at(*r, tok->range)) {
                if (ref->target.kind == SymbolRef::Kind::Decl) {
                    for (auto& e : entries_locked()) {
                        if (e.theory == ref->target.theory && e.decl_index == ref->target.decl_index) {
                            res.exact = std::move(e);
                            return res;
                        }
                    }
                } else if (ref->target.kind == SymbolRef::Kind::Local) {
                    DeclEntry e;
                    e.name = ref->name;
                    e.kind = "variable";
                    e.theory = *theory;
                    e.uri = uri;
                    e.range = ref->binding;
                    e.full_range = ref->binding;
                    for (const auto& scope : r->scopes) {
                        for (const auto& entry : scope.entries) {
                            if (entry.range == ref->binding) e.preview = entry.name + ": " + pretty_print(entry.type);
                        }
                    }
                    if (e.preview.empty()) e.preview = e.name;
                    e.description = "variable (" + *theory + ")";
                    res.exact = std::move(e);
                    return res;
                }
            }
        }
    }
    res.candidates = find_declaration(res.name);
    return res;
}

std::map<std::string, std::vector<Range>> Workspace::occurrences(const std::string& uri, Position pos,
                                                                 std::string* name_out) {
    std::lock_guard lock(mu_);
    auto doc = docs_.find(uri);
    const Token* tok = doc == docs_.end() ? nullptr : identifier_at(*doc->second, pos);
    if (!tok) throw Error(ErrorCode::NoSymbol, "no symbol at this position");
    auto theory = theory_at(uri, pos);
    std::set<std::string> active;
    auto r = theory ? typecheck_locked(*theory, active) : nullptr;
    if (!r || !r->typechecked() || r->uri != uri)
        throw Error(ErrorCode::NotTypechecked, "theory does not typecheck");
    const Reference* ref = reference_at(*r, tok->range);
    if (!ref) throw Error(ErrorCode::NoSymbol, "'" + tok->lexeme + "' does not name a symbol");
    if (name_out) *name_out = ref->name;
    std::map<std::string, std::vector<Range>> out;
    if (ref->target.kind == SymbolRef::Kind::Local) {
        for (const auto& other : r->references) {
            if (other.target.kind == SymbolRef::Kind::Local && other.binding == ref->binding)
                out[uri].push_back(other.range);
        }
        return out;
    }
    if (ref->target.kind != SymbolRef::Kind::Decl) throw Error(ErrorCode::NoSymbol, "no symbol at this position");
    if (ref->target.theory == "prelude")
        throw Error(ErrorCode::ReadOnlySymbol, "'" + ref->name + "' is a built-in declaration");
    // Every theory that can see the declaring theory may use it.
    for (const auto& [name, loc] : theories_) {
        auto other = typecheck_locked(name, active);
        if (!other) continue;
        for (const auto& use : other->references) {
            if (use.target == ref->target) out[other->uri].push_back(use.range);
        }
    }
    for (auto& [u, ranges] : out) {
        std::sort(ranges.begin(), ranges.end(), [](const Range& a, const Range& b) { return a.start < b.start; });
        ranges.erase(std::unique(ranges.begin(), ranges.end()), ranges.end());
    }
    return out;
}

// --- statuses -----------------------------------------------------------------------------

TheoryTree Workspace::theory_tree() {
    std::lock_guard lock(mu_);
    TheoryTree tree;
    for (const auto& [uri, unit] : docs_) {
        for (const auto& th : unit->parse.ast.theories) {
            TheoryNode node;
            node.uri = uri;
            node.name = th.name;
            node.range = th.name_range;
            for (const auto& d : th.decls) {
                if (d->kind != DeclKind::Formula) continue;
                node.formulas.push_back(FormulaNode{d->name, formula_kind(d->formula_kind),
                                                    formula_status(th.name, d->name), d->name_range});
            }
            auto loc = theories_.find(th.name);
            if (loc != theories_.end() && loc->second.uri == uri) {
                std::set<std::string> active;
                if (auto r = typecheck_locked(th.name, active)) {
                    for (const auto& tcc : r->tccs)
                        node.formulas.push_back(
                            FormulaNode{tcc.id, "tcc", formula_status(th.name, tcc.id), tcc.origin});
                }
            }
            tree.push_back(std::move(node));
        }
    }
    return tree;
}

FormulaStatus Workspace::formula_status(const std::string& theory, const std::string& formula) const {
    std::lock_guard lock(mu_);
    auto it = statuses_.find(status_key(theory, formula));
    return it == statuses_.end() ? FormulaStatus::Unchecked : it->second;
}

bool Workspace::formula_exists_locked(const std::string& theory, const std::string& formula) {
    std::set<std::string> active;
    auto loc = theories_.find(theory);
    if (loc == theories_.end()) return false;
    const Theory& th = docs_.at(loc->second.uri)->parse.ast.theories.at(loc->second.index);
    for (const auto& d : th.decls) {
        if (d->kind == DeclKind::Formula && d->name == formula) return true;
    }
    auto r = typecheck_locked(theory, active);
    return r && r->find_tcc(formula);
}

void Workspace::set_formula_status(const std::string& theory, const std::string& formula, FormulaStatus status) {
    {
        std::lock_guard lock(mu_);
        if (!formula_exists_locked(theory, formula))
            throw Error(ErrorCode::UnknownFormula, "no formula " + status_key(theory, formula),
                        {{"theory", theory}, {"formula", formula}});
        auto key = status_key(theory, formula);
        if (status == FormulaStatus::Unchecked)
            statuses_.erase(key);
        else
            statuses_[key] = status;
        save_statuses_locked();
    }
    notify({StatusChange{theory, formula, status}});
}

void Workspace::subscribe(Subscriber fn) {
    std::lock_guard lock(mu_);
    subscribers_.push_back(std::move(fn));
}

void Workspace::notify(const std::vector<StatusChange>& changes) {
    std::vector<Subscriber> subs;
    {
        std::lock_guard lock(mu_);
        subs = subscribers_;
    }
    for (const auto& c : changes) {
        for (const auto& fn : subs) fn(c);
    }
}

void Workspace::save_statuses_locked() const {
    if (root_.empty()) return;
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [key, status] : statuses_) j[key] = to_string(status);
    auto path = root_ / kStatusFile;
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
        out << j.dump(2) << "\n";
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot write " + path.string() + ": " + ec.message());
}

void Workspace::load_statuses_locked() {
    statuses_.clear();
    if (root_.empty()) return;
    auto path = root_ / kStatusFile;
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) return;
    auto j = nlohmann::json::parse(read_text(path), nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::IoError, "malformed " + path.string());
    for (const auto& [key, value] : j.items()) {
        if (!value.is_string()) continue;
        auto status = parse_status(value.get<std::string>());
        if (status && key.find('.') != std::string::npos && *status != FormulaStatus::Unchecked) statuses_[key] = *status;
    }
}

} // namespace upvs
