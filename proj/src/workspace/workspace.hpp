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

#ifndef UPVS_WORKSPACE_WORKSPACE_HPP
#define UPVS_WORKSPACE_WORKSPACE_HPP

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lang/parser.hpp"
#include "typecheck/typecheck.hpp"

namespace upvs {

// One version of a document with its parse. Immutable once published, so a
// snapshot can be read while the workspace moves on.
struct SourceUnit {
    std::string uri;
    int version = 0;
    std::string text;
    ParseResult parse;
    LineIndex lines;

    SourceUnit(std::string uri_, int version_, std::string text_);
    SourceUnit(const SourceUnit&) = delete;
    SourceUnit& operator=(const SourceUnit&) = delete;
};
using SourceUnitPtr = std::shared_ptr<const SourceUnit>;

struct DeclEntry {
    std::string name;
    std::string kind; // type | const | function | formula | tcc | variable
    std::string theory;
    std::string uri;
    Range range;      // the name
    Range full_range; // the whole declaration
    std::string preview;
    std::string description;
    int decl_index = -1; // -1 for TCCs and variables
};

enum class FormulaStatus { Unchecked, Unfinished, Proved, Failed };

const char* to_string(FormulaStatus status);
std::optional<FormulaStatus> parse_status(const std::string& text);

struct FormulaNode {
    std::string name;
    std::string kind; // theorem | lemma | conjecture | tcc
    FormulaStatus status = FormulaStatus::Unchecked;
    Range range;
};

struct TheoryNode {
    std::string uri;
    std::string name;
    Range range;
    std::vector<FormulaNode> formulas;
};

using TheoryTree = std::vector<TheoryNode>;

struct StatusChange {
    std::string theory;
    std::string formula;
    FormulaStatus status;
};

// Symbol under a position: exact when the enclosing theory typechecks,
// otherwise every declaration sharing the name.
struct Resolution {
    std::string name;
    Range range;
    std::optional<DeclEntry> exact;
    std::vector<DeclEntry> candidates;
    bool found() const { return exact || !candidates.empty(); }
};

constexpr const char* kStatusFile = ".pvsstatus.json";

class Workspace {
public:
    /// An empty root keeps statuses in memory only.
    explicit Workspace(std::filesystem::path root = {});

    const std::filesystem::path& root() const { return root_; }

    /// Loads every ".pvs" file below the root (or directly in it) that is not
    /// open already, and the status sidecar. Throws Error(IoError) when the
    /// root is unreadable.
    void scan(bool recursive = true);
    /// Loads one file from disk; returns its uri. Throws Error(IoError).
    std::string load_file(const std::filesystem::path& file);

    /// Throws Error(StaleVersion) unless `version` exceeds the stored one.
    SourceUnitPtr upsert_document(const std::string& uri, const std::string& text, int version);
    /// Drops an editor overlay, falling back to the file on disk if any.
    void close_document(const std::string& uri);
    SourceUnitPtr document(const std::string& uri) const;
    std::vector<std::string> document_uris() const;

    /// Typechecks (with caching) the named theory; null if unknown.
    TypecheckResultPtr typecheck_theory(const std::string& theory);
    /// Results for every theory of a document, in source order.
    std::vector<TypecheckResultPtr> typecheck_document(const std::string& uri);
    /// Name of the theory whose range contains `pos`, or the first one.
    std::optional<std::string> theory_at(const std::string& uri, Position pos) const;
    std::optional<std::string> uri_of_theory(const std::string& theory) const;
    /// Parse diagnostics, plus typechecker diagnostics when the document
    /// parses cleanly; sorted by position. Empty for unknown documents.
    std::vector<Diagnostic> diagnostics(const std::string& uri);

    /// All declarations named `name` in the workspace and prelude, ordered by
    /// (uri, offset).
    std::vector<DeclEntry> find_declaration(const std::string& name) const;
    /// Every indexed declaration (prelude included), same order.
    std::vector<DeclEntry> all_declarations() const;
    Resolution resolve_symbol(const std::string& uri, Position pos);
    /// The uses and binding occurrence of the symbol at `pos` by uri.
    /// Throws Error(NoSymbol | NotTypechecked | ReadOnlySymbol).
    std::map<std::string, std::vector<Range>> occurrences(const std::string& uri, Position pos,
                                                          std::string* name_out = nullptr);

    TheoryTree theory_tree();
    FormulaStatus formula_status(const std::string& theory, const std::string& formula) const;
    /// Throws Error(UnknownFormula).
    void set_formula_status(const std::string& theory, const std::string& formula, FormulaStatus status);

    using Subscriber = std::function<void(const StatusChange&)>;
    void subscribe(Subscriber fn);

private:
    struct TheoryLoc {
        std::string uri;
        std::size_t index = 0;
    };

    void install(SourceUnitPtr unit);
    TypecheckResultPtr typecheck_locked(const std::string& theory, std::set<std::string>& active);
    std::vector<DeclEntry> entries_locked() const;
    void add_entries(const TypecheckResult* checked, const Theory& th, const std::string& uri,
                     std::vector<DeclEntry>& out) const;
    bool formula_exists_locked(const std::string& theory, const std::string& formula);
    void save_statuses_locked() const;
    void load_statuses_locked();
    void notify(const std::vector<StatusChange>& changes);

    std::filesystem::path root_;
    mutable std::recursive_mutex mu_;
    std::map<std::string, SourceUnitPtr> docs_;
    std::set<std::string> overlays_; // uris owned by the editor
    std::map<std::string, TheoryLoc> theories_;
    std::map<std::string, TypecheckResultPtr> cache_;
    std::map<std::string, FormulaStatus> statuses_; // "theory.formula"
    std::vector<Subscriber> subscribers_;
};

} // namespace upvs

#endif // UPVS_WORKSPACE_WORKSPACE_HPP
