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

#include "batch/batch.hpp"

#include <fstream>
#include <sstream>

#include "common/error.hpp"
#include "eval/evaluator.hpp"
#include "lang/json_conv.hpp"
#include "prover/prover.hpp"
#include "server/providers.hpp"

namespace upvs {

using nlohmann::json;

BatchWorkspace open_file_workspace(const std::filesystem::path& file) {
    std::error_code ec;
    auto abs = std::filesystem::weakly_canonical(std::filesystem::absolute(file, ec), ec);
    if (ec || !std::filesystem::is_regular_file(abs, ec)) throw Error(ErrorCode::IoError, "cannot read " + file.string());
    BatchWorkspace out;
    out.workspace = std::make_unique<Workspace>(abs.parent_path());
    out.workspace->scan(false);
    out.uri = out.workspace->load_file(abs);
    return out;
}

json check_file(Workspace& ws, const std::string& uri) {
    auto diags = ws.diagnostics(uri);
    int errors = 0;
    for (const auto& d : diags) errors += d.severity == Severity::Error;
    return {{"uri", uri}, {"diagnostics", diagnostics_json(diags)}, {"tccs", tcc_summaries(ws, uri)}, {"errors", errors}};
}

json prove_file(Workspace& ws, const std::string& uri, const std::filesystem::path& scripts_dir) {
    json results = json::array();
    int proved = 0;
    bool all_checked = true;
    for (const auto& r : ws.typecheck_document(uri)) {
        const std::string& theory = r->theory->name;
        std::vector<std::pair<std::string, std::string>> goals; // name, kind
        for (const auto& d : r->theory->decls) {
            if (d->kind == DeclKind::Formula) goals.emplace_back(d->name, to_string(d->formula_kind));
        }
        for (const auto& tcc : r->tccs) goals.emplace_back(tcc.id, "tcc");
        for (auto& [name, kind] : goals) {
            std::string lower = kind;
            for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            json entry = {{"theory", theory}, {"formula", name}, {"kind", lower}};
            if (!r->typechecked()) {
                all_checked = false;
                entry["status"] = to_string(FormulaStatus::Unchecked);
                entry["message"] = "theory does not typecheck";
                results.push_back(std::move(entry));
                continue;
            }
            auto path = scripts_dir / script_file_name(theory, name);
            FormulaStatus status = FormulaStatus::Unfinished;
            std::string message;
            std::ifstream in(path, std::ios::binary);
            if (!in) {
                message = "no proof script";
            } else {
                std::stringstream text;
                text << in.rdbuf();
                try {
                    auto tree = load_and_replay(script_from_text(text.str()), r);
                    if (tree.proved()) {
                        status = FormulaStatus::Proved;
                    } else {
                        message = "script ends with " + std::to_string(tree.open_leaves().size()) + " open goal(s)";
                    }
                } catch (const Error& e) {
                    message = e.what();
                }
            }
            if (status == FormulaStatus::Proved) ++proved;
            ws.set_formula_status(theory, name, status);
            entry["status"] = to_string(status);
            entry["message"] = message;
            results.push_back(std::move(entry));
        }
    }
    return {{"uri", uri},
            {"results", results},
            {"proved", proved},
            {"total", results.size()},
            {"typechecked", all_checked}};
}

std::string evaluate_in_file(Workspace& ws, const std::string& uri, const std::string& theory, const std::string& expr,
                             std::uint64_t fuel) {
    TypecheckResultPtr ctx;
    for (const auto& r : ws.typecheck_document(uri)) {
        if (theory.empty() || r->theory->name == theory) {
            ctx = r;
            break;
        }
    }
    if (!ctx) throw Error(ErrorCode::FormulaNotFound, theory.empty() ? "no theory in " + uri : "no theory " + theory);
    if (!ctx->typechecked())
        throw Error(ErrorCode::NotTypechecked, "theory " + ctx->theory->name + " does not typecheck",
                    {{"diagnostics", diagnostics_json(ctx->diagnostics)}});
    EvalOptions opts;
    opts.fuel = fuel;
    return render(*evaluate_text(expr, *ctx, opts));
}

json index_json(Workspace& ws) {
    json decls = json::array();
    for (const auto& e : ws.all_declarations()) {
        decls.push_back({{"name", e.name},
                         {"kind", e.kind},
                         {"theory", e.theory},
                         {"uri", e.uri},
                         {"range", e.range},
                         {"description", e.description},
                         {"preview", e.preview}});
    }
    return {{"declarations", std::move(decls)}, {"theories", theory_tree_json(ws.theory_tree())}};
}

} // namespace upvs
