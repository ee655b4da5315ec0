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

#ifndef UPVS_PROVER_PROVER_HPP
#define UPVS_PROVER_PROVER_HPP

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "prover/rules.hpp"
#include "prover/sequent.hpp"
#include "typecheck/typecheck.hpp"

namespace upvs {

struct ProofNode {
    int id = 0;
    int parent = -1;
    Sequent sequent;
    std::string command; // empty while the node is a leaf
    std::vector<int> children;
    bool closed = false;
};

enum class Outcome { Branched, Closed, NoChange };

const char* to_string(Outcome outcome);

struct ProverResult {
    Outcome outcome = Outcome::NoChange;
    std::vector<int> children;
    std::optional<int> active;
    // False when the command did nothing; such commands are not recorded.
    bool effective = false;
    std::string message;
};

/// A parsed prover command; `text` is its canonical spelling.
struct Command {
    std::string name;
    int fnum = 0;
    std::string arg; // inst term or expand name
    std::string text;
};

/// Accepts "inst -1 x!1", "inst -1 \"x!1\"" and "(inst -1 \"x!1\")".
/// Throws Error(UnknownCommand | InvalidArgument).
Command parse_command(const std::string& line);

const std::vector<std::string>& command_names();

class ProofTree {
public:
    ProofTree(TypecheckResultPtr ctx, std::string theory, std::string formula, ExprPtr goal);

    /// Throws Error on unknown commands, bad arguments, or when no goal is open.
    ProverResult apply(const std::string& command);
    ProverResult apply(const Command& command);

    bool proved() const { return nodes_[0].closed; }
    bool abandoned() const { return abandoned_; }
    std::optional<int> active() const { return active_; }
    const ProofNode& node(int id) const { return nodes_.at(static_cast<std::size_t>(id)); }
    const std::vector<ProofNode>& nodes() const { return nodes_; }
    const std::vector<std::string>& history() const { return history_; }
    const std::string& theory() const { return theory_; }
    const std::string& formula() const { return formula_; }
    const TypecheckResult& context() const { return *pc_.theory; }
    /// Flag polled by prop and grind; they stop with Error(Cancelled).
    void set_cancel(const std::atomic<bool>* flag) { pc_.cancel = flag; }

    /// Rendering of the active sequent, or "" when none is open.
    std::string active_rendering() const;
    /// Ids of open leaves in depth-first order.
    std::vector<int> open_leaves() const;

    nlohmann::json to_json() const;

private:
    struct Snapshot {
        std::vector<ProofNode> nodes;
        std::optional<int> active;
        std::vector<std::string> history;
        ProofContext pc;
    };

    ProverResult expand_leaf(const Command& cmd, std::vector<Sequent> children);
    ProverResult close_leaf(const Command& cmd);
    void propagate_closed(int id);
    std::optional<int> next_open_after(int id) const;
    Snapshot snapshot() const;

    std::string theory_;
    std::string formula_;
    std::vector<ProofNode> nodes_;
    std::optional<int> active_;
    std::vector<std::string> history_;
    ProofContext pc_;
    std::vector<Snapshot> undo_stack_;
    bool abandoned_ = false;
};

/// Root sequent "|- goal" for a formula declaration or TCC id of `ctx`.
/// Throws Error(NotTypechecked | FormulaNotFound).
ProofTree start_proof(const TypecheckResultPtr& ctx, const std::string& formula);

struct ProofScript {
    std::string theory;
    std::string formula;
    std::vector<std::string> commands;
};

std::string script_file_name(const std::string& theory, const std::string& formula);
/// Keys in the order theory, formula, commands.
std::string script_to_text(const ProofScript& script);
/// Throws Error(InvalidArgument) on malformed scripts.
ProofScript script_from_text(const std::string& text);

ProofScript save_script(const ProofTree& tree);
/// Throws Error(FormulaNotFound | NotTypechecked), or Error(CommandFailed)
/// with data {step, command, sequent, message} where step counts from 1.
ProofTree load_and_replay(const ProofScript& script, const TypecheckResultPtr& ctx);

} // namespace upvs

#endif // UPVS_PROVER_PROVER_HPP
