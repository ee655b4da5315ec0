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

#include "prover/prover.hpp"

#include <algorithm>
#include <cctype>

#include "common/error.hpp"
#include "lang/printer.hpp"

namespace upvs {

const char* to_string(Outcome outcome) {
    switch (outcome) {
    case Outcome::Branched: return "branched";
    case Outcome::Closed: return "closed";
    case Outcome::NoChange: return "no-change";
    }
    return "";
}

// --- command parsing --------------------------------------------------------------

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names = {"flatten", "split", "skolem", "inst", "expand", "assert",
                                                   "prop",    "grind", "postpone", "undo", "quit"};
    return names;
}

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// Strips one layer of quotes when they enclose the whole argument.
std::string unquote(const std::string& s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"' &&
        s.find('"', 1) == s.size() - 1)
        return s.substr(1, s.size() - 2);
    return s;
}

} // namespace

Command parse_command(const std::string& line) {
    std::string s = trim(line);
    if (s.size() >= 2 && s.front() == '(' && s.back() == ')') s = trim(s.substr(1, s.size() - 2));
    auto space = s.find_first_of(" \t");
    Command cmd;
    cmd.name = s.substr(0, space);
    std::transform(cmd.name.begin(), cmd.name.end(), cmd.name.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    std::string rest = space == std::string::npos ? "" : trim(s.substr(space));
    const auto& names = command_names();
    if (std::find(names.begin(), names.end(), cmd.name) == names.end())
        throw Error(ErrorCode::UnknownCommand, "unknown command '" + cmd.name + "'");
    if (cmd.name == "inst") {
        auto sp = rest.find_first_of(" \t");
        std::string num = rest.substr(0, sp);
        std::size_t used = 0;
        try {
            cmd.fnum = std::stoi(num, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (num.empty() || used != num.size() || cmd.fnum == 0)
            throw Error(ErrorCode::InvalidArgument, "usage: inst <fnum> <term>");
        cmd.arg = sp == std::string::npos ? "" : unquote(trim(rest.substr(sp)));
        if (cmd.arg.empty()) throw Error(ErrorCode::InvalidArgument, "usage: inst <fnum> <term>");
        cmd.text = "inst " + std::to_string(cmd.fnum) + " " + cmd.arg;
    } else if (cmd.name == "expand") {
        cmd.arg = unquote(rest);
        if (cmd.arg.empty() || cmd.arg.find_first_of(" \t") != std::string::npos)
            throw Error(ErrorCode::InvalidArgument, "usage: expand <name>");
        cmd.text = "expand " + cmd.arg;
    } else {
        if (!rest.empty()) throw Error(ErrorCode::InvalidArgument, "'" + cmd.name + "' takes no arguments");
        cmd.text = cmd.name;
    }
    return cmd;
}

// --- proof tree --------------------------------------------------------------------------

ProofTree::ProofTree(TypecheckResultPtr ctx, std::string theory, std::string formula, ExprPtr goal)
    : theory_(std::move(theory)), formula_(std::move(formula)) {
    pc_.theory = std::move(ctx);
    ProofNode root;
    root.sequent.consequents.push_back(std::move(goal));
    nodes_.push_back(std::move(root));
    active_ = 0;
}

ProofTree::Snapshot ProofTree::snapshot() const { return Snapshot{nodes_, active_, history_, pc_}; }

std::string ProofTree::active_rendering() const {
    return active_ ? render(nodes_[static_cast<std::size_t>(*active_)].sequent) : std::string();
}

std::vector<int> ProofTree::open_leaves() const {
    std::vector<int> out;
    std::vector<int> stack = {0};
    while (!stack.empty()) {
        int id = stack.back();
        stack.pop_back();
        const ProofNode& n = nodes_[static_cast<std::size_t>(id)];
        if (n.closed) continue;
        if (n.children.empty()) out.push_back(id);
        for (auto it = n.children.rbegin(); it != n.children.rend(); ++it) stack.push_back(*it);
    }
    return out;
}

std::optional<int> ProofTree::next_open_after(int id) const {
    // Node ids grow in creation order, but depth-first order is what counts:
    // walk the preorder and take the first open leaf after `id`, wrapping.
    std::vector<int> order;
    std::vector<int> stack = {0};
    while (!stack.empty()) {
        int n = stack.back();
        stack.pop_back();
        order.push_back(n);
        const auto& ch = nodes_[static_cast<std::size_t>(n)].children;
        for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
    }
    auto pos = std::find(order.begin(), order.end(), id);
    auto is_open_leaf = [&](int n) {
        const auto& node = nodes_[static_cast<std::size_t>(n)];
        return !node.closed && node.children.empty();
    };
    for (auto it = pos == order.end() ? order.begin() : pos + 1; it != order.end(); ++it) {
        if (*it != id && is_open_leaf(*it)) return *it;
    }
    for (int n : order) {
        if (n != id && is_open_leaf(n)) return n;
    }
    return std::nullopt;
}

void ProofTree::propagate_closed(int id) {
    int p = nodes_[static_cast<std::size_t>(id)].parent;
    while (p >= 0) {
        auto& parent = nodes_[static_cast<std::size_t>(p)];
        bool all = std::all_of(parent.children.begin(), parent.children.end(),
                               [&](int c) { return nodes_[static_cast<std::size_t>(c)].closed; });
        if (!all) return;
        parent.closed = true;
        p = parent.parent;
    }
}

ProverResult ProofTree::close_leaf(const Command& cmd) {
    int id = *active_;
    auto& leaf = nodes_[static_cast<std::size_t>(id)];
    leaf.command = cmd.text;
    leaf.closed = true;
    propagate_closed(id);
    active_ = next_open_after(id);
    history_.push_back(cmd.text);
    ProverResult r;
    r.outcome = Outcome::Closed;
    r.active = active_;
    r.effective = true;
    r.message = proved() ? "Q.E.D." : "goal closed";
    return r;
}

ProverResult ProofTree::expand_leaf(const Command& cmd, std::vector<Sequent> children) {
    int id = *active_;
    if (children.empty()) return close_leaf(cmd);
    std::vector<int> ids;
    for (auto& s : children) {
        ProofNode n;
        n.id = static_cast<int>(nodes_.size());
        n.parent = id;
        n.sequent = std::move(s);
        ids.push_back(n.id);
        nodes_.push_back(std::move(n));
    }
    auto& leaf = nodes_[static_cast<std::size_t>(id)];
    leaf.command = cmd.text;
    leaf.children = ids;
    active_ = ids.front();
    history_.push_back(cmd.text);
    ProverResult r;
    r.outcome = Outcome::Branched;
    r.children = ids;
    r.active = active_;
    r.effective = true;
    return r;
}

ProverResult ProofTree::apply(const std::string& command) { return apply(parse_command(command)); }

ProverResult ProofTree::apply(const Command& cmd) {
    if (abandoned_) throw Error(ErrorCode::SessionDone, "proof was abandoned");
    if (cmd.name == "undo") {
        if (undo_stack_.empty()) throw Error(ErrorCode::UndoAtRoot, "nothing to undo");
        Snapshot s = std::move(undo_stack_.back());
        undo_stack_.pop_back();
        nodes_ = std::move(s.nodes);
        active_ = s.active;
        history_ = std::move(s.history);
        pc_ = std::move(s.pc);
        ProverResult r;
        r.active = active_;
        r.effective = true;
        r.message = "undone";
        return r;
    }
    if (cmd.name == "quit") {
        abandoned_ = true;
        ProverResult r;
        r.active = active_;
        r.message = "proof abandoned";
        return r;
    }
    if (!active_) throw Error(ErrorCode::NoOpenGoal, "no open goal");

    Snapshot before = snapshot();
    const Sequent current = nodes_[static_cast<std::size_t>(*active_)].sequent;
    const TypecheckResult& ctx = *pc_.theory;
    ProverResult result;
    auto unchanged = [&](std::string why) {
        pc_ = before.pc; // rules may have consumed skolem numbers
        ProverResult r;
        r.active = active_;
        r.message = std::move(why);
        return r;
    };
    auto single = [&](std::optional<Sequent> s, const char* why) {
        return s ? expand_leaf(cmd, {std::move(*s)}) : unchanged(why);
    };
    auto leaves = [&](std::vector<Sequent> out) {
        if (out.size() == 1 && alpha_equal(out[0], current)) return unchanged("no change");
        return expand_leaf(cmd, std::move(out));
    };

    try {
        if (cmd.name == "flatten") {
            result = single(flatten(current), "nothing to flatten");
        } else if (cmd.name == "split") {
            auto parts = split(current);
            result = parts ? expand_leaf(cmd, std::move(*parts)) : unchanged("nothing to split");
        } else if (cmd.name == "skolem") {
            result = single(skolemize(current, pc_), "no quantifier to skolemize");
        } else if (cmd.name == "inst") {
            result = expand_leaf(cmd, instantiate(current, cmd.fnum, cmd.arg, pc_));
        } else if (cmd.name == "expand") {
            result = single(expand(current, cmd.arg, ctx), "no occurrence to expand");
        } else if (cmd.name == "assert") {
            auto a = assert_sequent(current, ctx);
            result = a.closed ? close_leaf(cmd) : single(a.simplified, "no change");
        } else if (cmd.name == "prop") {
            result = leaves(prop_leaves(current, ctx, pc_.cancel));
        } else if (cmd.name == "grind") {
            result = leaves(grind_leaves(current, pc_));
        } else if (cmd.name == "postpone") {
            auto next = next_open_after(*active_);
            if (next) {
                active_ = next;
                history_.push_back(cmd.text);
                result.active = active_;
                result.effective = true;
                result.message = "postponed";
            } else {
                result = unchanged("no other open goal");
            }
        }
    } catch (...) {
        pc_ = before.pc;
        throw;
    }
    if (result.effective) undo_stack_.push_back(std::move(before));
    return result;
}

nlohmann::json ProofTree::to_json() const {
    using nlohmann::json;
    json nodes = json::array();
    for (const auto& n : nodes_) {
        json ante = json::array(), cons = json::array();
        for (const auto& f : n.sequent.antecedents) ante.push_back(pretty_print(f));
        for (const auto& f : n.sequent.consequents) cons.push_back(pretty_print(f));
        nodes.push_back({{"id", n.id},
                         {"parent", n.parent < 0 ? json(nullptr) : json(n.parent)},
                         {"command", n.command.empty() ? json(nullptr) : json(n.command)},
                         {"state", n.closed ? "closed" : "open"},
                         {"antecedents", ante},
                         {"consequents", cons},
                         {"children", n.children}});
    }
    return {{"theory", theory_},
            {"formula", formula_},
            {"root", 0},
            {"active", active_ ? json(*active_) : json(nullptr)},
            {"proved", proved()},
            {"history", history_},
            {"nodes", nodes}};
}

ProofTree start_proof(const TypecheckResultPtr& ctx, const std::string& formula) {
    if (!ctx || !ctx->theory) throw Error(ErrorCode::NotTypechecked, "theory is not typechecked");
    const std::string& theory = ctx->theory->name;
    ExprPtr goal;
    if (int i = ctx->find_decl(formula); i >= 0 && ctx->theory->decls[static_cast<std::size_t>(i)]->kind == DeclKind::Formula) {
        goal = ctx->theory->decls[static_cast<std::size_t>(i)]->body;
    } else if (const Tcc* t = ctx->find_tcc(formula)) {
        goal = t->obligation;
    }
    if (!goal) throw Error(ErrorCode::FormulaNotFound, "no formula '" + formula + "' in theory " + theory);
    if (!ctx->typechecked())
        throw Error(ErrorCode::NotTypechecked, "theory " + theory + " has type errors");
    return ProofTree(ctx, theory, formula, goal);
}

// --- scripts -------------------------------------------------------------------------------

std::string script_file_name(const std::string& theory, const std::string& formula) {
    return theory + "." + formula + ".proof.json";
}

std::string script_to_text(const ProofScript& script) {
    nlohmann::ordered_json j;
    j["theory"] = script.theory;
    j["formula"] = script.formula;
    j["commands"] = script.commands;
    return j.dump(2) + "\n";
}

ProofScript script_from_text(const std::string& text) {
    auto j = nlohmann::json::parse(text, nullptr, false);
    auto bad = [](const std::string& why) { return Error(ErrorCode::InvalidArgument, "malformed proof script: " + why); };
    if (j.is_discarded() || !j.is_object()) throw bad("not a JSON object");
    if (!j.contains("theory") || !j["theory"].is_string()) throw bad("missing \"theory\"");
    if (!j.contains("formula") || !j["formula"].is_string()) throw bad("missing \"formula\"");
    if (!j.contains("commands") || !j["commands"].is_array()) throw bad("missing \"commands\"");
    ProofScript s;
    s.theory = j["theory"];
    s.formula = j["formula"];
    for (const auto& c : j["commands"]) {
        if (!c.is_string()) throw bad("commands must be strings");
        s.commands.push_back(c);
    }
    return s;
}

ProofScript save_script(const ProofTree& tree) { return ProofScript{tree.theory(), tree.formula(), tree.history()}; }

ProofTree load_and_replay(const ProofScript& script, const TypecheckResultPtr& ctx) {
    if (ctx && ctx->theory && ctx->theory->name != script.theory)
        throw Error(ErrorCode::FormulaNotFound, "script is for theory " + script.theory);
    ProofTree tree = start_proof(ctx, script.formula);
    for (std::size_t i = 0; i < script.commands.size(); ++i) {
        const std::string& cmd = script.commands[i];
        std::string sequent = tree.active_rendering();
        std::string message;
        try {
            auto r = tree.apply(cmd);
            if (r.effective) continue;
            message = r.message;
        } catch (const Error& e) {
            message = e.what();
        }
        int step = static_cast<int>(i + 1);
        throw Error(ErrorCode::CommandFailed,
                    "step " + std::to_string(step) + " (" + cmd + ") failed: " + message,
                    {{"step", step}, {"command", cmd}, {"sequent", sequent}, {"message", message}});
    }
    return tree;
}

} // namespace upvs
