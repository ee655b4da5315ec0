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

#ifndef UPVS_PROVER_RULES_HPP
#define UPVS_PROVER_RULES_HPP

#include <atomic>
#include <optional>
#include <string>
#include <vector>

#include "prover/sequent.hpp"
#include "typecheck/typecheck.hpp"

namespace upvs {

// Per-proof state the rules read and extend: the theory context and the
// skolem constants introduced so far.
struct ProofContext {
    TypecheckResultPtr theory;
    int skolem_counter = 0; // last number handed out
    std::vector<LocalSymbol> constants;
    const std::atomic<bool>* cancel = nullptr; // macros stop with Error(Cancelled)
};

// Each rule returns nullopt when it does not apply (no change).

std::optional<Sequent> flatten(const Sequent& s);
std::optional<std::vector<Sequent>> split(const Sequent& s);
/// Skolemizes the first FORALL consequent or EXISTS antecedent.
std::optional<Sequent> skolemize(const Sequent& s, ProofContext& pc);
/// Main sequent first, then one sequent per subtype obligation of the term.
/// Throws Error(BadFnum | IllTypedTerm).
std::vector<Sequent> instantiate(const Sequent& s, int fnum, const std::string& term, ProofContext& pc);
/// Throws Error(InvalidArgument) when `name` has no visible definition.
std::optional<Sequent> expand(const Sequent& s, const std::string& name, const TypecheckResult& ctx);

struct AssertOutcome {
    bool closed = false;
    std::optional<Sequent> simplified; // when not closed and something changed
};

AssertOutcome assert_sequent(const Sequent& s, const TypecheckResult& ctx);

/// Open leaves left by repeated flatten/split/assert.
std::vector<Sequent> prop_leaves(const Sequent& s, const TypecheckResult& ctx,
                                 const std::atomic<bool>* cancel = nullptr);
/// Open leaves left by expanding definitions, skolemizing and prop.
std::vector<Sequent> grind_leaves(const Sequent& s, ProofContext& pc);

/// Ground simplification used by assert (exposed for tests).
ExprPtr simplify_ground(const ExprPtr& e, const TypecheckResult& ctx);

} // namespace upvs

#endif // UPVS_PROVER_RULES_HPP
