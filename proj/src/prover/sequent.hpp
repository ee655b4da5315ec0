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

#ifndef UPVS_PROVER_SEQUENT_HPP
#define UPVS_PROVER_SEQUENT_HPP

#include <string>
#include <vector>

#include "lang/ast.hpp"

namespace upvs {

// antecedents[i] is formula -(i+1), consequents[i] is formula i+1.
struct Sequent {
    std::vector<ExprPtr> antecedents;
    std::vector<ExprPtr> consequents;
};

/// "[-1] a\n|-------\n[1] b\n"
std::string render(const Sequent& s);
bool alpha_equal(const Sequent& a, const Sequent& b);

/// Formula at PVS-style number `fnum` (negative: antecedent), or null.
ExprPtr formula_at(const Sequent& s, int fnum);

// Propositional reading of a boolean expression. Equality between booleans
// reads as IFF, and `a /= b` as NOT (a = b).
enum class PropKind { Atom, True, False, Not, And, Or, Implies, Iff, If };

struct PropView {
    PropKind kind = PropKind::Atom;
    ExprPtr a, b, c;
};

PropView prop_view(const ExprPtr& e);

constexpr std::size_t kMaxTruthTableAtoms = 20;

/// Whether the sequent holds under every assignment of its atoms (atoms are
/// compared up to alpha-equivalence). With more than kMaxTruthTableAtoms
/// atoms only syntactic closure is checked.
bool is_propositional_tautology(const Sequent& s);

} // namespace upvs

#endif // UPVS_PROVER_SEQUENT_HPP
