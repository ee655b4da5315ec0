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

#include "common/error.hpp"

namespace upvs {

const char* to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::StaleVersion: return "stale-version";
    case ErrorCode::DocumentNotOpen: return "document-not-open";
    case ErrorCode::NotTypechecked: return "not-typechecked";
    case ErrorCode::DuplicateSession: return "duplicate-session";
    case ErrorCode::UnknownSession: return "unknown-session";
    case ErrorCode::SessionDone: return "session-done";
    case ErrorCode::UnknownCommand: return "unknown-command";
    case ErrorCode::BadFnum: return "bad-fnum";
    case ErrorCode::IllTypedTerm: return "ill-typed-term";
    case ErrorCode::UndoAtRoot: return "undo-at-root";
    case ErrorCode::FormulaNotFound: return "formula-not-found";
    case ErrorCode::EvalInvalid: return "invalid-expression";
    case ErrorCode::DivisionByZero: return "division-by-zero";
    case ErrorCode::FuelExhausted: return "fuel-exhausted";
    case ErrorCode::NonExecutable: return "non-executable";
    case ErrorCode::Capture: return "capture";
    case ErrorCode::ReadOnlySymbol: return "read-only-symbol";
    case ErrorCode::InvalidIdentifier: return "invalid-identifier";
    case ErrorCode::DoubleInitialize: return "double-initialize";
    case ErrorCode::IoError: return "io-error";
    case ErrorCode::UnknownFormula: return "unknown-formula";
    case ErrorCode::NoSymbol: return "no-symbol";
    case ErrorCode::CommandFailed: return "command-failed";
    case ErrorCode::NoOpenGoal: return "no-open-goal";
    case ErrorCode::UnresolvedName: return "unresolved-name";
    case ErrorCode::TypeMismatch: return "type-mismatch";
    case ErrorCode::Cancelled: return "cancelled";
    case ErrorCode::PortInUse: return "port-in-use";
    case ErrorCode::InvalidArgument: return "invalid-argument";
    }
    return "unknown";
}

} // namespace upvs
