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

#ifndef UPVS_COMMON_ERROR_HPP
#define UPVS_COMMON_ERROR_HPP

#include <stdexcept>
#include <string>

#include <json.hpp>

namespace upvs {

// Stable numeric codes. They double as JSON-RPC application error codes and
// as the status values returned by the C API (see docs/protocol.md).
enum class ErrorCode : int {
    StaleVersion = 1001,
    DocumentNotOpen = 1002,
    NotTypechecked = 1003,
    DuplicateSession = 1004,
    UnknownSession = 1005,
    SessionDone = 1006,
    UnknownCommand = 1007,
    BadFnum = 1008,
    IllTypedTerm = 1009,
    UndoAtRoot = 1010,
    FormulaNotFound = 1011,
    EvalInvalid = 1012,
    DivisionByZero = 1013,
    FuelExhausted = 1014,
    NonExecutable = 1015,
    Capture = 1016,
    ReadOnlySymbol = 1017,
    InvalidIdentifier = 1018,
    DoubleInitialize = 1019,
    IoError = 1020,
    UnknownFormula = 1021,
    NoSymbol = 1022,
    CommandFailed = 1023,
    NoOpenGoal = 1024,
    UnresolvedName = 1025,
    TypeMismatch = 1026,
    Cancelled = 1027,
    PortInUse = 1028,
    InvalidArgument = 1029,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, nlohmann::json data = nullptr)
        : std::runtime_error(message), code_(code), data_(std::move(data)) {}

    ErrorCode code() const noexcept { return code_; }
    const nlohmann::json& data() const noexcept { return data_; }

private:
    ErrorCode code_;
    nlohmann::json data_;
};

} // namespace upvs

#endif // UPVS_COMMON_ERROR_HPP
