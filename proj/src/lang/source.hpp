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

#ifndef UPVS_LANG_SOURCE_HPP
#define UPVS_LANG_SOURCE_HPP

#include <compare>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace upvs {

/// 0-based line, 0-based column in UTF-16 code units (the LSP convention).
struct Position {
    int line = 0;
    int character = 0;

    auto operator<=>(const Position&) const = default;
};

/// Half-open range [start, end).
struct Range {
    Position start;
    Position end;

    bool operator==(const Range&) const = default;

    bool empty() const { return start == end; }
    bool contains(Position p) const { return start <= p && p < end; }
    /// Like contains() but also accepts the end position (cursor just after a token).
    bool touches(Position p) const { return start <= p && p <= end; }
    bool contains(const Range& inner) const { return start <= inner.start && inner.end <= end; }
};

Range span(const Range& first, const Range& last);

/// Maps between byte offsets of a UTF-8 document and LSP positions.
/// Line terminators are "\n", "\r\n" and a lone "\r".
class LineIndex {
public:
    explicit LineIndex(std::string_view text);

    Position position_of(std::size_t offset) const;
    /// position_of(to), computed from a known earlier position `from` at
    /// `from_offset`; linear in the distance rather than the line length.
    Position advance(Position from, std::size_t from_offset, std::size_t to) const;
    /// Clamps positions past a line end to the line end, and past the document to its end.
    std::size_t offset_of(Position pos) const;
    Position end_position() const { return position_of(text_.size()); }
    std::size_t line_count() const { return line_starts_.size(); }

private:
    std::string_view text_;
    std::vector<std::size_t> line_starts_;
};

/// Number of bytes in the UTF-8 sequence starting with `lead`, or 1 for an invalid lead byte.
std::size_t utf8_sequence_length(unsigned char lead);

/// Decodes one code point at `offset`; returns false for malformed input.
bool decode_utf8(std::string_view text, std::size_t offset, char32_t& cp, std::size_t& length);

enum class Severity { Error = 1, Warning = 2, Information = 3 };

struct Diagnostic {
    Range range;
    Severity severity = Severity::Error;
    std::string message;
    std::string source; // "parser" or "typechecker"

    bool operator==(const Diagnostic&) const = default;
};

const char* to_string(Severity severity);
bool has_errors(const std::vector<Diagnostic>& diagnostics);

} // namespace upvs

#endif // UPVS_LANG_SOURCE_HPP
