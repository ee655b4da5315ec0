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

#include "lang/source.hpp"

#include <algorithm>

namespace upvs {

Range span(const Range& first, const Range& last) {
    return Range{std::min(first.start, last.start), std::max(first.end, last.end)};
}

std::size_t utf8_sequence_length(unsigned char lead) {
    if (lead < 0x80) return 1;
    if ((lead & 0xE0) == 0xC0) return 2;
    if ((lead & 0xF0) == 0xE0) return 3;
    if ((lead & 0xF8) == 0xF0) return 4;
    return 1;
}

bool decode_utf8(std::string_view text, std::size_t offset, char32_t& cp, std::size_t& length) {
    auto lead = static_cast<unsigned char>(text[offset]);
    length = utf8_sequence_length(lead);
    if (length == 1) {
        cp = lead;
        return lead < 0x80;
    }
    if (offset + length > text.size()) {
        length = 1;
        return false;
    }
    char32_t value = lead & (0x7F >> length);
    for (std::size_t i = 1; i < length; ++i) {
        auto c = static_cast<unsigned char>(text[offset + i]);
        if ((c & 0xC0) != 0x80) {
            length = 1;
            return false;
        }
        value = (value << 6) | (c & 0x3F);
    }
    cp = value;
    return true;
}

LineIndex::LineIndex(std::string_view text) : text_(text) {
    line_starts_.push_back(0);
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '\n') {
            line_starts_.push_back(i + 1);
        } else if (text[i] == '\r') {
            if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
            line_starts_.push_back(i + 1);
        }
    }
}

static int utf16_units(std::string_view text, std::size_t from, std::size_t to) {
    int units = 0;
    std::size_t i = from;
    while (i < to) {
        char32_t cp = 0;
        std::size_t len = 1;
        bool ok = decode_utf8(text, i, cp, len);
        units += (ok && cp >= 0x10000) ? 2 : 1;
        i += len;
    }
    return units;
}

Position LineIndex::position_of(std::size_t offset) const {
    offset = std::min(offset, text_.size());
    auto it = std::upper_bound(line_starts_.begin(), line_starts_.end(), offset);
    auto line = static_cast<std::size_t>(std::distance(line_starts_.begin(), it)) - 1;
    return Position{static_cast<int>(line), utf16_units(text_, line_starts_[line], offset)};
}

Position LineIndex::advance(Position from, std::size_t from_offset, std::size_t to) const {
    to = std::min(to, text_.size());
    auto next_line = static_cast<std::size_t>(from.line) + 1;
    if (to < from_offset || (next_line < line_starts_.size() && to >= line_starts_[next_line]))
        return position_of(to);
    return Position{from.line, from.character + utf16_units(text_, from_offset, to)};
}

std::size_t LineIndex::offset_of(Position pos) const {
    if (pos.line < 0) return 0;
    if (static_cast<std::size_t>(pos.line) >= line_starts_.size()) return text_.size();
    std::size_t i = line_starts_[pos.line];
    std::size_t line_end = text_.size();
    if (static_cast<std::size_t>(pos.line) + 1 < line_starts_.size()) {
        // Exclude the terminator ("\n", "\r\n" or "\r") from the addressable columns.
        line_end = line_starts_[pos.line + 1] - 1;
        if (text_[line_end] == '\n' && line_end > i && text_[line_end - 1] == '\r') --line_end;
    }
    int units = 0;
    while (i < line_end && units < pos.character) {
        char32_t cp = 0;
        std::size_t len = 1;
        bool ok = decode_utf8(text_, i, cp, len);
        units += (ok && cp >= 0x10000) ? 2 : 1;
        i += len;
    }
    return i;
}

const char* to_string(Severity severity) {
    switch (severity) {
    case Severity::Error: return "error";
    case Severity::Warning: return "warning";
    case Severity::Information: return "information";
    }
    return "error";
}

bool has_errors(const std::vector<Diagnostic>& diagnostics) {
    return std::any_of(diagnostics.begin(), diagnostics.end(),
                       [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

} // namespace upvs
