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

#include "server/transport.hpp"

#include <cctype>
#include <cerrno>
#include <charconv>
#include <stdexcept>

#include <poll.h>
#include <unistd.h>

namespace upvs {

namespace {

bool iequals(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(a[i])) != std::tolower(static_cast<unsigned char>(b[i])))
            return false;
    }
    return true;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

} // namespace

std::string frame(const std::string& body) {
    return "Content-Length: " + std::to_string(body.size()) + "\r\n\r\n" + body;
}

std::optional<std::string> take_message(std::string& buffer) {
    auto header_end = buffer.find("\r\n\r\n");
    if (header_end == std::string::npos) {
        if (buffer.size() > 64 * 1024) throw std::runtime_error("header too long");
        return std::nullopt;
    }
    std::optional<std::size_t> length;
    std::string_view headers(buffer.data(), header_end);
    while (!headers.empty()) {
        auto eol = headers.find("\r\n");
        auto line = headers.substr(0, eol);
        headers = eol == std::string_view::npos ? std::string_view() : headers.substr(eol + 2);
        auto colon = line.find(':');
        if (colon == std::string_view::npos) throw std::runtime_error("malformed header line");
        if (!iequals(trim(line.substr(0, colon)), "Content-Length")) continue;
        auto value = trim(line.substr(colon + 1));
        std::size_t n = 0;
        auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), n);
        if (ec != std::errc() || end != value.data() + value.size()) throw std::runtime_error("bad Content-Length");
        length = n;
    }
    if (!length) throw std::runtime_error("missing Content-Length");
    std::size_t body_start = header_end + 4;
    if (buffer.size() - body_start < *length) return std::nullopt;
    std::string body = buffer.substr(body_start, *length);
    buffer.erase(0, body_start + *length);
    return body;
}

bool FramedReader::fill() {
    char chunk[8192];
    for (;;) {
        if (stop_) {
            if (stop_->load()) return false;
            pollfd p{fd_, POLLIN, 0};
            int ready = ::poll(&p, 1, 100);
            if (ready < 0 && errno != EINTR) return false;
            if (ready <= 0) continue;
        }
        ssize_t n = ::read(fd_, chunk, sizeof chunk);
        if (n > 0) {
            buffer_.append(chunk, static_cast<std::size_t>(n));
            return true;
        }
        if (n < 0 && errno == EINTR) continue;
        return false;
    }
}

std::optional<std::string> FramedReader::read_message() {
    for (;;) {
        if (auto msg = take_message(buffer_)) return msg;
        if (eof_ || !fill()) {
            eof_ = true;
            return std::nullopt;
        }
    }
}

bool FramedWriter::write_message(const std::string& body) {
    std::string data = frame(body);
    std::lock_guard lock(mu_);
    std::size_t done = 0;
    while (done < data.size()) {
        ssize_t n = ::write(fd_, data.data() + done, data.size() - done);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) return false;
        done += static_cast<std::size_t>(n);
    }
    return true;
}

} // namespace upvs
