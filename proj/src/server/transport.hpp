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

#ifndef UPVS_SERVER_TRANSPORT_HPP
#define UPVS_SERVER_TRANSPORT_HPP

#include <atomic>
#include <mutex>
#include <optional>
#include <string>

namespace upvs {

// LSP base protocol framing: "Content-Length: N\r\n\r\n" followed by N bytes.
// Other headers are accepted and ignored.

/// Reads framed messages from a file descriptor. Not thread-safe.
class FramedReader {
public:
    /// Reading gives up once `stop` (if any) becomes true.
    explicit FramedReader(int fd, const std::atomic<bool>* stop = nullptr) : fd_(fd), stop_(stop) {}

    /// The next body, or nullopt on end of input or stop. Throws
    /// std::runtime_error on a malformed header.
    std::optional<std::string> read_message();

private:
    bool fill();

    int fd_;
    const std::atomic<bool>* stop_;
    std::string buffer_;
    bool eof_ = false;
};

/// Writes framed messages; safe to call from several threads.
class FramedWriter {
public:
    explicit FramedWriter(int fd) : fd_(fd) {}

    /// False when the peer is gone.
    bool write_message(const std::string& body);

private:
    int fd_;
    std::mutex mu_;
};

std::string frame(const std::string& body);

/// Splits framed messages out of a byte buffer, leaving partial input in it.
/// Throws std::runtime_error on a malformed header.
std::optional<std::string> take_message(std::string& buffer);

} // namespace upvs

#endif // UPVS_SERVER_TRANSPORT_HPP
