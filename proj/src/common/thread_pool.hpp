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

#ifndef UPVS_COMMON_THREAD_POOL_HPP
#define UPVS_COMMON_THREAD_POOL_HPP

#include <condition_variable>
#include <cstddef>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

namespace upvs {

class ThreadPool {
public:
    explicit ThreadPool(std::size_t threads);
    ~ThreadPool();
    ThreadPool(const ThreadPool&) = delete;
    ThreadPool& operator=(const ThreadPool&) = delete;

    void post(std::function<void()> task);
    std::size_t size() const { return workers_.size(); }

private:
    void run();

    std::mutex mu_;
    std::condition_variable cv_;
    std::deque<std::function<void()>> queue_;
    bool stopping_ = false;
    std::vector<std::thread> workers_;
};

// Tasks posted to one strand run one at a time in FIFO order; different
// strands run in parallel on the shared pool.
class Strand : public std::enable_shared_from_this<Strand> {
public:
    explicit Strand(ThreadPool& pool) : pool_(pool) {}

    void post(std::function<void()> task);

private:
    void drain();

    ThreadPool& pool_;
    std::mutex mu_;
    std::deque<std::function<void()>> queue_;
    bool running_ = false;
};

/// Default pool size: the logical core count, but at least two so that one
/// long proof never starves the others.
std::size_t default_pool_size();

} // namespace upvs

#endif // UPVS_COMMON_THREAD_POOL_HPP
