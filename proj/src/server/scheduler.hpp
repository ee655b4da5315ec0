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

#ifndef UPVS_SERVER_SCHEDULER_HPP
#define UPVS_SERVER_SCHEDULER_HPP

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <thread>
#include <utility>

namespace upvs {

using Millis = std::chrono::milliseconds;

// Delayed tasks. The server talks to this interface so debounce timing can
// be driven by a virtual clock in tests.
class Scheduler {
public:
    using TimerId = std::uint64_t;

    virtual ~Scheduler() = default;
    virtual TimerId schedule(Millis delay, std::function<void()> task) = 0;
    /// No-op when the task already ran or started.
    virtual void cancel(TimerId id) = 0;
};

/// Runs tasks on its own thread, one at a time.
class ThreadScheduler final : public Scheduler {
public:
    ThreadScheduler();
    ~ThreadScheduler() override;

    TimerId schedule(Millis delay, std::function<void()> task) override;
    void cancel(TimerId id) override;

private:
    using Clock = std::chrono::steady_clock;
    void run();

    std::mutex mu_;
    std::condition_variable cv_;
    // Keyed by (due time, id) so equal deadlines keep submission order.
    std::map<std::pair<Clock::time_point, TimerId>, std::function<void()>> queue_;
    std::map<TimerId, Clock::time_point> due_;
    TimerId next_ = 1;
    bool stopping_ = false;
    std::thread thread_;
};

/// Virtual clock: nothing runs until advance() is called.
class ManualScheduler final : public Scheduler {
public:
    TimerId schedule(Millis delay, std::function<void()> task) override;
    void cancel(TimerId id) override;

    /// Moves the clock forward, running due tasks in deadline order on the
    /// calling thread. Tasks may schedule more tasks.
    void advance(Millis by);
    Millis now() const;
    std::size_t pending() const;

private:
    mutable std::mutex mu_;
    Millis now_{0};
    std::map<std::pair<Millis, TimerId>, std::function<void()>> queue_;
    std::map<TimerId, Millis> due_;
    TimerId next_ = 1;
};

} // namespace upvs

#endif // UPVS_SERVER_SCHEDULER_HPP
