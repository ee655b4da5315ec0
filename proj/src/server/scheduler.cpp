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

#include "server/scheduler.hpp"

namespace upvs {

ThreadScheduler::ThreadScheduler() : thread_([this] { run(); }) {}

ThreadScheduler::~ThreadScheduler() {
    {
        std::lock_guard lock(mu_);
        stopping_ = true;
    }
    cv_.notify_all();
    thread_.join();
}

Scheduler::TimerId ThreadScheduler::schedule(Millis delay, std::function<void()> task) {
    std::lock_guard lock(mu_);
    TimerId id = next_++;
    auto due = Clock::now() + delay;
    queue_.emplace(std::make_pair(due, id), std::move(task));
    due_[id] = due;
    cv_.notify_all();
    return id;
}

void ThreadScheduler::cancel(TimerId id) {
    std::lock_guard lock(mu_);
    auto it = due_.find(id);
    if (it == due_.end()) return;
    queue_.erase({it->second, id});
    due_.erase(it);
}

void ThreadScheduler::run() {
    std::unique_lock lock(mu_);
    while (!stopping_) {
        if (queue_.empty()) {
            cv_.wait(lock);
            continue;
        }
        auto first = queue_.begin();
        if (first->first.first > Clock::now()) {
            cv_.wait_until(lock, first->first.first);
            continue;
        }
        auto task = std::move(first->second);
        due_.erase(first->first.second);
        queue_.erase(first);
        lock.unlock();
        task();
        lock.lock();
    }
}

Scheduler::TimerId ManualScheduler::schedule(Millis delay, std::function<void()> task) {
    std::lock_guard lock(mu_);
    TimerId id = next_++;
    queue_.emplace(std::make_pair(now_ + delay, id), std::move(task));
    due_[id] = now_ + delay;
    return id;
}

void ManualScheduler::cancel(TimerId id) {
    std::lock_guard lock(mu_);
    auto it = due_.find(id);
    if (it == due_.end()) return;
    queue_.erase({it->second, id});
    due_.erase(it);
}

void ManualScheduler::advance(Millis by) {
    std::unique_lock lock(mu_);
    Millis target = now_ + by;
    while (!queue_.empty() && queue_.begin()->first.first <= target) {
        auto first = queue_.begin();
        now_ = first->first.first;
        auto task = std::move(first->second);
        due_.erase(first->first.second);
        queue_.erase(first);
        lock.unlock();
        task();
        lock.lock();
    }
    now_ = target;
}

Millis ManualScheduler::now() const {
    std::lock_guard lock(mu_);
    return now_;
}

std::size_t ManualScheduler::pending() const {
    std::lock_guard lock(mu_);
    return queue_.size();
}

} // namespace upvs
