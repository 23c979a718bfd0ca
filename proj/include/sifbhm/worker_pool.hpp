#pragma once

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <deque>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <utility>
#include <vector>

namespace sifbhm {

/// Runs `work(i)` for i in [0, n) on up to `workers` threads. `done(i, result)` runs on the
/// calling thread, in completion order, one call at a time. The first exception thrown by
/// `work` is rethrown on the calling thread after all workers stop.
template <class Result, class Work, class Done>
void run_pool(std::size_t n, std::size_t workers, Work work, Done done)
{
    workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    std::mutex mutex;
    std::condition_variable ready;
    std::deque<std::pair<std::size_t, Result>> finished;
    std::exception_ptr failure;
    std::size_t running = workers;

    {
        std::vector<std::jthread> threads;
        threads.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            threads.emplace_back([&] {
                while (!stop.load()) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= n) {
                        break;
                    }
                    try {
                        Result r = work(i);
                        std::lock_guard lock(mutex);
                        finished.emplace_back(i, std::move(r));
                    } catch (...) {
                        std::lock_guard lock(mutex);
                        if (!failure) {
                            failure = std::current_exception();
                        }
                        stop.store(true);
                    }
                    ready.notify_one();
                }
                std::lock_guard lock(mutex);
                --running;
                ready.notify_one();
            });
        }

        while (true) {
            std::unique_lock lock(mutex);
            ready.wait(lock, [&] { return !finished.empty() || running == 0; });
            if (finished.empty()) {
                break;
            }
            auto item = std::move(finished.front());
            finished.pop_front();
            lock.unlock();
            try {
                done(item.first, std::move(item.second));
            } catch (...) {
                std::lock_guard relock(mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
                stop.store(true);
            }
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

} // namespace sifbhm
