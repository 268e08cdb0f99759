#include "codedlens/parallel.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace codedlens {

namespace {
std::atomic<int> g_max_threads{0};  // 0 = auto (hardware concurrency)
thread_local bool t_inside_worker = false;
}

void set_max_threads(int threads) {
    g_max_threads.store(threads < 0 ? 0 : threads);
}

int max_threads() {
    int t = g_max_threads.load();
    if (t == 0) {
        unsigned hw = std::thread::hardware_concurrency();
        t = hw == 0 ? 1 : static_cast<int>(hw);
    }
    return t;
}

void parallel_for(int count, const std::function<void(int)>& fn) {
    if (count <= 0) return;
    int workers = max_threads();
    if (workers > count) workers = count;
    // Nested calls run serially inside their worker thread.
    if (workers <= 1 || t_inside_worker) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }

    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto work = [&]() {
        t_inside_worker = true;
        for (;;) {
            int i = next.fetch_add(1);
            if (i >= count || failed.load()) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                failed.store(true);
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers - 1));
    for (int w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    t_inside_worker = false;
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace codedlens
