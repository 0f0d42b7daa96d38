#ifndef HBUNDLE_PARALLEL_HPP
#define HBUNDLE_PARALLEL_HPP

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace hbundle {

/// Half-open index range [begin, end) owned by worker `worker`.
struct WorkRange
{
    std::size_t begin = 0;
    std::size_t end = 0;
    unsigned worker = 0;
};

/// Contiguous block `w` of `n` items split over `workers` blocks.
inline WorkRange static_block(std::size_t n, unsigned workers, unsigned w)
{
    return {n * w / workers, n * (w + 1) / workers, w};
}

/// Runs fn(WorkRange) on `workers` threads over a static contiguous partition of
/// [0, n). The partition depends only on n and the worker count. The first
/// exception thrown by any worker is rethrown after all workers join.
template <typename F>
void parallel_for(std::size_t n, unsigned workers, F&& fn)
{
    workers = std::max(1u, workers);
    if (n == 0)
        return;
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    if (workers == 1) {
        fn(WorkRange{0, n, 0});
        return;
    }

    std::exception_ptr error;
    std::mutex error_mutex;
    {
        std::vector<std::jthread> threads;
        threads.reserve(workers - 1);
        auto run = [&](unsigned w) {
            try {
                fn(static_block(n, workers, w));
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error)
                    error = std::current_exception();
            }
        };
        for (unsigned w = 1; w < workers; ++w)
            threads.emplace_back(run, w);
        run(0);
    }
    if (error)
        std::rethrow_exception(error);
}

} // namespace hbundle

#endif // HBUNDLE_PARALLEL_HPP
