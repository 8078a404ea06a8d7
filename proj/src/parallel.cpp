#include "napost/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>

namespace napost {

int worker_count() {
    static const int cached = [] {
        int hw = static_cast<int>(std::thread::hardware_concurrency());
        if (hw < 1) hw = 1;
        const char* env = std::getenv("NEWMARK_APOST_THREADS");
        if (env == nullptr) return hw;
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end == env || v < 0) return hw;  // unparsable or negative: auto
        if (v == 0) return hw;               // 0 = auto
        return static_cast<int>(v);
    }();
    return cached;
}

void parallel_chunks(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
    if (n == 0) return;
    const std::size_t chunks = chunk_count(n);
    const int workers = worker_count();
    if (workers <= 1 || chunks <= 1) {
        for (std::size_t c = 0; c < chunks; ++c)
            fn(c * kChunkSize, std::min(n, (c + 1) * kChunkSize));
        return;
    }
    std::atomic<std::size_t> next{0};
    auto drain = [&] {
        for (std::size_t c = next.fetch_add(1); c < chunks; c = next.fetch_add(1))
            fn(c * kChunkSize, std::min(n, (c + 1) * kChunkSize));
    };
    std::vector<std::thread> pool;
    const int spawned = std::min<std::size_t>(workers, chunks) - 1;
    pool.reserve(spawned);
    for (int i = 0; i < spawned; ++i) pool.emplace_back(drain);
    drain();
    for (auto& t : pool) t.join();
}

double parallel_sum(std::size_t n, const std::function<double(std::size_t)>& term) {
    if (n == 0) return 0.0;
    std::vector<double> partial(chunk_count(n), 0.0);
    parallel_chunks(n, [&](std::size_t b, std::size_t e) {
        double s = 0.0;
        for (std::size_t i = b; i < e; ++i) s += term(i);
        partial[b / kChunkSize] = s;
    });
    double total = 0.0;
    for (double p : partial) total += p;
    return total;
}

}  // namespace napost
