#include "cubemix/threading.hpp"

#include <atomic>
#include <cstdlib>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "cubemix/common.hpp"

namespace cubemix {

int thread_cap_from_env() {
    const char* env = std::getenv("CUBEMIX_THREADS");
    if (!env || !*env) return 1;
    try {
        std::size_t pos = 0;
        int n = std::stoi(env, &pos);
        if (pos != std::string(env).size() || n < 1)
            throw ConfigError(std::string("CUBEMIX_THREADS must be a positive integer, got '") +
                              env + "'");
        return n;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        throw ConfigError(std::string("CUBEMIX_THREADS must be a positive integer, got '") + env +
                          "'");
    }
}

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
    if (n <= 0) return;
    if (threads <= 1 || n == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    int workers = std::min(threads, n);
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int t = 0; t < workers; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                int i = next.fetch_add(1);
                if (i >= n) break;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (std::thread& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

} // namespace cubemix
