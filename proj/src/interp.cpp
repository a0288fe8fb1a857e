#include "owhile/interp.hpp"

#include <pthread.h>

#include <cstdlib>
#include <exception>
#include <stdexcept>
#include <string>

namespace owhile {

namespace {

// Derivations nest one frame group per loop iteration; a gigabyte of
// reserved (lazily committed) stack covers the default fuel comfortably.
constexpr std::size_t kStackBytes = std::size_t{1} << 30;

struct Job {
    const std::function<void()>* fn;
    std::exception_ptr error;
};

void* trampoline(void* arg) {
    auto* job = static_cast<Job*>(arg);
    try {
        (*job->fn)();
    } catch (...) {
        job->error = std::current_exception();
    }
    return nullptr;
}

thread_local bool on_large_stack = false;

} // namespace

void run_with_large_stack(const std::function<void()>& fn) {
    if (on_large_stack) {
        fn();
        return;
    }
    Job job{&fn, nullptr};
    pthread_attr_t attr;
    pthread_attr_init(&attr);
    pthread_attr_setstacksize(&attr, kStackBytes);
    pthread_t thread;
    std::function<void()> wrapped = [&] {
        on_large_stack = true;
        fn();
    };
    job.fn = &wrapped;
    int rc = pthread_create(&thread, &attr, trampoline, &job);
    pthread_attr_destroy(&attr);
    if (rc != 0) {
        // No thread available: fall back to the current stack.
        fn();
        return;
    }
    pthread_join(thread, nullptr);
    if (job.error) {
        std::rethrow_exception(job.error);
    }
}

std::uint64_t default_fuel() {
    const char* env = std::getenv("OWHILE_FUEL");
    if (!env || !*env) {
        return kDefaultFuel;
    }
    try {
        std::size_t used = 0;
        unsigned long long v = std::stoull(env, &used);
        if (used == std::string(env).size() && v > 0) {
            return v;
        }
    } catch (const std::exception&) {
    }
    return kDefaultFuel;
}

std::optional<Value> apply_binop(BinOp op, const Value& a, const Value& b) {
    if (op == BinOp::Eq) {
        return Value{a == b};
    }
    const bool* x = std::get_if<bool>(&a);
    const bool* y = std::get_if<bool>(&b);
    if (!x || !y) {
        return std::nullopt;
    }
    return Value{op == BinOp::And ? (*x && *y) : (*x || *y)};
}

Outcome<StatResult> run(const Stat& s, std::uint64_t fuel) {
    return eval_stat(State{}, s, fuel, UnitPass{}).outcome;
}

} // namespace owhile
