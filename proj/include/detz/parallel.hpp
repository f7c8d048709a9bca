#pragma once

namespace detz {

/// Worker count from DETZ_THREADS, or the OpenMP default when unset/invalid.
int default_threads();

/// Sets the worker count used by every parallel kernel (values < 1 reset to
/// default_threads()).
void set_threads(int n);

int current_threads();

/// Restores the previous worker count on scope exit.
class ThreadScope {
public:
    explicit ThreadScope(int n) : saved_(current_threads()) { set_threads(n); }
    ~ThreadScope() { set_threads(saved_); }
    ThreadScope(const ThreadScope&) = delete;
    ThreadScope& operator=(const ThreadScope&) = delete;

private:
    int saved_;
};

}  // namespace detz
