#include "aonkit/simd.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace aonkit::simd {

namespace {

constexpr KernelTable kScalarTable{&scalar::dot, &scalar::axpy};
constexpr KernelTable kAvx2Table{&avx2::dot, &avx2::axpy};
constexpr KernelTable kNeonTable{&neon::dot, &neon::axpy};

bool cpu_has_avx2() {
#if defined(__GNUC__) && (defined(__x86_64__) || defined(__i386__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const KernelTable* table_for(Backend b) {
    switch (b) {
    case Backend::avx2: return &kAvx2Table;
    case Backend::neon: return &kNeonTable;
    case Backend::scalar: break;
    }
    return &kScalarTable;
}

Backend initial_backend() {
    const char* env = std::getenv("AONKIT_SIMD");
    if (env == nullptr) return best_backend();
    const std::string want(env);
    if (want == "scalar") return Backend::scalar;
    if (want == "avx2" && backend_available(Backend::avx2)) return Backend::avx2;
    if (want == "neon" && backend_available(Backend::neon)) return Backend::neon;
    return best_backend();
}

struct State {
    std::atomic<Backend> backend;
    std::atomic<const KernelTable*> table;
    State() : backend(initial_backend()), table(table_for(backend.load())) {}
};

State& state() {
    static State s;
    return s;
}

} // namespace

bool backend_available(Backend b) {
    switch (b) {
    case Backend::scalar: return true;
    case Backend::avx2: return avx2::compiled() && cpu_has_avx2();
    case Backend::neon: return neon::compiled();
    }
    return false;
}

Backend best_backend() {
    if (backend_available(Backend::avx2)) return Backend::avx2;
    if (backend_available(Backend::neon)) return Backend::neon;
    return Backend::scalar;
}

Backend active_backend() { return state().backend.load(std::memory_order_relaxed); }

void set_backend(Backend b) {
    if (!backend_available(b))
        throw std::invalid_argument("simd backend not available: " + std::string(backend_name(b)));
    auto& s = state();
    s.backend.store(b);
    s.table.store(table_for(b));
}

std::string_view backend_name(Backend b) {
    switch (b) {
    case Backend::scalar: return "scalar";
    case Backend::avx2: return "avx2";
    case Backend::neon: return "neon";
    }
    return "unknown";
}

const KernelTable& kernels() { return *state().table.load(std::memory_order_relaxed); }

} // namespace aonkit::simd
