#include "qls/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>

namespace qls::kernels {

bool avx2_available() {
#if defined(__x86_64__) || defined(_M_X64)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

namespace {

const KernelTable* pick_default() {
    if (const char* env = std::getenv("QLS_KERNEL")) {
        const std::string v(env);
        if (v == "scalar") return &scalar_table;
        if (v == "avx2" && avx2_available()) return &avx2_table;
    }
    return avx2_available() ? &avx2_table : &scalar_table;
}

std::atomic<const KernelTable*> g_active{nullptr};

}  // namespace

const KernelTable& active() {
    const KernelTable* t = g_active.load(std::memory_order_acquire);
    if (!t) {
        t = pick_default();
        g_active.store(t, std::memory_order_release);
    }
    return *t;
}

void set_backend(const std::string& name) {
    if (name == "scalar") {
        g_active.store(&scalar_table, std::memory_order_release);
    } else if (name == "avx2") {
        if (!avx2_available()) throw std::runtime_error("avx2 kernels not supported on this CPU");
        g_active.store(&avx2_table, std::memory_order_release);
    } else if (name == "auto") {
        g_active.store(pick_default(), std::memory_order_release);
    } else {
        throw std::invalid_argument("unknown kernel backend: " + name);
    }
}

}  // namespace qls::kernels
