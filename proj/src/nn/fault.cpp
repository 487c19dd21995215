#include "tablatex/nn/fault.hpp"

#include <atomic>

namespace tablatex::nn {

namespace {
std::atomic<GradientFault> g_fault{GradientFault::None};
}

GradientFault gradient_fault() noexcept { return g_fault.load(std::memory_order_relaxed); }
void set_gradient_fault(GradientFault f) noexcept { g_fault.store(f, std::memory_order_relaxed); }

}  // namespace tablatex::nn
