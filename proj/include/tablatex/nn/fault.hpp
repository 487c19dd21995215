#pragma once

namespace tablatex::nn {

// Deliberate gradient defects used to prove that the gradient checks catch
// real bugs. Never enabled outside verification.
enum class GradientFault { None, MatmulLhs };

GradientFault gradient_fault() noexcept;
void set_gradient_fault(GradientFault f) noexcept;

// Enables a fault for the lifetime of the guard.
class ScopedGradientFault {
 public:
  explicit ScopedGradientFault(GradientFault f) : prev_(gradient_fault()) { set_gradient_fault(f); }
  ~ScopedGradientFault() { set_gradient_fault(prev_); }
  ScopedGradientFault(const ScopedGradientFault&) = delete;
  ScopedGradientFault& operator=(const ScopedGradientFault&) = delete;

 private:
  GradientFault prev_;
};

}  // namespace tablatex::nn
