#pragma once

namespace digs {

/// Gaussian corruption kernel p(x~ | x) = N(x~ | alpha x, sigma^2 I).
struct ConvolutionKernel {
  double alpha = 1.0;
  double sigma = 1.0;

  bool operator==(const ConvolutionKernel&) const = default;
};

/// Standard domain is alpha in (0, 1]; sweep mode widens it to (0, 5] and
/// sigma to (0, 20] so the hyperparameter studies can probe past the plateau.
enum class KernelDomain { standard, sweep };

/// Throws ContractViolation when the kernel is outside `domain`. Returns true
/// when the kernel is only valid in sweep mode (the caller's warning flag).
bool validate_kernel(const ConvolutionKernel& kernel, KernelDomain domain = KernelDomain::sweep);

}  // namespace digs
