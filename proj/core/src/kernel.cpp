#include "funflow/kernel.hpp"

#include <cmath>

#include "funflow/errors.hpp"

namespace funflow {

Kernel::Kernel(KernelKind kind, double scale) : kind_(kind), scale_(scale) {
    require(scale > 0.0 && std::isfinite(scale), ErrorCode::invalid_argument, "kernel scale must be positive");
}

Kernel Kernel::parse(std::string_view name) {
    if (name == "quadratic") return Kernel(KernelKind::quadratic);
    if (name == "uniform") return Kernel(KernelKind::uniform);
    fail(ErrorCode::invalid_argument, "unknown kernel '" + std::string(name) + "' (quadratic, uniform)");
}

std::string_view Kernel::name() const noexcept { return kind_ == KernelKind::quadratic ? "quadratic" : "uniform"; }

}  // namespace funflow
