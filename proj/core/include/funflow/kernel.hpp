#pragma once

#include <string>
#include <string_view>

namespace funflow {

enum class KernelKind { quadratic, uniform };

/// Nonnegative kernel supported on [0,1]: quadratic K(u) = (1 - u^2) or uniform K(u) = 1,
/// times an optional positive scale. Distances are nonnegative so only u >= 0 matters.
class Kernel {
public:
    explicit Kernel(KernelKind kind = KernelKind::quadratic, double scale = 1.0);

    static Kernel parse(std::string_view name);

    KernelKind kind() const noexcept { return kind_; }
    double scale() const noexcept { return scale_; }
    std::string_view name() const noexcept;

    double operator()(double u) const noexcept {
        if (!(u >= 0.0 && u <= 1.0)) return 0.0;
        return kind_ == KernelKind::quadratic ? scale_ * (1.0 - u * u) : scale_;
    }
    /// K'(u) on [0,1].
    double derivative(double u) const noexcept { return kind_ == KernelKind::quadratic ? -2.0 * scale_ * u : 0.0; }
    double sup() const noexcept { return scale_; }

private:
    KernelKind kind_;
    double scale_;
};

}  // namespace funflow
