#include "funflow/constants.hpp"

#include <cmath>
#include <string>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "funflow/errors.hpp"

namespace funflow {

namespace {

template <class F>
double integrate_unit(F&& f) {
    // tanh-sinh copes with the s^kappa singularity at 0 for kappa < 1
    boost::math::quadrature::tanh_sinh<double> quadrature;
    double error = 0.0;
    const double value = quadrature.integrate(f, 0.0, 1.0, 1e-13, &error);
    require(error < 1e-10, ErrorCode::divergence, "quadrature did not reach 1e-10 accuracy");
    return value;
}

}  // namespace

double AsymptoticConstants::beta(double r, double delta) const {
    const double x = delta * kappa * r;
    if (x >= 1.0) {
        fail(ErrorCode::divergence, "beta_[" + std::to_string(r) + "] diverges: delta kappa r = " + std::to_string(x) +
                                        " >= 1");
    }
    return 1.0 / (1.0 - x);
}

double AsymptoticConstants::alpha(double ell, double delta) const {
    const double x = delta * (1.0 + kappa * (1.0 - ell));
    if (x >= 1.0) {
        fail(ErrorCode::divergence,
             "alpha_[" + std::to_string(ell) + "] diverges: delta (1 + kappa (1 - l)) = " + std::to_string(x) + " >= 1");
    }
    return 1.0 / (1.0 - x);
}

double AsymptoticConstants::variance_factor(double ell, double delta) const {
    const double b = beta(1.0 - ell, delta);
    return beta(1.0 - 2.0 * ell, delta) / (b * b) * m2 / (m1 * m1);
}

double AsymptoticConstants::bias_factor(double ell, double delta) const {
    return alpha(ell, delta) / beta(1.0 - ell, delta) * m0 / m1;
}

AsymptoticConstants asymptotic_constants(const Kernel& kernel, double kappa) {
    require(kappa > 0.0 && std::isfinite(kappa), ErrorCode::invalid_argument, "kappa must be positive");
    auto tau0 = [kappa](double s) { return std::pow(s, kappa); };
    const double k1 = kernel(1.0);
    AsymptoticConstants c;
    c.kappa = kappa;
    c.m0 = k1 - integrate_unit([&](double s) { return (kernel(s) + s * kernel.derivative(s)) * tau0(s); });
    c.m1 = k1 - integrate_unit([&](double s) { return kernel.derivative(s) * tau0(s); });
    c.m2 = k1 * k1 - integrate_unit([&](double s) { return 2.0 * kernel(s) * kernel.derivative(s) * tau0(s); });
    return c;
}

}  // namespace funflow
