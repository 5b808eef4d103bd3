#pragma once

#include "funflow/kernel.hpp"

namespace funflow {

/// Kernel / small-ball constants for F(t) ~ c t^kappa, i.e. tau0(s) = s^kappa:
///   M0 = K(1) - int_0^1 (s K(s))' tau0(s) ds
///   M1 = K(1) - int_0^1 K'(s) tau0(s) ds
///   M2 = K(1)^2 - int_0^1 (K(s)^2)' tau0(s) ds
/// With bandwidths h_n = A n^(-delta), the Cesaro limits are
///   beta_[r] = 1 / (1 - delta kappa r)  and  alpha_[l] = 1 / (1 - delta (1 + kappa (1 - l))).
struct AsymptoticConstants {
    double kappa = 0.0;
    double m0 = 0.0;
    double m1 = 0.0;
    double m2 = 0.0;

    /// Throws divergence when delta kappa r >= 1.
    double beta(double r, double delta) const;
    /// Throws divergence when delta (1 + kappa (1 - l)) >= 1.
    double alpha(double ell, double delta) const;

    /// beta_[1-2l] / beta_[1-l]^2 * M2 / M1^2: the variance constant multiplying
    /// sigma^2 / (n F(h_n)).
    double variance_factor(double ell, double delta) const;
    /// alpha_[l] / beta_[1-l] * M0 / M1: the bias constant multiplying phi'(0) h_n.
    double bias_factor(double ell, double delta) const;
};

/// M0, M1, M2 by adaptive Gauss-Kronrod quadrature (absolute error well below 1e-10).
AsymptoticConstants asymptotic_constants(const Kernel& kernel, double kappa);

}  // namespace funflow
