#pragma once

#include <cstddef>

namespace fracrb::specfun {

// Elliptic quantities use the modulus convention throughout: K(k) and
// dn(u, k) take the modulus k, not the parameter m = k^2.

/// Modulus/complement pair with k^2 + kprime^2 = 1. Carrying both members
/// matters: recovering the complement from k alone cancels catastrophically
/// when k is within a few ulp of 1 (moduli like sqrt(1 - delta^2) with tiny
/// delta), while the caller usually knows it exactly.
struct EllipticModulus {
    double k;
    double kprime;

    /// Builds the pair from k in [0,1); kprime = sqrt((1-k)(1+k)).
    static EllipticModulus from_k(double k);

    /// Builds the pair whose complement is kprime in (0,1]; k is then
    /// computed without cancellation.
    static EllipticModulus from_complement(double kprime);
};

/// The analytic constants tied to one (s, delta) configuration.
struct RateConstants {
    double s;
    double d_s;
    double c_s;
    double cstar;
    double delta;
};

/// Gamma function for positive arguments only.
double gamma(double x);

/// Complete elliptic integral of the first kind, K(k) = pi / (2 agm(1, k')).
/// The AGM is iterated to machine stagnation; for 1 - k < 1e-12 the
/// logarithmic asymptote K ~ ln(4/k') is used instead.
double ellipk(double k);
double ellipk(const EllipticModulus& modulus);

/// Jacobi elliptic dn(u, k) for u >= 0, via the descending Landen
/// transformation seeded by the AGM sequence of (1, k').
double jacobi_dn(double u, double k);
double jacobi_dn(double u, const EllipticModulus& modulus);

/// d_s = 2^(1-2s) Gamma(1-s) / Gamma(s), s in (0,1).
double d_s(double s);

/// c_s = sqrt(2 sin(pi s) / pi), s in (0,1).
double c_s(double s);

/// Rate constant C*(delta) = pi K(mu1) / (4 K(mu)) with
/// mu = ((1-sqrt(delta))/(1+sqrt(delta)))^2 and mu1 = sqrt(1-mu^2).
/// Strictly increasing in delta; behaves like O(1/ln(1/delta)) as
/// delta -> 0. For delta so close to 1 that mu1 rounds to 1 the value is
/// +infinity (degenerate spectrum; callers must reject it).
double cstar(double delta);

/// Bundles the constants for one configuration.
RateConstants rate_constants(double s, double delta);

namespace detail {

/// All three Jacobi functions from the shared Landen recursion. sn and cn
/// are exposed here for the identity tests only; dn is the public surface.
struct JacobiElliptic {
    double sn;
    double cn;
    double dn;
};

JacobiElliptic jacobi_elliptic(double u, double k);
JacobiElliptic jacobi_elliptic(double u, const EllipticModulus& modulus);

} // namespace detail

} // namespace fracrb::specfun
