#include "fracrb/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace fracrb::specfun {

namespace {

constexpr double kPi = 3.14159265358979323846;

void require_modulus(double k, const char* who) {
    if (!(k >= 0.0) || !(k < 1.0))
        throw std::domain_error(std::string(who) + ": modulus k must lie in [0,1), got " +
                                std::to_string(k));
}

void require_open_unit(double s, const char* who) {
    if (!(s > 0.0) || !(s < 1.0))
        throw std::domain_error(std::string(who) + ": argument must lie in (0,1), got " +
                                std::to_string(s));
}

} // namespace

EllipticModulus EllipticModulus::from_k(double k) {
    require_modulus(k, "EllipticModulus");
    // (1-k)(1+k) avoids cancellation in 1 - k^2 for k near 1.
    return {k, std::sqrt((1.0 - k) * (1.0 + k))};
}

EllipticModulus EllipticModulus::from_complement(double kprime) {
    if (!(kprime > 0.0) || kprime > 1.0)
        throw std::domain_error("EllipticModulus: complement must lie in (0,1]");
    return {std::sqrt((1.0 - kprime) * (1.0 + kprime)), kprime};
}

double gamma(double x) {
    if (!(x > 0.0))
        throw std::domain_error("gamma: argument must be positive, got " + std::to_string(x));
    return std::tgamma(x);
}

double ellipk(const EllipticModulus& modulus) {
    if (1.0 - modulus.k < 1e-12) return std::log(4.0 / modulus.kprime);

    double a = 1.0;
    double g = modulus.kprime;
    for (int i = 0; i < 64; ++i) {
        if (std::abs(a - g) <= std::numeric_limits<double>::epsilon() * a) break;
        const double a_next = 0.5 * (a + g);
        const double g_next = std::sqrt(a * g);
        a = a_next;
        g = g_next;
    }
    return kPi / (2.0 * a);
}

double ellipk(double k) {
    return ellipk(EllipticModulus::from_k(k));
}

namespace detail {

JacobiElliptic jacobi_elliptic(double u, const EllipticModulus& modulus) {
    const double k = modulus.k;
    if (!(u >= 0.0))
        throw std::domain_error("jacobi_dn: argument u must be nonnegative");
    if (k < 1e-10) {
        // dn = sqrt(1 - k^2 sin^2 u) to within O(k^4) of the limit forms.
        const double s = std::sin(u), c = std::cos(u);
        return {s, c, std::sqrt(1.0 - k * k * s * s)};
    }

    // AGM ladder of the descending Landen transformation:
    // a_{i+1} = (a_i+b_i)/2, b_{i+1} = sqrt(a_i b_i), c_{i+1} = (a_i-b_i)/2.
    constexpr int kMaxLevels = 40;
    double a[kMaxLevels], c[kMaxLevels];
    a[0] = 1.0;
    c[0] = k;
    double b = modulus.kprime;
    int n = 0;
    while (n + 1 < kMaxLevels) {
        const double an = 0.5 * (a[n] + b);
        const double cn = 0.5 * (a[n] - b);
        b = std::sqrt(a[n] * b);
        ++n;
        a[n] = an;
        c[n] = cn;
        if (std::abs(cn) <= std::numeric_limits<double>::epsilon() * an) break;
    }

    // Downward amplitude recursion: phi_{i-1} = (phi_i + asin((c_i/a_i) sin phi_i)) / 2.
    double phi = std::ldexp(a[n] * u, n);
    for (int i = n; i >= 1; --i) {
        const double ratio = std::clamp(c[i] / a[i] * std::sin(phi), -1.0, 1.0);
        phi = 0.5 * (phi + std::asin(ratio));
    }
    const double sn = std::sin(phi);
    const double cn = std::cos(phi);
    // dn^2 = cn^2 + k'^2 sn^2 exactly; hypot avoids the 0/0 of the textbook
    // quotient cos(phi_0)/cos(phi_1 - phi_0) at the quarter period.
    const double dn = std::hypot(cn, modulus.kprime * sn);
    return {sn, cn, dn};
}

JacobiElliptic jacobi_elliptic(double u, double k) {
    require_modulus(k, "jacobi_dn");
    return jacobi_elliptic(u, EllipticModulus::from_k(k));
}

} // namespace detail

double jacobi_dn(double u, double k) {
    return detail::jacobi_elliptic(u, k).dn;
}

double jacobi_dn(double u, const EllipticModulus& modulus) {
    return detail::jacobi_elliptic(u, modulus).dn;
}

double d_s(double s) {
    require_open_unit(s, "d_s");
    return std::pow(2.0, 1.0 - 2.0 * s) * gamma(1.0 - s) / gamma(s);
}

double c_s(double s) {
    require_open_unit(s, "c_s");
    return std::sqrt(2.0 * std::sin(kPi * s) / kPi);
}

double cstar(double delta) {
    require_open_unit(delta, "cstar");
    const double sq = std::sqrt(delta);
    const double ratio = (1.0 - sq) / (1.0 + sq);
    const double mu = ratio * ratio;
    // 1 - mu = (1 - ratio)(1 + ratio) with 1 - ratio = 2 sqrt(delta)/(1 + sq),
    // all products: no cancellation for tiny delta.
    const double one_minus_mu = (2.0 * sq / (1.0 + sq)) * (1.0 + ratio);
    const double mu1 = std::sqrt(one_minus_mu * (1.0 + mu));
    // mu1 rounds to 1 only for delta ~ 1 where the spectrum is a point and
    // the rate is meaningless; signal with the +inf sentinel.
    if (mu1 >= 1.0) return std::numeric_limits<double>::infinity();
    // mu and mu1 are mutual complements; pass both exactly.
    const double k_mu1 = ellipk(EllipticModulus{mu1, mu});
    const double k_mu = ellipk(EllipticModulus{mu, mu1});
    return kPi * k_mu1 / (4.0 * k_mu);
}

RateConstants rate_constants(double s, double delta) {
    return {s, d_s(s), c_s(s), cstar(delta), delta};
}

} // namespace fracrb::specfun
