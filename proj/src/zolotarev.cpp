#include "fracrb/zolotarev.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "fracrb/specfun.hpp"

namespace fracrb::zolotarev {

SpectralInterval::SpectralInterval(double lo, double hi) : lambda_l_sq(lo), lambda_u_sq(hi) {
    if (!(lo > 0.0) || !(hi > lo))
        throw std::domain_error("SpectralInterval: need 0 < lambda_l_sq < lambda_u_sq, got [" +
                                std::to_string(lo) + ", " + std::to_string(hi) + "]");
}

std::vector<double> zolotarev_points(double delta, std::size_t r) {
    if (!(delta > 0.0) || !(delta < 1.0))
        throw std::domain_error("zolotarev_points: delta must lie in (0,1), got " +
                                std::to_string(delta));
    if (r == 0) return {};

    // Modulus delta' = sqrt(1 - delta^2) with complement exactly delta;
    // carrying the pair keeps the small points accurate for tiny delta.
    const auto modulus = specfun::EllipticModulus::from_complement(delta);
    const double quarter_period = specfun::ellipk(modulus);
    std::vector<double> points(r);
    for (std::size_t j = 1; j <= r; ++j) {
        const double arg =
            static_cast<double>(2 * (r - j) + 1) / static_cast<double>(2 * r) * quarter_period;
        // dn decreases on [0, K] and the argument decreases with j, so the
        // points come out ascending.
        points[j - 1] = specfun::jacobi_dn(arg, modulus);
    }
    return points;
}

std::vector<double> transformed_points(double a, double b, std::size_t r) {
    if (!(a > 0.0) || !(b > a))
        throw std::domain_error("transformed_points: need 0 < a < b, got a=" + std::to_string(a) +
                                " b=" + std::to_string(b));
    std::vector<double> points = zolotarev_points(a / b, r);
    for (double& p : points) p *= b;
    return points;
}

SnapshotTimes snapshot_times(const SpectralInterval& interval, std::size_t r) {
    SnapshotTimes result;
    result.times.push_back(0.0);
    const std::vector<double> squared =
        transformed_points(1.0 / interval.lambda_u_sq, 1.0 / interval.lambda_l_sq, r);
    for (double z : squared) {
        const double t = std::sqrt(z);
        if (t - result.times.back() <= 1e-14 * t) continue;
        result.times.push_back(t);
    }
    return result;
}

std::size_t r_for_tolerance(double eps, double delta) {
    if (!(eps > 0.0) || !(eps < 2.0))
        throw std::domain_error("r_for_tolerance: eps must lie in (0,2)");
    const double rate = specfun::cstar(delta);
    if (!std::isfinite(rate))
        throw std::domain_error("r_for_tolerance: degenerate delta, rate constant is infinite");
    return static_cast<std::size_t>(std::ceil(std::log(2.0 / eps) / rate));
}

} // namespace fracrb::zolotarev
