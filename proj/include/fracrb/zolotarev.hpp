#pragma once

#include <cstddef>
#include <vector>

namespace fracrb::zolotarev {

/// Certified enclosure [lambda_l_sq, lambda_u_sq] of a pencil's generalized
/// spectrum. delta() = lambda_l_sq / lambda_u_sq is the inverse condition
/// number that drives all rate constants.
struct SpectralInterval {
    double lambda_l_sq;
    double lambda_u_sq;

    SpectralInterval(double lo, double hi);
    double delta() const { return lambda_l_sq / lambda_u_sq; }
};

/// Strictly increasing times t_0 = 0 < t_1 < ... < t_r. The squared
/// nonzero entries are the transformed Zolotarev points on
/// [1/lambda_u_sq, 1/lambda_l_sq].
struct SnapshotTimes {
    std::vector<double> times;

    std::size_t r() const { return times.size() - 1; }
};

/// Zolotarev points on [delta, 1]:
///   Z_j = dn(((2(r-j)+1) / (2r)) K(delta'), delta'),  delta' = sqrt(1-delta^2),
/// returned strictly ascending in j. r = 0 yields an empty sequence.
std::vector<double> zolotarev_points(double delta, std::size_t r);

/// Transformed points on [a, b]: b * zolotarev_points(a/b, r).
std::vector<double> transformed_points(double a, double b, std::size_t r);

/// Snapshot times for a spectral interval: t_0 = 0 and t_j = sqrt(Zhat_j)
/// with Zhat_j the transformed points on the inverted interval. Times that
/// collide within 1e-14 relative are deduplicated (the interpolation nodes
/// must stay pairwise distinct), shrinking r.
SnapshotTimes snapshot_times(const SpectralInterval& interval, std::size_t r);

/// Smallest r with 2 e^(-cstar(delta) r) <= eps. Throws if cstar(delta)
/// is the +inf sentinel (degenerate interval).
std::size_t r_for_tolerance(double eps, double delta);

} // namespace fracrb::zolotarev
