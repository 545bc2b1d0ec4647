#include "geobo/spectral.hpp"

#include <cmath>
#include <stdexcept>

namespace geobo::spectral {

double gegenbauer(int n, double alpha, double t) {
    if (n < 0) throw std::invalid_argument("gegenbauer: n >= 0");
    if (alpha <= 0) throw std::invalid_argument("gegenbauer: alpha > 0");
    if (std::abs(t) > 1.0 + 1e-12) throw std::invalid_argument("gegenbauer: |t| > 1");
    if (n == 0) return 1.0;
    double cm1 = 1.0;
    double c = 2.0 * alpha * t;
    for (int k = 2; k <= n; ++k) {
        double next = (2.0 * t * (k + alpha - 1.0) * c - (k + 2.0 * alpha - 2.0) * cm1) / k;
        cm1 = c;
        c = next;
    }
    return c;
}

double gegenbauer_at_one(int n, double alpha) {
    // binom(n + 2 alpha - 1, n) via a product, valid for non-integer alpha.
    double v = 1.0;
    for (int k = 1; k <= n; ++k) v *= (2.0 * alpha + k - 1.0) / k;
    return v;
}

double sphere_harmonic_count(int d, int n) {
    if (n == 0) return 1.0;
    // (2n + d - 1) (n + d - 2)! / (n! (d - 1)!)
    double v = (2.0 * n + d - 1.0) / (d - 1.0);
    for (int k = 1; k <= d - 2; ++k) v *= (n + k) / static_cast<double>(k);
    return v;
}

double sphere_zonal_coeff(int d, int n) { return (2.0 * n + d - 1.0) / (d - 1.0); }

std::vector<SphereEigenLevel> sphere_levels(int d, int n_max) {
    if (d < 2) throw std::invalid_argument("sphere_levels: d >= 2");
    std::vector<SphereEigenLevel> levels;
    levels.reserve(n_max + 1);
    for (int n = 0; n <= n_max; ++n)
        levels.push_back({n, double(n) * (n + d - 1.0), sphere_zonal_coeff(d, n)});
    return levels;
}

std::vector<So3Level> so3_levels(int l_max) {
    std::vector<So3Level> levels;
    levels.reserve(l_max + 1);
    for (int l = 0; l <= l_max; ++l)
        levels.push_back({l, double(l) * (l + 1.0), 2 * l + 1});
    return levels;
}

double so3_character(int l, double theta) {
    if (l < 0) throw std::invalid_argument("so3_character: l >= 0");
    if (theta < 1e-6) {
        // sin((l+1/2)t)/sin(t/2) = (2l+1) (1 - l(l+1) t^2 / 6 + O(t^4))
        double t2 = theta * theta;
        return (2.0 * l + 1.0) * (1.0 - l * (l + 1.0) * t2 / 6.0);
    }
    return std::sin((l + 0.5) * theta) / std::sin(0.5 * theta);
}

std::vector<Eigen::VectorXi> torus_lattice(int d, int L) {
    if (d < 1 || L < 0) throw std::invalid_argument("torus_lattice: d >= 1, L >= 0");
    std::vector<Eigen::VectorXi> out;
    std::size_t count = 1;
    for (int i = 0; i < d; ++i) count *= static_cast<std::size_t>(2 * L + 1);
    out.reserve(count);
    Eigen::VectorXi tau = Eigen::VectorXi::Constant(d, -L);
    while (true) {
        out.push_back(tau);
        int i = 0;
        while (i < d && tau(i) == L) tau(i++) = -L;
        if (i == d) break;
        ++tau(i);
    }
    return out;
}

} // namespace geobo::spectral
