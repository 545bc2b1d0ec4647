#pragma once

#include <Eigen/Dense>
#include <vector>

namespace geobo::spectral {

// Gegenbauer polynomial C_n^(alpha)(t) by the three-term recurrence.
double gegenbauer(int n, double alpha, double t);

// C_n^(alpha)(1) = binom(n + 2 alpha - 1, n).
double gegenbauer_at_one(int n, double alpha);

struct SphereEigenLevel {
    int n;
    double lambda; // n (n + d - 1)
    double weight; // c_{n,d}
};

// Laplace-Beltrami levels of S^d up to degree N. The zonal coefficient
// c_{n,d} = N(d,n) / C_n^{((d-1)/2)}(1) reduces to (2n + d - 1)/(d - 1);
// the harmonic count N(d,n) is exposed separately for truncation bounds.
std::vector<SphereEigenLevel> sphere_levels(int d, int n_max);
double sphere_harmonic_count(int d, int n);
double sphere_zonal_coeff(int d, int n);

struct So3Level {
    int l;
    double lambda; // l (l + 1)
    int dim;       // 2 l + 1
};

std::vector<So3Level> so3_levels(int l_max);

// Character of the spin-l representation of SO(3) at rotation angle theta,
// sin((l + 1/2) theta) / sin(theta / 2), with the analytic theta -> 0 limit.
double so3_character(int l, double theta);

// All integer vectors with ||tau||_inf <= L, (2L+1)^d of them.
std::vector<Eigen::VectorXi> torus_lattice(int d, int L);

} // namespace geobo::spectral
