#pragma once

#include "geobo/manifold.hpp"
#include "geobo/rng.hpp"

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace geobo::testing {

inline std::vector<Manifold> representative_manifolds() {
    Eigen::VectorXd lo = Eigen::VectorXd::Constant(2, -2.0);
    Eigen::VectorXd hi = Eigen::VectorXd::Constant(2, 2.0);
    return {
        Manifold::euclidean(lo, hi), Manifold::sphere(2),     Manifold::sphere(5),
        Manifold::torus(1),          Manifold::torus(2),      Manifold::rotation(3),
        Manifold::spd(2),            Manifold::hyperbolic(2), Manifold::hyperbolic(3),
    };
}

// A random isometry of the given space, returned as a point transformer:
// orthogonal map for spheres, translation mod 1 for tori, left/right
// multiplication for rotations, congruence for SPD, Lorentz transform for
// hyperbolic space, translation for Euclidean space.
std::function<Point(const Point&)> random_isometry(std::mt19937_64& rng, const Manifold& m);

// Lorentz transform built from a boost to a random point composed with a
// spatial rotation.
Eigen::MatrixXd random_lorentz(std::mt19937_64& rng, int d);

Eigen::MatrixXd random_orthogonal(std::mt19937_64& rng, int n);

} // namespace geobo::testing
