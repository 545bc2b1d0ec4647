#pragma once

#include <Eigen/Dense>
#include <functional>

namespace geobo {

struct LineQuadConfig {
    double abs_tol = 1e-10;
    int max_depth = 30;
};

// Adaptive Simpson on [a, b]. Throws std::runtime_error if the requested
// tolerance is not met within max_depth subdivisions.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        const LineQuadConfig& cfg);

} // namespace geobo
