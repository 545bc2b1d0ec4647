#include "helpers.hpp"

namespace geobo::testing {

Eigen::MatrixXd random_orthogonal(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> gauss;
    Eigen::MatrixXd g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g(i, j) = gauss(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < n; ++j)
        if (r(j, j) < 0) q.col(j) *= -1.0;
    return q;
}

Eigen::MatrixXd random_lorentz(std::mt19937_64& rng, int d) {
    // Boost taking e0 to a random hyperboloid point.
    Manifold h = Manifold::hyperbolic(d, 0.7);
    Eigen::VectorXd p = random_point(rng, h).vec();
    int n = d + 1;
    Eigen::MatrixXd boost = Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd xs = p.tail(d);
    boost(0, 0) = p(0);
    boost.block(1, 0, d, 1) = xs;
    boost.block(0, 1, 1, d) = xs.transpose();
    boost.block(1, 1, d, d) =
        Eigen::MatrixXd::Identity(d, d) + xs * xs.transpose() / (1.0 + p(0));
    Eigen::MatrixXd rot = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd q = random_orthogonal(rng, d);
    if (q.determinant() < 0) q.col(0) *= -1.0;
    rot.block(1, 1, d, d) = q;
    return boost * rot;
}

std::function<Point(const Point&)> random_isometry(std::mt19937_64& rng, const Manifold& m) {
    switch (m.space) {
        case Space::Euclidean: {
            std::normal_distribution<double> gauss;
            Eigen::VectorXd t(m.dim);
            for (int i = 0; i < m.dim; ++i) t(i) = gauss(rng);
            return [t](const Point& p) { return Point::euclidean(p.vec() + t); };
        }
        case Space::Sphere: {
            Eigen::MatrixXd q = random_orthogonal(rng, m.dim + 1);
            return [q](const Point& p) {
                Eigen::VectorXd v = q * p.vec();
                return Point::sphere(v / v.norm());
            };
        }
        case Space::Torus: {
            std::uniform_real_distribution<double> unif(0.0, 1.0);
            Eigen::VectorXd t(m.dim);
            for (int i = 0; i < m.dim; ++i) t(i) = unif(rng);
            return [t](const Point& p) { return Point::torus(p.vec() + t); };
        }
        case Space::Rotation: {
            Point ql = random_point(rng, m), qr = random_point(rng, m);
            Eigen::MatrixXd l = ql.mat(), r = qr.mat();
            return [l, r](const Point& p) { return Point::rotation(l * p.mat() * r); };
        }
        case Space::Spd: {
            std::normal_distribution<double> gauss;
            Eigen::MatrixXd a(m.dim, m.dim);
            do {
                for (int i = 0; i < m.dim; ++i)
                    for (int j = 0; j < m.dim; ++j) a(i, j) = gauss(rng);
            } while (std::abs(a.determinant()) < 0.1);
            return [a](const Point& p) {
                Eigen::MatrixXd s = a * p.mat() * a.transpose();
                return Point::spd(0.5 * (s + s.transpose()));
            };
        }
        case Space::Hyperbolic: {
            Eigen::MatrixXd l = random_lorentz(rng, m.dim);
            return [l, d = m.dim](const Point& p) {
                Eigen::VectorXd v = l * p.vec();
                double q = v(0) * v(0) - v.tail(d).squaredNorm();
                return Point::hyperbolic(v / std::sqrt(q));
            };
        }
    }
    throw std::logic_error("random_isometry: unreachable");
}

} // namespace geobo::testing
