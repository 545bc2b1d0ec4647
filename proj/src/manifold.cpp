#include "geobo/manifold.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <numbers>

namespace geobo {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap01(double x) { return x - std::floor(x); }

// Wrap to [-0.5, 0.5).
double wrap_half(double x) { return x - std::floor(x + 0.5); }

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

} // namespace

std::string space_name(Space s) {
    switch (s) {
        case Space::Euclidean: return "euclidean";
        case Space::Sphere: return "sphere";
        case Space::Torus: return "torus";
        case Space::Rotation: return "rotation";
        case Space::Spd: return "spd";
        case Space::Hyperbolic: return "hyperbolic";
    }
    return "?";
}

// ---------------------------------------------------------------- Manifold

Manifold Manifold::euclidean(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
    require(lo.size() == hi.size() && lo.size() > 0, "euclidean box: size mismatch");
    require((hi - lo).minCoeff() > 0, "euclidean box: hi must exceed lo");
    Manifold m;
    m.space = Space::Euclidean;
    m.dim = static_cast<int>(lo.size());
    m.box_lo = lo;
    m.box_hi = hi;
    return m;
}

Manifold Manifold::sphere(int d) {
    require(d >= 1, "sphere: d >= 1");
    return Manifold{Space::Sphere, d};
}

Manifold Manifold::torus(int d) {
    require(d >= 1, "torus: d >= 1");
    return Manifold{Space::Torus, d};
}

Manifold Manifold::rotation(int d) {
    require(d == 2 || d == 3, "rotation: only d in {2,3} supported");
    return Manifold{Space::Rotation, d};
}

Manifold Manifold::spd(int d, double lambda_min, double lambda_max) {
    require(d >= 2, "spd: d >= 2");
    require(0 < lambda_min && lambda_min < lambda_max, "spd: bad eigenvalue box");
    Manifold m{Space::Spd, d};
    m.spd_lambda_min = lambda_min;
    m.spd_lambda_max = lambda_max;
    return m;
}

Manifold Manifold::hyperbolic(int d, double scale) {
    require(d >= 2, "hyperbolic: d >= 2");
    require(scale > 0, "hyperbolic: scale > 0");
    Manifold m{Space::Hyperbolic, d};
    m.hyperbolic_scale = scale;
    return m;
}

int Manifold::intrinsic_dim() const {
    switch (space) {
        case Space::Euclidean:
        case Space::Sphere:
        case Space::Torus:
        case Space::Hyperbolic: return dim;
        case Space::Rotation: return dim * (dim - 1) / 2;
        case Space::Spd: return dim * (dim + 1) / 2;
    }
    return 0;
}

double Manifold::injectivity_radius() const {
    switch (space) {
        case Space::Sphere:
        case Space::Torus:
        case Space::Rotation: return std::numbers::pi;
        default: return std::numeric_limits<double>::infinity();
    }
}

double Manifold::reference_diameter() const {
    switch (space) {
        case Space::Sphere: return std::numbers::pi;
        case Space::Torus: return std::numbers::pi * std::sqrt(double(dim));
        case Space::Rotation: return std::numbers::pi;
        case Space::Spd: {
            double span = std::log(spd_lambda_max / spd_lambda_min);
            return span * std::sqrt(double(dim));
        }
        case Space::Hyperbolic: return 6.0 * hyperbolic_scale;
        case Space::Euclidean: return (box_hi - box_lo).norm();
    }
    return 1.0;
}

// ------------------------------------------------------------------- Point

Point Point::euclidean(const Eigen::VectorXd& x) {
    require(x.size() > 0, "euclidean point: empty");
    require(x.allFinite(), "euclidean point: non-finite");
    return Point(Space::Euclidean, static_cast<int>(x.size()), x);
}

Point Point::sphere(const Eigen::VectorXd& x) {
    require(x.size() >= 2, "sphere point: need ambient dim >= 2");
    require(x.allFinite(), "sphere point: non-finite");
    require(std::abs(x.norm() - 1.0) <= 1e-10, "sphere point: not unit norm");
    return Point(Space::Sphere, static_cast<int>(x.size()) - 1, x);
}

Point Point::torus(const Eigen::VectorXd& x) {
    require(x.size() >= 1, "torus point: empty");
    require(x.allFinite(), "torus point: non-finite");
    Eigen::VectorXd w = x.unaryExpr([](double v) { return wrap01(v); });
    return Point(Space::Torus, static_cast<int>(x.size()), w);
}

Point Point::rotation(const Eigen::MatrixXd& r) {
    require(r.rows() == r.cols() && (r.rows() == 2 || r.rows() == 3),
            "rotation point: need 2x2 or 3x3");
    require(r.allFinite(), "rotation point: non-finite");
    int d = static_cast<int>(r.rows());
    Eigen::MatrixXd err = r.transpose() * r - Eigen::MatrixXd::Identity(d, d);
    require(err.cwiseAbs().maxCoeff() <= 1e-8, "rotation point: not orthogonal");
    require(std::abs(r.determinant() - 1.0) <= 1e-8, "rotation point: det != 1");
    return Point(Space::Rotation, d, r);
}

Point Point::spd(const Eigen::MatrixXd& m) {
    require(m.rows() == m.cols() && m.rows() >= 2, "spd point: need square d >= 2");
    require(m.allFinite(), "spd point: non-finite");
    require((m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-10, "spd point: not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    require(es.eigenvalues().minCoeff() > 0, "spd point: not positive definite");
    // Store the exactly symmetric part.
    Eigen::MatrixXd s = 0.5 * (m + m.transpose());
    return Point(Space::Spd, static_cast<int>(m.rows()), s);
}

Point Point::hyperbolic(const Eigen::VectorXd& x) {
    require(x.size() >= 3, "hyperbolic point: need ambient dim >= 3");
    require(x.allFinite(), "hyperbolic point: non-finite");
    require(x(0) > 0, "hyperbolic point: x0 <= 0");
    double q = x(0) * x(0) - x.tail(x.size() - 1).squaredNorm();
    require(std::abs(q - 1.0) <= 1e-8, "hyperbolic point: off the hyperboloid");
    return Point(Space::Hyperbolic, static_cast<int>(x.size()) - 1, x);
}

double minkowski_dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return -a(0) * b(0) + a.tail(a.size() - 1).dot(b.tail(b.size() - 1));
}

// ------------------------------------------------- symmetric matrix calculus

Eigen::MatrixXd spd_sqrt(const Eigen::MatrixXd& x) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(x);
    return es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() *
           es.eigenvectors().transpose();
}

Eigen::MatrixXd spd_inv_sqrt(const Eigen::MatrixXd& x) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(x);
    return es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
           es.eigenvectors().transpose();
}

Eigen::MatrixXd sym_log(const Eigen::MatrixXd& x) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(x);
    return es.eigenvectors() * es.eigenvalues().array().log().matrix().asDiagonal() *
           es.eigenvectors().transpose();
}

Eigen::MatrixXd sym_exp(const Eigen::MatrixXd& s) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (s + s.transpose()));
    return es.eigenvectors() * es.eigenvalues().array().exp().matrix().asDiagonal() *
           es.eigenvectors().transpose();
}

// ------------------------------------------------------------ SO(d) calculus

double rotation_angle(const Eigen::MatrixXd& r) {
    if (r.rows() == 2) return std::abs(std::atan2(r(1, 0), r(0, 0)));
    double c = 0.5 * (r.trace() - 1.0);
    return std::acos(std::clamp(c, -1.0, 1.0));
}

Eigen::MatrixXd rotation_exp(const Eigen::MatrixXd& skew) {
    int d = static_cast<int>(skew.rows());
    if (d == 2) {
        double t = skew(1, 0);
        Eigen::MatrixXd r(2, 2);
        r << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
        return r;
    }
    Eigen::Vector3d w(skew(2, 1), skew(0, 2), skew(1, 0));
    double theta = w.norm();
    Eigen::MatrixXd i = Eigen::MatrixXd::Identity(3, 3);
    if (theta < 1e-10) return i + skew + 0.5 * skew * skew;
    double a = std::sin(theta) / theta;
    double b = (1.0 - std::cos(theta)) / (theta * theta);
    return i + a * skew + b * skew * skew;
}

Eigen::MatrixXd rotation_log(const Eigen::MatrixXd& r) {
    int d = static_cast<int>(r.rows());
    if (d == 2) {
        double t = std::atan2(r(1, 0), r(0, 0));
        Eigen::MatrixXd s(2, 2);
        s << 0, -t, t, 0;
        return s;
    }
    double theta = rotation_angle(r);
    Eigen::MatrixXd a = 0.5 * (r - r.transpose());
    if (theta < 1e-10) return a;
    if (theta >= std::numbers::pi - 1e-8)
        throw CutLocusError("rotation_log: angle at the cut locus (pi)");
    return (theta / std::sin(theta)) * a;
}

// ---------------------------------------------------------- tangent bases

namespace {

// Columns 2..d+1 of the Householder reflection taking e1 to p: an
// orthonormal basis of the hyperplane orthogonal to the unit vector p.
std::vector<Eigen::MatrixXd> sphere_basis(const Eigen::VectorXd& p) {
    int n = static_cast<int>(p.size());
    std::vector<Eigen::MatrixXd> basis;
    Eigen::VectorXd w = p;
    w(0) -= 1.0;
    double wn2 = w.squaredNorm();
    for (int j = 1; j < n; ++j) {
        Eigen::VectorXd e = Eigen::VectorXd::Unit(n, j);
        if (wn2 > 1e-14) e -= (2.0 * w(j) / wn2) * w;
        basis.push_back(e);
    }
    return basis;
}

// Spatial columns of the Lorentz boost mapping (1,0,...,0) to p: a
// Minkowski-orthonormal spacelike basis of T_p H^d.
std::vector<Eigen::MatrixXd> hyperbolic_basis(const Eigen::VectorXd& p) {
    int n = static_cast<int>(p.size());
    std::vector<Eigen::MatrixXd> basis;
    Eigen::VectorXd xs = p.tail(n - 1);
    for (int j = 1; j < n; ++j) {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
        v(0) = xs(j - 1);
        v.tail(n - 1) = Eigen::VectorXd::Unit(n - 1, j - 1) + xs * (xs(j - 1) / (1.0 + p(0)));
        basis.push_back(v);
    }
    return basis;
}

std::vector<Eigen::MatrixXd> rotation_generators(int d) {
    // A_{ij} = e_i e_j^T - e_j e_i^T, orthonormal under <U,V> = tr(U^T V)/2.
    std::vector<Eigen::MatrixXd> gens;
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
            Eigen::MatrixXd a = Eigen::MatrixXd::Zero(d, d);
            a(i, j) = -1.0;
            a(j, i) = 1.0;
            gens.push_back(a);
        }
    return gens;
}

std::vector<Eigen::MatrixXd> sym_basis(int d) {
    // Frobenius-orthonormal basis of symmetric matrices.
    std::vector<Eigen::MatrixXd> basis;
    for (int i = 0; i < d; ++i) {
        Eigen::MatrixXd b = Eigen::MatrixXd::Zero(d, d);
        b(i, i) = 1.0;
        basis.push_back(b);
    }
    double r = 1.0 / std::sqrt(2.0);
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
            Eigen::MatrixXd b = Eigen::MatrixXd::Zero(d, d);
            b(i, j) = b(j, i) = r;
            basis.push_back(b);
        }
    return basis;
}

} // namespace

std::vector<Eigen::MatrixXd> tangent_basis(const Point& p) {
    switch (p.space()) {
        case Space::Euclidean: {
            std::vector<Eigen::MatrixXd> basis;
            for (int j = 0; j < p.dim(); ++j)
                basis.push_back(Eigen::VectorXd::Unit(p.dim(), j));
            return basis;
        }
        case Space::Sphere: return sphere_basis(p.vec());
        case Space::Torus: {
            // Coordinates are angles / 2pi, so the unit-metric-length basis
            // vector along coordinate j has ambient entry 1/(2pi).
            std::vector<Eigen::MatrixXd> basis;
            for (int j = 0; j < p.dim(); ++j)
                basis.push_back(Eigen::VectorXd::Unit(p.dim(), j) / kTwoPi);
            return basis;
        }
        case Space::Rotation: {
            auto gens = rotation_generators(p.dim());
            for (auto& g : gens) g = p.mat() * g;
            return gens;
        }
        case Space::Spd: {
            Eigen::MatrixXd h = spd_sqrt(p.mat());
            auto basis = sym_basis(p.dim());
            for (auto& b : basis) b = h * b * h;
            return basis;
        }
        case Space::Hyperbolic: return hyperbolic_basis(p.vec());
    }
    return {};
}

double metric_inner(const Point& p, const Eigen::MatrixXd& u, const Eigen::MatrixXd& v) {
    switch (p.space()) {
        case Space::Euclidean:
        case Space::Sphere: return (u.transpose() * v).trace();
        case Space::Torus: return kTwoPi * kTwoPi * (u.transpose() * v).trace();
        case Space::Rotation: return 0.5 * (u.transpose() * v).trace();
        case Space::Spd: {
            Eigen::MatrixXd pinv = p.mat().inverse();
            return (pinv * u * pinv * v).trace();
        }
        case Space::Hyperbolic: return minkowski_dot(u.col(0), v.col(0));
    }
    return 0.0;
}

// --------------------------------------------------------------- distance

double geodesic_distance(const Point& p, const Point& q) {
    require(p.same_manifold(q), "geodesic_distance: mismatched manifolds");
    switch (p.space()) {
        case Space::Euclidean: return (p.vec() - q.vec()).norm();
        case Space::Sphere: {
            double c = std::clamp(p.vec().dot(q.vec()), -1.0, 1.0);
            return std::acos(c);
        }
        case Space::Torus: {
            double s = 0.0;
            for (int i = 0; i < p.dim(); ++i) {
                double w = wrap_half(q.vec()(i) - p.vec()(i));
                s += w * w;
            }
            return kTwoPi * std::sqrt(s);
        }
        case Space::Rotation: return rotation_angle(p.mat().transpose() * q.mat());
        case Space::Spd: {
            Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(
                q.mat(), p.mat(), Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
            return es.eigenvalues().array().log().matrix().norm();
        }
        case Space::Hyperbolic: {
            double c = std::max(1.0, -minkowski_dot(p.vec(), q.vec()));
            return std::acosh(c);
        }
    }
    return 0.0;
}

// ----------------------------------------------------------- exp/log maps

Point exp_map(const TangentVector& v) {
    const Point& p = v.base;
    const Eigen::VectorXd& c = v.coeffs;
    auto basis = tangent_basis(p);
    require(static_cast<int>(basis.size()) == c.size(), "exp_map: coefficient size mismatch");

    switch (p.space()) {
        case Space::Euclidean: return Point::euclidean(p.vec() + c);
        case Space::Sphere: {
            double n = c.norm();
            if (n < 1e-14) return p;
            Eigen::VectorXd t = Eigen::VectorXd::Zero(p.vec().size());
            for (int j = 0; j < c.size(); ++j) t += c(j) * basis[j].col(0);
            Eigen::VectorXd x = std::cos(n) * p.vec() + std::sin(n) * t / n;
            return Point::sphere(x / x.norm());
        }
        case Space::Torus: return Point::torus(p.vec() + c / kTwoPi);
        case Space::Rotation: {
            Eigen::MatrixXd s = Eigen::MatrixXd::Zero(p.dim(), p.dim());
            auto gens = rotation_generators(p.dim());
            for (int j = 0; j < c.size(); ++j) s += c(j) * gens[j];
            return Point::rotation(p.mat() * rotation_exp(s));
        }
        case Space::Spd: {
            auto sb = sym_basis(p.dim());
            Eigen::MatrixXd s = Eigen::MatrixXd::Zero(p.dim(), p.dim());
            for (int j = 0; j < c.size(); ++j) s += c(j) * sb[j];
            Eigen::MatrixXd h = spd_sqrt(p.mat());
            return Point::spd(h * sym_exp(s) * h);
        }
        case Space::Hyperbolic: {
            double n = c.norm();
            if (n < 1e-14) return p;
            Eigen::VectorXd t = Eigen::VectorXd::Zero(p.vec().size());
            for (int j = 0; j < c.size(); ++j) t += c(j) * basis[j].col(0);
            Eigen::VectorXd x = std::cosh(n) * p.vec() + std::sinh(n) * t / n;
            // Re-project onto the hyperboloid to remove drift.
            double s = x(0) * x(0) - x.tail(x.size() - 1).squaredNorm();
            return Point::hyperbolic(x / std::sqrt(s));
        }
    }
    throw std::logic_error("exp_map: unreachable");
}

TangentVector log_map(const Point& p, const Point& q) {
    require(p.same_manifold(q), "log_map: mismatched manifolds");
    switch (p.space()) {
        case Space::Euclidean: return {p, q.vec() - p.vec()};
        case Space::Sphere: {
            double c = std::clamp(p.vec().dot(q.vec()), -1.0, 1.0);
            if (c <= -1.0 + 1e-10)
                throw CutLocusError("log_map: antipodal points on the sphere");
            double theta = std::acos(c);
            Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(p.dim());
            Eigen::VectorXd u = q.vec() - c * p.vec();
            double un = u.norm();
            if (theta < 1e-12 || un < 1e-12) return {p, coeffs};
            u *= theta / un;
            auto basis = sphere_basis(p.vec());
            for (int j = 0; j < p.dim(); ++j) coeffs(j) = basis[j].col(0).dot(u);
            return {p, coeffs};
        }
        case Space::Torus: {
            Eigen::VectorXd coeffs(p.dim());
            for (int i = 0; i < p.dim(); ++i)
                coeffs(i) = kTwoPi * wrap_half(q.vec()(i) - p.vec()(i));
            return {p, coeffs};
        }
        case Space::Rotation: {
            Eigen::MatrixXd s = rotation_log(p.mat().transpose() * q.mat());
            auto gens = rotation_generators(p.dim());
            Eigen::VectorXd coeffs(static_cast<int>(gens.size()));
            for (std::size_t j = 0; j < gens.size(); ++j)
                coeffs(static_cast<int>(j)) = 0.5 * (gens[j].transpose() * s).trace();
            return {p, coeffs};
        }
        case Space::Spd: {
            Eigen::MatrixXd hinv = spd_inv_sqrt(p.mat());
            Eigen::MatrixXd m = sym_log(hinv * q.mat() * hinv);
            auto sb = sym_basis(p.dim());
            Eigen::VectorXd coeffs(static_cast<int>(sb.size()));
            for (std::size_t j = 0; j < sb.size(); ++j)
                coeffs(static_cast<int>(j)) = (sb[j] * m).trace();
            return {p, coeffs};
        }
        case Space::Hyperbolic: {
            double cosr = std::max(1.0, -minkowski_dot(p.vec(), q.vec()));
            double theta = std::acosh(cosr);
            Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(p.dim());
            Eigen::VectorXd u = q.vec() - cosr * p.vec();
            double un = std::sqrt(std::max(0.0, minkowski_dot(u, u)));
            if (theta < 1e-12 || un < 1e-12) return {p, coeffs};
            u *= theta / un;
            auto basis = hyperbolic_basis(p.vec());
            for (int j = 0; j < p.dim(); ++j)
                coeffs(j) = minkowski_dot(basis[j].col(0), u);
            return {p, coeffs};
        }
    }
    throw std::logic_error("log_map: unreachable");
}

// ----------------------------------------------------------------- sampling

namespace {

Eigen::MatrixXd haar_rotation(std::mt19937_64& rng, int d) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd g(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) g(i, j) = gauss(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < d; ++j)
        if (r(j, j) < 0) q.col(j) *= -1.0;
    if (q.determinant() < 0) q.col(0) *= -1.0;
    return q;
}

} // namespace

Point random_point(std::mt19937_64& rng, const Manifold& m) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    switch (m.space) {
        case Space::Euclidean: {
            require(m.box_lo.size() == m.dim, "random_point: euclidean box not set");
            Eigen::VectorXd x(m.dim);
            for (int i = 0; i < m.dim; ++i)
                x(i) = m.box_lo(i) + (m.box_hi(i) - m.box_lo(i)) * unif(rng);
            return Point::euclidean(x);
        }
        case Space::Sphere: {
            Eigen::VectorXd x(m.dim + 1);
            double n = 0;
            do {
                for (int i = 0; i <= m.dim; ++i) x(i) = gauss(rng);
                n = x.norm();
            } while (n < 1e-12);
            return Point::sphere(x / n);
        }
        case Space::Torus: {
            Eigen::VectorXd x(m.dim);
            for (int i = 0; i < m.dim; ++i) x(i) = unif(rng);
            return Point::torus(x);
        }
        case Space::Rotation: return Point::rotation(haar_rotation(rng, m.dim));
        case Space::Spd: {
            double llo = std::log(m.spd_lambda_min), lhi = std::log(m.spd_lambda_max);
            Eigen::VectorXd lam(m.dim);
            for (int i = 0; i < m.dim; ++i)
                lam(i) = std::exp(llo + (lhi - llo) * unif(rng));
            Eigen::MatrixXd u = haar_rotation(rng, m.dim);
            return Point::spd(u * lam.asDiagonal() * u.transpose());
        }
        case Space::Hyperbolic: {
            Eigen::VectorXd base = Eigen::VectorXd::Zero(m.dim + 1);
            base(0) = 1.0;
            Eigen::VectorXd c(m.dim);
            for (int i = 0; i < m.dim; ++i) c(i) = m.hyperbolic_scale * gauss(rng);
            return exp_map({Point::hyperbolic(base), c});
        }
    }
    throw std::logic_error("random_point: unreachable");
}

// ------------------------------------------------------------ serialization

int serialized_size(const Manifold& m) {
    switch (m.space) {
        case Space::Euclidean:
        case Space::Torus: return m.dim;
        case Space::Sphere:
        case Space::Hyperbolic: return m.dim + 1;
        case Space::Rotation: return m.dim * m.dim;
        case Space::Spd: return m.dim * (m.dim + 1) / 2;
    }
    return 0;
}

std::vector<double> serialize_point(const Point& p) {
    std::vector<double> out;
    switch (p.space()) {
        case Space::Euclidean:
        case Space::Sphere:
        case Space::Torus:
        case Space::Hyperbolic: {
            Eigen::VectorXd v = p.vec();
            out.assign(v.data(), v.data() + v.size());
            return out;
        }
        case Space::Rotation: {
            for (int i = 0; i < p.dim(); ++i)
                for (int j = 0; j < p.dim(); ++j) out.push_back(p.mat()(i, j));
            return out;
        }
        case Space::Spd: {
            for (int i = 0; i < p.dim(); ++i)
                for (int j = i; j < p.dim(); ++j) out.push_back(p.mat()(i, j));
            return out;
        }
    }
    return out;
}

Point deserialize_point(const Manifold& m, const std::vector<double>& data) {
    require(static_cast<int>(data.size()) == serialized_size(m),
            "deserialize_point: wrong element count for " + space_name(m.space));
    switch (m.space) {
        case Space::Euclidean:
            return Point::euclidean(Eigen::Map<const Eigen::VectorXd>(data.data(), m.dim));
        case Space::Torus:
            return Point::torus(Eigen::Map<const Eigen::VectorXd>(data.data(), m.dim));
        case Space::Sphere:
            return Point::sphere(Eigen::Map<const Eigen::VectorXd>(data.data(), m.dim + 1));
        case Space::Hyperbolic:
            return Point::hyperbolic(Eigen::Map<const Eigen::VectorXd>(data.data(), m.dim + 1));
        case Space::Rotation: {
            Eigen::MatrixXd r(m.dim, m.dim);
            int k = 0;
            for (int i = 0; i < m.dim; ++i)
                for (int j = 0; j < m.dim; ++j) r(i, j) = data[k++];
            return Point::rotation(r);
        }
        case Space::Spd: {
            Eigen::MatrixXd s(m.dim, m.dim);
            int k = 0;
            for (int i = 0; i < m.dim; ++i)
                for (int j = i; j < m.dim; ++j) s(i, j) = s(j, i) = data[k++];
            return Point::spd(s);
        }
    }
    throw std::logic_error("deserialize_point: unreachable");
}

} // namespace geobo
