#pragma once

#include <Eigen/Dense>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace geobo {

enum class Space { Euclidean, Sphere, Torus, Rotation, Spd, Hyperbolic };

std::string space_name(Space s);

// Thrown by log_map when the target lies on (or numerically at) the cut
// locus of the base point.
class CutLocusError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Descriptor of one of the supported spaces, including the sampling
// configuration used by random_point. `dim` is the defining parameter:
// S^d lives in R^{d+1}, T^d in [0,1)^d, Rotation/Spd are d x d matrices,
// H^d uses Lorentz coordinates in R^{d+1}.
struct Manifold {
    Space space = Space::Euclidean;
    int dim = 1;

    // Euclidean sampling box (required for random_point on Euclidean).
    Eigen::VectorXd box_lo, box_hi;
    // SPD eigenvalue sampling box (log-uniform draws).
    double spd_lambda_min = 1e-3, spd_lambda_max = 5.0;
    // Std dev of the Gaussian tangent draw at the hyperbolic base point.
    double hyperbolic_scale = 1.0;

    static Manifold euclidean(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);
    static Manifold sphere(int d);
    static Manifold torus(int d);
    static Manifold rotation(int d);
    static Manifold spd(int d, double lambda_min = 1e-3, double lambda_max = 5.0);
    static Manifold hyperbolic(int d, double scale = 1.0);

    int intrinsic_dim() const;
    // pi for sphere/torus/rotation, +inf on the non-compact spaces.
    double injectivity_radius() const;
    // A length scale for solver defaults: the diameter on compact spaces,
    // a sampling-box-derived figure otherwise.
    double reference_diameter() const;

    bool operator==(const Manifold& o) const { return space == o.space && dim == o.dim; }
};

// A point on one of the six supported spaces. The representation is a
// column vector for Euclidean/Sphere/Torus/Hyperbolic and a d x d matrix
// for Rotation/Spd. Construction validates the per-space invariants.
class Point {
public:
    Point() = default;

    static Point euclidean(const Eigen::VectorXd& x);
    static Point sphere(const Eigen::VectorXd& x);       // ||x|| = 1 within 1e-10
    static Point torus(const Eigen::VectorXd& x);        // wraps into [0,1)^d
    static Point rotation(const Eigen::MatrixXd& r);     // X^T X = I, det = 1 within 1e-8
    static Point spd(const Eigen::MatrixXd& m);          // symmetric 1e-10, eigs > 0
    static Point hyperbolic(const Eigen::VectorXd& x);   // <x,x>_M = -1 within 1e-8, x0 > 0

    Space space() const { return space_; }
    int dim() const { return dim_; }
    const Eigen::MatrixXd& rep() const { return rep_; }
    Eigen::VectorXd vec() const { return rep_.col(0); }
    const Eigen::MatrixXd& mat() const { return rep_; }

    bool same_manifold(const Point& o) const { return space_ == o.space_ && dim_ == o.dim_; }

private:
    Point(Space s, int d, Eigen::MatrixXd rep)
        : space_(s), dim_(d), rep_(std::move(rep)) {}

    Space space_ = Space::Euclidean;
    int dim_ = 0;
    Eigen::MatrixXd rep_;
};

// Tangent vector at `base`, expressed by coefficients in the orthonormal
// basis returned by tangent_basis(base).
struct TangentVector {
    Point base;
    Eigen::VectorXd coeffs;

    double norm() const { return coeffs.norm(); }
};

double geodesic_distance(const Point& p, const Point& q);
Point exp_map(const TangentVector& v);
TangentVector log_map(const Point& p, const Point& q);

// Orthonormal (w.r.t. the Riemannian metric at p) basis of T_p, each
// element in the same ambient representation as the point.
std::vector<Eigen::MatrixXd> tangent_basis(const Point& p);
double metric_inner(const Point& p, const Eigen::MatrixXd& u, const Eigen::MatrixXd& v);

Point random_point(std::mt19937_64& rng, const Manifold& m);

// Flat serialization used by the CSV/JSON interfaces: coordinate list for
// the vector spaces, row-major entries for rotations, upper triangle
// (row-wise) for SPD.
std::vector<double> serialize_point(const Point& p);
Point deserialize_point(const Manifold& m, const std::vector<double>& data);
int serialized_size(const Manifold& m);

// Minkowski bilinear form with signature (-,+,...,+).
double minkowski_dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// Symmetric-eigendecomposition matrix functions for the SPD calculus.
Eigen::MatrixXd spd_sqrt(const Eigen::MatrixXd& x);
Eigen::MatrixXd spd_inv_sqrt(const Eigen::MatrixXd& x);
Eigen::MatrixXd sym_log(const Eigen::MatrixXd& x);
Eigen::MatrixXd sym_exp(const Eigen::MatrixXd& s);

// Rodrigues-style exp/log on SO(3) (and the trivial SO(2) case).
Eigen::MatrixXd rotation_exp(const Eigen::MatrixXd& skew);
Eigen::MatrixXd rotation_log(const Eigen::MatrixXd& r);
double rotation_angle(const Eigen::MatrixXd& r);

} // namespace geobo
