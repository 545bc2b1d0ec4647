#pragma once

#include "geobo/manifold.hpp"
#include "geobo/quadrature.hpp"

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

namespace geobo {

enum class KernelFamily {
    RiemannianMatern,
    RiemannianSe,
    EuclideanMatern,
    EuclideanSe,
    NaiveGeodesicSe,
    Product,          // SPD(2) eigendecomposition baseline: R^2 x T^1 factors
    CholeskyEuclidean // SPD(2) baseline on the vectorized Cholesky factor
};

std::string family_name(KernelFamily f);

struct TruncationConfig {
    int torus_l = 0;   // 0 = choose from the length scale
    int sphere_n = 30; // series degree cap; terms stop early once negligible
    int so3_l = 30;
    int matern_quad_nodes = 64; // Gauss-Laguerre nodes for the heat integral
    LineQuadConfig line_quad;   // H^2 / SPD(2) line integrals
};

struct KernelSpec {
    KernelFamily family = KernelFamily::RiemannianMatern;
    double nu = 2.5; // smoothness; infinity() gives the squared-exponential limit
    double kappa = 1.0;
    double sigma2 = 1.0;
    TruncationConfig trunc;
    // Per-factor length scales for Product (eigenvalues, rotation angle);
    // empty means both factors use `kappa`.
    std::vector<double> factor_kappas;

    bool is_se() const;
    double effective_nu() const; // infinity for the *Se families
};

// Reduced pair statistic a stationary/zonal kernel depends on: cos(theta)
// on spheres, the rotation angle on SO(3), rho on hyperbolic/Euclidean
// spaces, the log-singular-value pair on SPD(2), and the wrapped
// coordinate difference vector on tori.
struct PairFeature {
    double a = 0.0;
    double b = 0.0;
    Eigen::VectorXd delta;
};

PairFeature pair_feature(const KernelSpec& spec, const Point& x, const Point& y);

namespace detail {
struct EvalTables;
}

// Kernel with its normalization constant and spectral weight tables
// resolved once; evaluation is pure and reentrant after construction.
class KernelEvaluator {
public:
    KernelEvaluator(const KernelSpec& spec, Space space, int dim);

    double operator()(const Point& x, const Point& y) const;
    double from_feature(const PairFeature& f) const;

    const KernelSpec& spec() const { return spec_; }
    Space space() const { return space_; }
    int dim() const { return dim_; }

private:
    KernelSpec spec_;
    Space space_;
    int dim_;
    std::shared_ptr<const detail::EvalTables> tables_;
};

double kernel_eval(const KernelSpec& spec, const Point& x, const Point& y);

// Unnormalized building blocks (sigma^2 and C not applied).
double heat_torus(const Point& x, const Point& y, double kappa, int L);
double matern_torus(const Point& x, const Point& y, double nu, double kappa, int L);
double heat_sphere(const Point& x, const Point& y, double kappa, int n_max);
double matern_sphere(const Point& x, const Point& y, double nu, double kappa, int n_max);
double heat_so3(const Point& x, const Point& y, double kappa, int l_max);
double matern_so3(const Point& x, const Point& y, double nu, double kappa, int l_max);
double heat_hyperbolic(const Point& x, const Point& y, double kappa,
                       const LineQuadConfig& lq = {});
double heat_spd2(const Point& x, const Point& y, double kappa, const LineQuadConfig& lq = {});

// Distance-parameterized forms used by the dispatchers and by oracles.
double heat_torus_delta(const Eigen::VectorXd& wrapped_delta, double kappa, int L);
double matern_torus_delta(const Eigen::VectorXd& wrapped_delta, double nu, double kappa, int L);
double heat_sphere_cos(double cos_dist, int d, double kappa, int n_max);
double matern_sphere_cos(double cos_dist, int d, double nu, double kappa, int n_max);
double heat_so3_angle(double theta, double kappa, int l_max);
double matern_so3_angle(double theta, double nu, double kappa, int l_max);
double heat_hyperbolic_rho(double rho, int d, double kappa, const LineQuadConfig& lq = {});
double heat_spd2_h(double h1, double h2, double kappa, const LineQuadConfig& lq = {});

// int_0^inf u^{p-1} exp(-2 nu u / kappa^2) k_heat(sqrt(2u)) du by
// Gauss-Laguerre quadrature; p = nu on non-compact spaces and nu + d/2
// when matching a compact spectral sum.
double matern_from_heat(const std::function<double(double)>& heat_at_scale, double nu,
                        double kappa, double p, int nodes);

// Unnormalized diagonal value of the spec on the given manifold, i.e. the
// constant C that divides the kernel so that k(x,x) = sigma^2. Cached.
double normalization_constant(const KernelSpec& spec, const Manifold& m);

double naive_geodesic_se(const Point& x, const Point& y, double kappa, double sigma2);

// sigma^2 * prod_j k_j(x_j, y_j) with each factor normalized to unit
// variance.
double product_kernel(const std::vector<KernelSpec>& factors, const std::vector<Point>& xs,
                      const std::vector<Point>& ys, double sigma2);

// Canonical eigendecomposition of a 2x2 SPD point: eigenvalues sorted
// descending (as a Euclidean point) and the SO(2) angle divided by 2 pi
// (as a T^1 point), with the first eigenvector's sign fixed.
std::pair<Point, Point> spd2_eigen_split(const Point& x);
// (L11, L21, L22) of the lower Cholesky factor.
Eigen::VectorXd spd2_cholesky_vector(const Point& x);

// Closed-form Euclidean Matern, normalized to 1 at rho = 0.
double euclidean_matern(double rho, double nu, double kappa);

// Toolkit default for the torus lattice bound at a given length scale.
int torus_auto_l(double kappa);
int matern_torus_auto_l(double nu, double kappa, int d);

// Number of torus heat evaluations whose truncation tail bound
// exp(-2 k^2 pi^2 L^2) (2L+1)^d exceeded 1e-10 of the leading term.
long torus_tail_event_count();

struct GramInfo {
    bool min_eigenvalue_computed = false;
    double min_eigenvalue = 0.0;
};

// K_ij = k(x_i, x_j), exactly symmetric by construction. Entries are
// filled in parallel; gram_serial is the reference implementation the
// tests and the benchmark compare against. For the naive geodesic family
// the most negative Gram eigenvalue is reported through `info`.
Eigen::MatrixXd gram(const KernelSpec& spec, const std::vector<Point>& points,
                     GramInfo* info = nullptr);
Eigen::MatrixXd gram_serial(const KernelSpec& spec, const std::vector<Point>& points,
                            GramInfo* info = nullptr);

} // namespace geobo
