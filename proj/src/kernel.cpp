#include "geobo/kernel.hpp"

#include <Eigen/Eigenvalues>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>

#include "geobo/spectral.hpp"

namespace geobo {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

double wrap_half(double x) { return x - std::floor(x + 0.5); }

std::atomic<long> g_torus_tail_events{0};

} // namespace

std::string family_name(KernelFamily f) {
    switch (f) {
        case KernelFamily::RiemannianMatern: return "riemannian_matern";
        case KernelFamily::RiemannianSe: return "riemannian_se";
        case KernelFamily::EuclideanMatern: return "euclidean_matern";
        case KernelFamily::EuclideanSe: return "euclidean_se";
        case KernelFamily::NaiveGeodesicSe: return "naive_geodesic_se";
        case KernelFamily::Product: return "product";
        case KernelFamily::CholeskyEuclidean: return "cholesky_euclidean";
    }
    return "?";
}

bool KernelSpec::is_se() const {
    if (family == KernelFamily::RiemannianSe || family == KernelFamily::EuclideanSe) return true;
    return std::isinf(nu);
}

double KernelSpec::effective_nu() const { return is_se() ? kInf : nu; }

long torus_tail_event_count() { return g_torus_tail_events.load(); }

// ----------------------------------------------------------- torus series

int torus_auto_l(double kappa) {
    int l = static_cast<int>(std::ceil(3.0 / (kPi * kappa * std::sqrt(2.0))));
    return std::clamp(l, 3, 3000);
}

int matern_torus_auto_l(double nu, double kappa, int d) {
    if (std::isinf(nu)) return torus_auto_l(kappa);
    double a = 2.0 * nu / (kappa * kappa);
    double p = nu + 0.5 * d;
    double l = std::sqrt(a) / (2.0 * kPi) * std::pow(1e-6, -0.5 / p);
    int li = static_cast<int>(std::ceil(l));
    return std::clamp(std::max(li, torus_auto_l(kappa)), 3, 2000);
}

double heat_torus_delta(const Eigen::VectorXd& delta, double kappa, int L) {
    int d = static_cast<int>(delta.size());
    if (kappa < 0.15) {
        // Below this scale the lattice sum needs O(1/kappa) terms while the
        // Poisson-summation (wrapped Gaussian) form converges in a few:
        //   sum_tau e^{-2 k^2 pi^2 |tau|^2} cos(2 pi <tau, D>)
        //     = (2 pi k^2)^{-d/2} sum_m e^{-|D + m|^2 / (2 k^2)}.
        double acc = 0.0;
        double inv2k2 = 0.5 / (kappa * kappa);
        for (const auto& mv : spectral::torus_lattice(d, 3)) {
            double n2 = 0.0;
            for (int i = 0; i < d; ++i) {
                double t = delta(i) + mv(i);
                n2 += t * t;
            }
            acc += std::exp(-n2 * inv2k2);
        }
        return acc * std::pow(2.0 * kPi * kappa * kappa, -0.5 * d);
    }
    double c = 2.0 * kappa * kappa * kPi * kPi;
    double tail = std::exp(-c * L * L) * std::pow(2.0 * L + 1.0, d);
    if (tail > 1e-10) ++g_torus_tail_events;
    double acc = 0.0;
    for (const auto& tau : spectral::torus_lattice(d, L)) {
        double n2 = tau.cast<double>().squaredNorm();
        double phase = 2.0 * kPi * tau.cast<double>().dot(delta);
        acc += std::exp(-c * n2) * std::cos(phase);
    }
    return acc;
}

double matern_torus_delta(const Eigen::VectorXd& delta, double nu, double kappa, int L) {
    int d = static_cast<int>(delta.size());
    double a = 2.0 * nu / (kappa * kappa);
    double p = nu + 0.5 * d;
    double acc = 0.0;
    for (const auto& tau : spectral::torus_lattice(d, L)) {
        double lambda = 4.0 * kPi * kPi * tau.cast<double>().squaredNorm();
        double phase = 2.0 * kPi * tau.cast<double>().dot(delta);
        acc += std::pow(a + lambda, -p) * std::cos(phase);
    }
    return acc;
}

namespace {

Eigen::VectorXd torus_wrapped_delta(const Point& x, const Point& y) {
    Eigen::VectorXd d(x.dim());
    for (int i = 0; i < x.dim(); ++i) d(i) = wrap_half(x.vec()(i) - y.vec()(i));
    return d;
}

} // namespace

double heat_torus(const Point& x, const Point& y, double kappa, int L) {
    return heat_torus_delta(torus_wrapped_delta(x, y), kappa, L);
}

double matern_torus(const Point& x, const Point& y, double nu, double kappa, int L) {
    return matern_torus_delta(torus_wrapped_delta(x, y), nu, kappa, L);
}

// ---------------------------------------------------------- sphere series

namespace {

// Zonal series sum_{n <= n_max} c_{n,d} w(lambda_n) C_n^{((d-1)/2)}(t) with
// early stopping once the worst-case term N(d,n) w(lambda_n) falls below
// 1e-10 of the accumulated diagonal. The stopping rule depends only on
// (d, nu, kappa, n_max), so every pair of a configuration is truncated
// identically and the normalization stays consistent.
double sphere_series(double t, int d, double nu, double kappa, int n_max) {
    const double alpha = 0.5 * (d - 1);
    const bool se = std::isinf(nu);
    const double a = se ? 0.0 : 2.0 * nu / (kappa * kappa);
    const double p = se ? 0.0 : nu + 0.5 * d;
    double cm1 = 0.0, cn = 1.0; // C_{n-1}, C_n at t
    double harmonic = 1.0;      // N(d, n)
    double acc = 0.0, diag = 0.0;
    for (int n = 0; n <= n_max; ++n) {
        if (n == 1) {
            cm1 = 1.0;
            cn = 2.0 * alpha * t;
        } else if (n >= 2) {
            double next =
                (2.0 * t * (n + alpha - 1.0) * cn - (n + 2.0 * alpha - 2.0) * cm1) / n;
            cm1 = cn;
            cn = next;
        }
        double lambda = double(n) * (n + d - 1.0);
        double w = se ? std::exp(-0.5 * kappa * kappa * lambda) : std::pow(a + lambda, -p);
        acc += spectral::sphere_zonal_coeff(d, n) * w * cn;
        double bound = harmonic * w;
        diag += bound;
        if (n >= 10 && bound < 1e-10 * diag) break;
        harmonic *= (2.0 * n + d + 1.0) * (n + d - 1.0) / ((2.0 * n + d - 1.0) * (n + 1.0));
    }
    return acc;
}

} // namespace

double heat_sphere_cos(double t, int d, double kappa, int n_max) {
    return sphere_series(t, d, kInf, kappa, n_max);
}

double matern_sphere_cos(double t, int d, double nu, double kappa, int n_max) {
    return sphere_series(t, d, nu, kappa, n_max);
}

double heat_sphere(const Point& x, const Point& y, double kappa, int n_max) {
    double t = std::clamp(x.vec().dot(y.vec()), -1.0, 1.0);
    return heat_sphere_cos(t, x.dim(), kappa, n_max);
}

double matern_sphere(const Point& x, const Point& y, double nu, double kappa, int n_max) {
    double t = std::clamp(x.vec().dot(y.vec()), -1.0, 1.0);
    return matern_sphere_cos(t, x.dim(), nu, kappa, n_max);
}

// ------------------------------------------------------------ SO(3) series

namespace {

double so3_series(double theta, double nu, double kappa, int l_max) {
    const bool se = std::isinf(nu);
    const double a = se ? 0.0 : 2.0 * nu / (kappa * kappa);
    const double p = se ? 0.0 : nu + 1.5;
    double acc = 0.0, diag = 0.0;
    for (int l = 0; l <= l_max; ++l) {
        double lambda = double(l) * (l + 1.0);
        double w = se ? std::exp(-0.5 * kappa * kappa * lambda) : std::pow(a + lambda, -p);
        double dim = 2.0 * l + 1.0;
        acc += w * dim * spectral::so3_character(l, theta);
        double bound = dim * dim * w;
        diag += bound;
        if (l >= 5 && bound < 1e-10 * diag) break;
    }
    return acc;
}

} // namespace

double heat_so3_angle(double theta, double kappa, int l_max) {
    return so3_series(theta, kInf, kappa, l_max);
}

double matern_so3_angle(double theta, double nu, double kappa, int l_max) {
    return so3_series(theta, nu, kappa, l_max);
}

double heat_so3(const Point& x, const Point& y, double kappa, int l_max) {
    return heat_so3_angle(rotation_angle(x.mat() * y.mat().transpose()), kappa, l_max);
}

double matern_so3(const Point& x, const Point& y, double nu, double kappa, int l_max) {
    return matern_so3_angle(rotation_angle(x.mat() * y.mat().transpose()), nu, kappa, l_max);
}

// ------------------------------------------------------- hyperbolic kernels

namespace {

// H^2 integrand after s = rho + t^2, with cosh(s) - cosh(rho) rewritten as
// 2 sinh(rho + t^2/2) sinh(t^2/2) to avoid cancellation near the endpoint.
double h2_integrand(double rho, double t, double kappa) {
    double s = rho + t * t;
    double e = std::exp(-0.5 * s * s / (kappa * kappa));
    if (t < 1e-12)
        return rho > 0 ? 2.0 * rho * e / std::sqrt(std::sinh(rho)) : 0.0;
    double den = std::sqrt(2.0 * std::sinh(rho + 0.5 * t * t) * std::sinh(0.5 * t * t));
    return 2.0 * t * s * e / den;
}

double h2_heat(double rho, double kappa, const LineQuadConfig& lq) {
    double s_max = std::sqrt(rho * rho + 100.0 * kappa * kappa);
    double t_max = std::sqrt(std::max(s_max - rho, 1e-8));
    return adaptive_simpson([&](double t) { return h2_integrand(rho, t, kappa); }, 0.0,
                            t_max, lq);
}

// d/drho of the H^2 integral, differentiating under the integral sign.
// The substitution fixes the factor sinh(t^2/2) independent of rho.
double h2_heat_drho(double rho, double kappa, const LineQuadConfig& lq) {
    double s_max = std::sqrt(rho * rho + 100.0 * kappa * kappa);
    double t_max = std::sqrt(std::max(s_max - rho, 1e-8));
    double k2 = kappa * kappa;
    auto f = [&](double t) {
        double s = rho + t * t;
        double e = std::exp(-0.5 * s * s / k2);
        double sh_rho = std::sinh(rho + 0.5 * t * t);
        if (t < 1e-12) {
            double sr = std::sinh(rho);
            return 2.0 * e * (1.0 - s * s / k2) / std::sqrt(sr) -
                   rho * e * std::cosh(rho) / (sr * std::sqrt(sr));
        }
        double sh_t = std::sinh(0.5 * t * t);
        double den2 = 2.0 * sh_rho * sh_t;
        double den = std::sqrt(den2);
        double term1 = 2.0 * t * e * (1.0 - s * s / k2) / den;
        double term2 = 2.0 * t * s * e * std::cosh(rho + 0.5 * t * t) * sh_t / (den2 * den);
        return term1 - term2;
    };
    return adaptive_simpson(f, 0.0, t_max, lq);
}

double h3_heat(double rho, double kappa) {
    double e = std::exp(-0.5 * rho * rho / (kappa * kappa));
    if (rho < 1e-8) return e;
    return rho / std::sinh(rho) * e;
}

// Millson step applied analytically to the H^3 closed form.
double h5_heat(double rho, double kappa) {
    double k2 = kappa * kappa;
    double e = std::exp(-0.5 * rho * rho / k2);
    if (rho < 1e-4) return (1.0 / 3.0 + 1.0 / k2) * e;
    double sh = std::sinh(rho);
    return e * (rho * std::cosh(rho) / sh - 1.0 + rho * rho / k2) / (sh * sh);
}

double h4_heat(double rho, double kappa, const LineQuadConfig& lq) {
    if (rho < 1e-3) {
        // rho -> 0 limit of -k2'(rho)/sinh(rho) is -k2''(0); second
        // difference of the even extension of k2.
        double h = 0.05;
        double k0 = h2_heat(0.0, kappa, lq);
        double kh = h2_heat(h, kappa, lq);
        return 2.0 * (k0 - kh) / (h * h);
    }
    return -h2_heat_drho(rho, kappa, lq) / std::sinh(rho);
}

} // namespace

double heat_hyperbolic_rho(double rho, int d, double kappa, const LineQuadConfig& lq) {
    switch (d) {
        case 2: return h2_heat(rho, kappa, lq);
        case 3: return h3_heat(rho, kappa);
        case 4: return h4_heat(rho, kappa, lq);
        case 5: return h5_heat(rho, kappa);
        default: throw std::invalid_argument("heat_hyperbolic: d must be in {2,3,4,5}");
    }
}

double heat_hyperbolic(const Point& x, const Point& y, double kappa, const LineQuadConfig& lq) {
    return heat_hyperbolic_rho(geodesic_distance(x, y), x.dim(), kappa, lq);
}

// ------------------------------------------------------------- SPD(2) kernel

double heat_spd2_h(double h1, double h2, double kappa, const LineQuadConfig& lq) {
    double k2 = kappa * kappa;
    double alpha = std::max(0.0, h1 - h2);
    double outer = std::exp(-0.5 * (h1 * h1 + h2 * h2) / k2);
    if (outer == 0.0) return 0.0;
    double s_max = 0.5 * (-alpha + std::sqrt(alpha * alpha + 200.0 * k2));
    double t_max = std::sqrt(s_max);
    auto f = [&](double t) {
        double s = t * t;
        if (t < 1e-12)
            return alpha > 0 ? 2.0 * alpha / std::sqrt(std::sinh(alpha)) : 0.0;
        double e = std::exp(-s * (s + alpha) / k2);
        return (2.0 * s + alpha) * e * 2.0 * t /
               std::sqrt(std::sinh(s) * std::sinh(s + alpha));
    };
    return outer * adaptive_simpson(f, 0.0, t_max, lq);
}

namespace {

// Log-singular values of Xc Yc^{-1}, i.e. half the logs of the generalized
// eigenvalues of (X, Y), sorted descending. Reading the H's as logs makes
// the kernel symmetric in (X, Y); raw singular values do not.
std::pair<double, double> spd2_log_singular(const Point& x, const Point& y) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(
        x.mat(), y.mat(), Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
    double h1 = 0.5 * std::log(es.eigenvalues()(1));
    double h2 = 0.5 * std::log(es.eigenvalues()(0));
    if (h1 < h2) std::swap(h1, h2);
    return {h1, h2};
}

} // namespace

double heat_spd2(const Point& x, const Point& y, double kappa, const LineQuadConfig& lq) {
    auto [h1, h2] = spd2_log_singular(x, y);
    return heat_spd2_h(h1, h2, kappa, lq);
}

// -------------------------------------------------------- Matern from heat

double matern_from_heat(const std::function<double(double)>& heat_at_scale, double nu,
                        double kappa, double p, int nodes) {
    if (nodes < 8) throw std::invalid_argument("matern_from_heat: too few nodes");
    // In w = (2 nu / kappa^2) u the integral is int w^{p-1} e^-w H(w) dw.
    // Trapezoid rule on t = log w: the integrand decays doubly
    // exponentially at both ends, the weights stay positive (so positive
    // definiteness of the heat mixture is preserved), and the log grid
    // resolves the small-u mass that sets the kernel's behaviour near
    // rho = 0. A Gauss-Laguerre rule at the same node count misses that
    // mass for small nu.
    double a = 2.0 * nu / (kappa * kappa);
    double t_lo = -30.0;
    double t_hi = std::log(40.0 + 10.0 * p);
    double h = (t_hi - t_lo) / (nodes - 1);
    double acc = 0.0;
    for (int i = 0; i < nodes; ++i) {
        double t = t_lo + i * h;
        double w = std::exp(t);
        double v = heat_at_scale(std::sqrt(2.0 * w / a));
        if (!std::isfinite(v)) throw std::runtime_error("matern_from_heat: non-finite heat value");
        double trap = (i == 0 || i == nodes - 1) ? 0.5 : 1.0;
        acc += trap * std::exp(p * t - w) * v;
    }
    return acc * h * std::pow(a, -p);
}

// --------------------------------------------------- Euclidean closed forms

double euclidean_matern(double rho, double nu, double kappa) {
    if (rho <= 0.0) return 1.0;
    if (std::isinf(nu)) return std::exp(-0.5 * rho * rho / (kappa * kappa));
    double z = std::sqrt(2.0 * nu) * rho / kappa;
    if (nu == 0.5) return std::exp(-z);
    if (nu == 1.5) return (1.0 + z) * std::exp(-z);
    if (nu == 2.5) return (1.0 + z + z * z / 3.0) * std::exp(-z);
    return std::pow(2.0, 1.0 - nu) / std::tgamma(nu) * std::pow(z, nu) *
           std::cyl_bessel_k(nu, z);
}

double naive_geodesic_se(const Point& x, const Point& y, double kappa, double sigma2) {
    double d = geodesic_distance(x, y);
    return sigma2 * std::exp(-d * d / kappa);
}

// ----------------------------------------------------------- SPD baselines

std::pair<Point, Point> spd2_eigen_split(const Point& x) {
    if (x.space() != Space::Spd || x.dim() != 2)
        throw std::invalid_argument("spd2_eigen_split: need a 2x2 SPD point");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(x.mat());
    // Descending eigenvalues; fix the leading eigenvector's sign.
    Eigen::Vector2d lam(es.eigenvalues()(1), es.eigenvalues()(0));
    Eigen::Vector2d u = es.eigenvectors().col(1);
    if (u(0) < 0 || (u(0) == 0 && u(1) < 0)) u = -u;
    double angle = std::atan2(u(1), u(0));
    Eigen::VectorXd coord(1);
    coord(0) = angle / (2.0 * kPi);
    return {Point::euclidean(lam), Point::torus(coord)};
}

Eigen::VectorXd spd2_cholesky_vector(const Point& x) {
    if (x.space() != Space::Spd || x.dim() != 2)
        throw std::invalid_argument("spd2_cholesky_vector: need a 2x2 SPD point");
    Eigen::LLT<Eigen::MatrixXd> llt(x.mat());
    Eigen::MatrixXd l = llt.matrixL();
    Eigen::VectorXd v(3);
    v << l(0, 0), l(1, 0), l(1, 1);
    return v;
}

// ------------------------------------------------------------ pair features

namespace {

Eigen::VectorXd embedded(const Point& p) {
    auto s = serialize_point(p);
    return Eigen::Map<const Eigen::VectorXd>(s.data(), static_cast<long>(s.size()));
}

} // namespace

PairFeature pair_feature(const KernelSpec& spec, const Point& x, const Point& y) {
    if (!x.same_manifold(y))
        throw std::invalid_argument("pair_feature: mismatched manifolds");
    PairFeature f;
    switch (spec.family) {
        case KernelFamily::EuclideanMatern:
        case KernelFamily::EuclideanSe:
            f.a = (embedded(x) - embedded(y)).norm();
            return f;
        case KernelFamily::CholeskyEuclidean:
            f.a = (spd2_cholesky_vector(x) - spd2_cholesky_vector(y)).norm();
            return f;
        case KernelFamily::NaiveGeodesicSe:
            f.a = geodesic_distance(x, y);
            return f;
        case KernelFamily::Product: {
            auto [ex, ax] = spd2_eigen_split(x);
            auto [ey, ay] = spd2_eigen_split(y);
            f.a = (ex.vec() - ey.vec()).norm();
            f.b = wrap_half(ax.vec()(0) - ay.vec()(0));
            return f;
        }
        case KernelFamily::RiemannianMatern:
        case KernelFamily::RiemannianSe: break;
    }
    switch (x.space()) {
        case Space::Euclidean: f.a = (x.vec() - y.vec()).norm(); break;
        case Space::Sphere: f.a = std::clamp(x.vec().dot(y.vec()), -1.0, 1.0); break;
        case Space::Torus: f.delta = torus_wrapped_delta(x, y); break;
        case Space::Rotation: f.a = rotation_angle(x.mat() * y.mat().transpose()); break;
        case Space::Spd: {
            auto [h1, h2] = spd2_log_singular(x, y);
            f.a = h1;
            f.b = h2;
            break;
        }
        case Space::Hyperbolic: {
            // acosh resolves distances only down to sqrt(eps) * |x|, and the
            // Matern mixture probes heat scales of that order. Identical
            // representations are exactly coincident; snap anything below
            // the representation tolerance to zero as well.
            if ((x.rep() - y.rep()).squaredNorm() == 0.0) break; // f.a = 0
            double rho = geodesic_distance(x, y);
            f.a = rho < 1e-7 * x.rep().norm() ? 0.0 : rho;
            break;
        }
    }
    return f;
}

// --------------------------------------------------- evaluator + dispatcher

namespace detail {

// Per-evaluator precomputed spectral data. Series weights, lattice
// frequencies and quadrature nodes depend only on the spec, so they are
// built once; the per-pair work is then a short recurrence or cosine sum.
// The sigma^2 / C normalization is folded into the stored weights.
struct EvalTables {
    // sphere zonal series: k(t) = sum coef[n] C_n^(alpha)(t)
    Eigen::VectorXd sphere_coef;
    double alpha = 0.0;
    // SO(3) character series: k(theta) = sum coef[l] chi_l(theta)
    Eigen::VectorXd so3_coef;
    // torus: lattice branch  k(D) = sum w[i] cos(2 pi freq_i . D)
    //        wrapped branch  k(D) = sum w[i] exp(-|D + m_i|^2 / (2 kappa^2))
    Eigen::MatrixXd torus_freq;
    Eigen::VectorXd torus_w;
    bool torus_wrapped = false;
    double torus_inv2k2 = 0.0;
    // SPD(2) eigendecomposition product: angle factor on T^1
    Eigen::MatrixXd angle_freq;
    Eigen::VectorXd angle_w;
    bool angle_wrapped = false;
    double angle_inv2k2 = 0.0;
    double k_eig = 1.0;
    // non-compact Matern mixture: k = sum mq_w[i] heat(.; mq_kh[i])
    Eigen::VectorXd mq_kh, mq_w;
    // plain multiplier for single-quadrature (heat) paths
    double scale = 1.0;
};

} // namespace detail

namespace {

void build_torus_table(double nu, double kappa, int user_l, int d, Eigen::MatrixXd& freq,
                       Eigen::VectorXd& w, bool& wrapped, double& inv2k2) {
    wrapped = std::isinf(nu) && kappa < 0.15;
    if (wrapped) {
        auto lattice = spectral::torus_lattice(d, 3);
        freq.resize(static_cast<long>(lattice.size()), d);
        for (std::size_t i = 0; i < lattice.size(); ++i)
            freq.row(static_cast<long>(i)) = lattice[i].cast<double>();
        w = Eigen::VectorXd::Constant(freq.rows(),
                                      std::pow(2.0 * kPi * kappa * kappa, -0.5 * d));
        inv2k2 = 0.5 / (kappa * kappa);
        return;
    }
    int l = user_l > 0 ? user_l
                       : (std::isinf(nu) ? torus_auto_l(kappa) : matern_torus_auto_l(nu, kappa, d));
    if (std::isinf(nu)) {
        double c = 2.0 * kappa * kappa * kPi * kPi;
        double tail = std::exp(-c * l * l) * std::pow(2.0 * l + 1.0, d);
        if (tail > 1e-10) ++g_torus_tail_events;
    }
    auto lattice = spectral::torus_lattice(d, l);
    freq.resize(static_cast<long>(lattice.size()), d);
    w.resize(freq.rows());
    double a = std::isinf(nu) ? 0.0 : 2.0 * nu / (kappa * kappa);
    double p = std::isinf(nu) ? 0.0 : nu + 0.5 * d;
    double c = 2.0 * kappa * kappa * kPi * kPi;
    for (std::size_t i = 0; i < lattice.size(); ++i) {
        Eigen::VectorXd tau = lattice[i].cast<double>();
        freq.row(static_cast<long>(i)) = tau;
        double n2 = tau.squaredNorm();
        w(static_cast<long>(i)) =
            std::isinf(nu) ? std::exp(-c * n2) : std::pow(a + 4.0 * kPi * kPi * n2, -p);
    }
}

double eval_torus_table(const Eigen::MatrixXd& freq, const Eigen::VectorXd& w, bool wrapped,
                        double inv2k2, const Eigen::VectorXd& delta) {
    double acc = 0.0;
    if (wrapped) {
        for (long i = 0; i < freq.rows(); ++i) {
            double n2 = (delta + freq.row(i).transpose()).squaredNorm();
            acc += w(i) * std::exp(-n2 * inv2k2);
        }
        return acc;
    }
    for (long i = 0; i < freq.rows(); ++i)
        acc += w(i) * std::cos(2.0 * kPi * freq.row(i).dot(delta));
    return acc;
}

// Weights with the diagonal-based early stop shared with sphere_series.
Eigen::VectorXd build_sphere_coef(double nu, double kappa, int d, int n_max) {
    const bool se = std::isinf(nu);
    const double a = se ? 0.0 : 2.0 * nu / (kappa * kappa);
    const double p = se ? 0.0 : nu + 0.5 * d;
    std::vector<double> coef;
    double harmonic = 1.0, diag = 0.0;
    for (int n = 0; n <= n_max; ++n) {
        double lambda = double(n) * (n + d - 1.0);
        double weight = se ? std::exp(-0.5 * kappa * kappa * lambda) : std::pow(a + lambda, -p);
        coef.push_back(spectral::sphere_zonal_coeff(d, n) * weight);
        double bound = harmonic * weight;
        diag += bound;
        if (n >= 10 && bound < 1e-10 * diag) break;
        harmonic *= (2.0 * n + d + 1.0) * (n + d - 1.0) / ((2.0 * n + d - 1.0) * (n + 1.0));
    }
    return Eigen::Map<Eigen::VectorXd>(coef.data(), static_cast<long>(coef.size()));
}

double eval_sphere_table(const Eigen::VectorXd& coef, double alpha, double t) {
    double acc = coef(0);
    if (coef.size() == 1) return acc;
    double cm1 = 1.0, cn = 2.0 * alpha * t;
    acc += coef(1) * cn;
    for (long n = 2; n < coef.size(); ++n) {
        double next = (2.0 * t * (n + alpha - 1.0) * cn - (n + 2.0 * alpha - 2.0) * cm1) / n;
        cm1 = cn;
        cn = next;
        acc += coef(n) * cn;
    }
    return acc;
}

Eigen::VectorXd build_so3_coef(double nu, double kappa, int l_max) {
    const bool se = std::isinf(nu);
    const double a = se ? 0.0 : 2.0 * nu / (kappa * kappa);
    const double p = se ? 0.0 : nu + 1.5;
    std::vector<double> coef;
    double diag = 0.0;
    for (int l = 0; l <= l_max; ++l) {
        double lambda = double(l) * (l + 1.0);
        double weight = se ? std::exp(-0.5 * kappa * kappa * lambda) : std::pow(a + lambda, -p);
        double dim = 2.0 * l + 1.0;
        coef.push_back(weight * dim);
        double bound = dim * dim * weight;
        diag += bound;
        if (l >= 5 && bound < 1e-10 * diag) break;
    }
    return Eigen::Map<Eigen::VectorXd>(coef.data(), static_cast<long>(coef.size()));
}

double eval_so3_table(const Eigen::VectorXd& coef, double theta) {
    double acc = 0.0;
    for (long l = 0; l < coef.size(); ++l)
        acc += coef(l) * spectral::so3_character(static_cast<int>(l), theta);
    return acc;
}

// Log-domain trapezoid nodes of matern_from_heat, with the constant
// h * exp(p t - e^t) * a^-p pre-multiplied into the weights.
void build_matern_nodes(double nu, double kappa, double p, int nodes, Eigen::VectorXd& kh,
                        Eigen::VectorXd& w) {
    double a = 2.0 * nu / (kappa * kappa);
    double t_lo = -30.0;
    double t_hi = std::log(40.0 + 10.0 * p);
    double h = (t_hi - t_lo) / (nodes - 1);
    kh.resize(nodes);
    w.resize(nodes);
    for (int i = 0; i < nodes; ++i) {
        double t = t_lo + i * h;
        double wu = std::exp(t);
        kh(i) = std::sqrt(2.0 * wu / a);
        double trap = (i == 0 || i == nodes - 1) ? 0.5 : 1.0;
        w(i) = trap * h * std::exp(p * t - wu) * std::pow(a, -p);
    }
}

} // namespace

KernelEvaluator::KernelEvaluator(const KernelSpec& spec, Space space, int dim)
    : spec_(spec), space_(space), dim_(dim) {
    if (spec_.kappa <= 0 || spec_.sigma2 <= 0 || !(spec_.nu > 0))
        throw std::invalid_argument("KernelSpec: kappa, sigma2, nu must be positive");
    auto tb = std::make_shared<detail::EvalTables>();
    const double nu = spec_.effective_nu();
    const TruncationConfig& tr = spec_.trunc;

    switch (spec_.family) {
        case KernelFamily::EuclideanMatern:
        case KernelFamily::EuclideanSe:
        case KernelFamily::NaiveGeodesicSe:
            tables_ = tb;
            return;
        case KernelFamily::CholeskyEuclidean:
            if (space_ != Space::Spd || dim_ != 2)
                throw std::invalid_argument("cholesky_euclidean kernel: only SPD(2)");
            tables_ = tb;
            return;
        case KernelFamily::Product: {
            if (space_ != Space::Spd || dim_ != 2)
                throw std::invalid_argument("product kernel: only SPD(2) supported here");
            tb->k_eig = spec_.factor_kappas.empty() ? spec_.kappa : spec_.factor_kappas[0];
            double k_ang = spec_.factor_kappas.size() > 1 ? spec_.factor_kappas[1] : spec_.kappa;
            build_torus_table(nu, k_ang, 0, 1, tb->angle_freq, tb->angle_w, tb->angle_wrapped,
                              tb->angle_inv2k2);
            double diag = eval_torus_table(tb->angle_freq, tb->angle_w, tb->angle_wrapped,
                                           tb->angle_inv2k2, Eigen::VectorXd::Zero(1));
            tb->angle_w /= diag; // unit-variance factor
            tables_ = tb;
            return;
        }
        case KernelFamily::RiemannianMatern:
        case KernelFamily::RiemannianSe: break;
    }

    switch (space_) {
        case Space::Euclidean: break; // closed forms
        case Space::Sphere: {
            if (dim_ < 2)
                throw std::invalid_argument(
                    "riemannian kernel: sphere needs d >= 2 (use torus for S^1)");
            tb->alpha = 0.5 * (dim_ - 1);
            tb->sphere_coef = build_sphere_coef(nu, spec_.kappa, dim_, tr.sphere_n);
            double diag = eval_sphere_table(tb->sphere_coef, tb->alpha, 1.0);
            tb->sphere_coef *= spec_.sigma2 / diag;
            break;
        }
        case Space::Torus: {
            build_torus_table(nu, spec_.kappa, tr.torus_l, dim_, tb->torus_freq, tb->torus_w,
                              tb->torus_wrapped, tb->torus_inv2k2);
            double diag = eval_torus_table(tb->torus_freq, tb->torus_w, tb->torus_wrapped,
                                           tb->torus_inv2k2, Eigen::VectorXd::Zero(dim_));
            tb->torus_w *= spec_.sigma2 / diag;
            break;
        }
        case Space::Rotation: {
            if (dim_ != 3)
                throw std::invalid_argument("riemannian kernel: rotation group only for d = 3");
            tb->so3_coef = build_so3_coef(nu, spec_.kappa, tr.so3_l);
            double diag = eval_so3_table(tb->so3_coef, 0.0);
            tb->so3_coef *= spec_.sigma2 / diag;
            break;
        }
        case Space::Hyperbolic: {
            if (dim_ < 2 || dim_ > 5)
                throw std::invalid_argument("riemannian kernel: hyperbolic d in {2,3,4,5}");
            if (std::isinf(nu)) {
                tb->scale =
                    spec_.sigma2 / heat_hyperbolic_rho(0.0, dim_, spec_.kappa, tr.line_quad);
            } else {
                build_matern_nodes(nu, spec_.kappa, nu, tr.matern_quad_nodes, tb->mq_kh, tb->mq_w);
                double diag = 0.0;
                for (long i = 0; i < tb->mq_kh.size(); ++i)
                    diag += tb->mq_w(i) * heat_hyperbolic_rho(0.0, dim_, tb->mq_kh(i), tr.line_quad);
                tb->mq_w *= spec_.sigma2 / diag;
            }
            break;
        }
        case Space::Spd: {
            if (dim_ != 2)
                throw std::invalid_argument("riemannian kernel: SPD only for d = 2");
            if (std::isinf(nu)) {
                tb->scale = spec_.sigma2 / heat_spd2_h(0.0, 0.0, spec_.kappa, tr.line_quad);
            } else {
                build_matern_nodes(nu, spec_.kappa, nu, tr.matern_quad_nodes, tb->mq_kh, tb->mq_w);
                double diag = 0.0;
                for (long i = 0; i < tb->mq_kh.size(); ++i)
                    diag += tb->mq_w(i) * heat_spd2_h(0.0, 0.0, tb->mq_kh(i), tr.line_quad);
                tb->mq_w *= spec_.sigma2 / diag;
            }
            break;
        }
    }
    tables_ = tb;
}

double KernelEvaluator::from_feature(const PairFeature& f) const {
    const detail::EvalTables& tb = *tables_;
    const double nu = spec_.effective_nu();
    switch (spec_.family) {
        case KernelFamily::EuclideanMatern:
        case KernelFamily::EuclideanSe:
        case KernelFamily::CholeskyEuclidean:
            return spec_.sigma2 * euclidean_matern(f.a, nu, spec_.kappa);
        case KernelFamily::NaiveGeodesicSe:
            return spec_.sigma2 * std::exp(-f.a * f.a / spec_.kappa);
        case KernelFamily::Product: {
            Eigen::VectorXd db(1);
            db(0) = f.b;
            double angle =
                eval_torus_table(tb.angle_freq, tb.angle_w, tb.angle_wrapped, tb.angle_inv2k2, db);
            return spec_.sigma2 * euclidean_matern(f.a, nu, tb.k_eig) * angle;
        }
        case KernelFamily::RiemannianMatern:
        case KernelFamily::RiemannianSe: break;
    }
    switch (space_) {
        case Space::Euclidean: return spec_.sigma2 * euclidean_matern(f.a, nu, spec_.kappa);
        case Space::Sphere: return eval_sphere_table(tb.sphere_coef, tb.alpha, f.a);
        case Space::Torus:
            return eval_torus_table(tb.torus_freq, tb.torus_w, tb.torus_wrapped, tb.torus_inv2k2,
                                    f.delta);
        case Space::Rotation: return eval_so3_table(tb.so3_coef, f.a);
        case Space::Hyperbolic: {
            if (std::isinf(nu))
                return tb.scale * heat_hyperbolic_rho(f.a, dim_, spec_.kappa, spec_.trunc.line_quad);
            double acc = 0.0;
            for (long i = 0; i < tb.mq_kh.size(); ++i)
                acc += tb.mq_w(i) * heat_hyperbolic_rho(f.a, dim_, tb.mq_kh(i), spec_.trunc.line_quad);
            return acc;
        }
        case Space::Spd: {
            if (std::isinf(nu))
                return tb.scale * heat_spd2_h(f.a, f.b, spec_.kappa, spec_.trunc.line_quad);
            double acc = 0.0;
            for (long i = 0; i < tb.mq_kh.size(); ++i)
                acc += tb.mq_w(i) * heat_spd2_h(f.a, f.b, tb.mq_kh(i), spec_.trunc.line_quad);
            return acc;
        }
    }
    throw std::logic_error("KernelEvaluator::from_feature: unreachable");
}

double KernelEvaluator::operator()(const Point& x, const Point& y) const {
    if (x.space() != space_ || x.dim() != dim_)
        throw std::invalid_argument("KernelEvaluator: point on a different manifold");
    return from_feature(pair_feature(spec_, x, y));
}

double kernel_eval(const KernelSpec& spec, const Point& x, const Point& y) {
    if (!x.same_manifold(y)) throw std::invalid_argument("kernel_eval: mismatched manifolds");
    KernelEvaluator ev(spec, x.space(), x.dim());
    return ev(x, y);
}

// Unnormalized diagonal of the spec, evaluated through the reference
// (non-table) code path and cached.
namespace {

struct NormKey {
    int family, space, dim;
    double nu, kappa;
    int torus_l, sphere_n, so3_l, nodes;
    double tol;

    bool operator<(const NormKey& o) const {
        auto t = [](const NormKey& k) {
            return std::tie(k.family, k.space, k.dim, k.nu, k.kappa, k.torus_l, k.sphere_n,
                            k.so3_l, k.nodes, k.tol);
        };
        return t(*this) < t(o);
    }
};

double unnormalized_diagonal(const KernelSpec& spec, Space space, int dim) {
    double nu = spec.effective_nu();
    const TruncationConfig& tr = spec.trunc;
    switch (space) {
        case Space::Euclidean: return 1.0;
        case Space::Sphere:
            return std::isinf(nu) ? heat_sphere_cos(1.0, dim, spec.kappa, tr.sphere_n)
                                  : matern_sphere_cos(1.0, dim, nu, spec.kappa, tr.sphere_n);
        case Space::Torus: {
            Eigen::VectorXd zero = Eigen::VectorXd::Zero(dim);
            int l = tr.torus_l > 0 ? tr.torus_l
                                   : (std::isinf(nu) ? torus_auto_l(spec.kappa)
                                                     : matern_torus_auto_l(nu, spec.kappa, dim));
            return std::isinf(nu) ? heat_torus_delta(zero, spec.kappa, l)
                                  : matern_torus_delta(zero, nu, spec.kappa, l);
        }
        case Space::Rotation:
            return std::isinf(nu) ? heat_so3_angle(0.0, spec.kappa, tr.so3_l)
                                  : matern_so3_angle(0.0, nu, spec.kappa, tr.so3_l);
        case Space::Hyperbolic:
            if (std::isinf(nu)) return heat_hyperbolic_rho(0.0, dim, spec.kappa, tr.line_quad);
            return matern_from_heat(
                [&](double kh) { return heat_hyperbolic_rho(0.0, dim, kh, tr.line_quad); }, nu,
                spec.kappa, nu, tr.matern_quad_nodes);
        case Space::Spd:
            if (std::isinf(nu)) return heat_spd2_h(0.0, 0.0, spec.kappa, tr.line_quad);
            return matern_from_heat(
                [&](double kh) { return heat_spd2_h(0.0, 0.0, kh, tr.line_quad); }, nu,
                spec.kappa, nu, tr.matern_quad_nodes);
    }
    throw std::logic_error("unnormalized_diagonal: unreachable");
}

} // namespace

double normalization_constant(const KernelSpec& spec, const Manifold& m) {
    bool riem = spec.family == KernelFamily::RiemannianMatern ||
                spec.family == KernelFamily::RiemannianSe;
    if (!riem || m.space == Space::Euclidean) return 1.0; // closed forms are normalized

    NormKey key{static_cast<int>(spec.family),
                static_cast<int>(m.space),
                m.dim,
                spec.effective_nu(),
                spec.kappa,
                spec.trunc.torus_l,
                spec.trunc.sphere_n,
                spec.trunc.so3_l,
                spec.trunc.matern_quad_nodes,
                spec.trunc.line_quad.abs_tol};
    static std::mutex mtx;
    static std::map<NormKey, double> cache;
    {
        std::lock_guard<std::mutex> lock(mtx);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    double c = unnormalized_diagonal(spec, m.space, m.dim);
    if (!(c > 0.0) || !std::isfinite(c))
        throw std::runtime_error("normalization_constant: diagonal not positive finite");
    std::lock_guard<std::mutex> lock(mtx);
    cache.emplace(key, c);
    return c;
}

double product_kernel(const std::vector<KernelSpec>& factors, const std::vector<Point>& xs,
                      const std::vector<Point>& ys, double sigma2) {
    if (factors.size() != xs.size() || factors.size() != ys.size() || factors.empty())
        throw std::invalid_argument("product_kernel: factor count mismatch");
    double acc = sigma2;
    for (std::size_t j = 0; j < factors.size(); ++j) {
        KernelSpec unit = factors[j];
        unit.sigma2 = 1.0;
        acc *= kernel_eval(unit, xs[j], ys[j]);
    }
    return acc;
}

// -------------------------------------------------------------------- Gram

namespace {

Eigen::MatrixXd gram_impl(const KernelSpec& spec, const std::vector<Point>& points,
                          GramInfo* info, bool parallel) {
    if (points.empty()) throw std::invalid_argument("gram: need at least one point");
    const int n = static_cast<int>(points.size());
    KernelEvaluator ev(spec, points[0].space(), points[0].dim());
    Eigen::MatrixXd k(n, n);
#pragma omp parallel for schedule(dynamic) if (parallel && n > 8)
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            double v = ev(points[i], points[j]);
            k(i, j) = v;
            k(j, i) = v;
        }
    }
    if (info) {
        info->min_eigenvalue_computed = spec.family == KernelFamily::NaiveGeodesicSe;
        if (info->min_eigenvalue_computed) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k, Eigen::EigenvaluesOnly);
            info->min_eigenvalue = es.eigenvalues().minCoeff();
        }
    }
    return k;
}

} // namespace

Eigen::MatrixXd gram(const KernelSpec& spec, const std::vector<Point>& points, GramInfo* info) {
    return gram_impl(spec, points, info, true);
}

Eigen::MatrixXd gram_serial(const KernelSpec& spec, const std::vector<Point>& points,
                            GramInfo* info) {
    return gram_impl(spec, points, info, false);
}

} // namespace geobo
