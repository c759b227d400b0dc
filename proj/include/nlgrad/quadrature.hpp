#ifndef NLGRAD_QUADRATURE_HPP
#define NLGRAD_QUADRATURE_HPP

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nlgrad {

struct QuadratureSpec {
    double rel_tol = 1e-10;
    double abs_tol = 1e-14;
    std::size_t max_subdivisions = std::size_t(1) << 15;
    int gauss_points = 16;
};

enum class QuadStatus { converged, diverged, max_subdivisions };

struct IntegralResult {
    double value = 0.0;
    double error = 0.0;
    QuadStatus status = QuadStatus::converged;

    bool ok() const { return status == QuadStatus::converged; }
    // Value of a convergent integral; throws on a divergence verdict.
    double require() const {
        if (status == QuadStatus::diverged)
            throw std::runtime_error("quadrature: integral diverges");
        return value;
    }
};

using Integrand = std::function<double(double)>;

// Adaptive Gauss-Kronrod (7-15) on [a, b] for integrands smooth up to the endpoints.
IntegralResult integrate_adaptive(const Integrand& f, double a, double b,
                                  const QuadratureSpec& spec = {});

// Integral over (a, b]. When singular_at_a, panels grade geometrically toward a
// and the tail toward the singularity is summed with ratio extrapolation; a
// non-decaying panel sequence yields a divergence verdict instead of a value.
IntegralResult integrate_graded(const Integrand& f, double a, double b,
                                bool singular_at_a, const QuadratureSpec& spec = {});

enum class OscPhase { sin_phase, cos_phase };

// Integral of g(r) * phase(2*pi*k*r) over (0, L]. The half-period lattice
// {j/(2k)} splits (0, L] into alternating panels integrated by fixed
// Gauss-Legendre; the first panel grades toward 0 when singular_origin.
// If the panel cap truncates the sum, the tail is telescoped by pairwise
// averaging of the partial sums (depth 3).
IntegralResult integrate_oscillatory(const Integrand& g, double k, OscPhase phase,
                                     bool singular_origin, double L,
                                     const QuadratureSpec& spec = {});

// Bessel function of the first kind, nu in {1/2, 1, 3/2}. Half-integer orders
// use closed forms (series near 0); nu = 1 uses minimax rational approximations
// for x <= 8 and the Hankel asymptotic expansion beyond.
double bessel_j(double nu, double x);

// Gauss-Legendre nodes/weights on [-1, 1], cached per order.
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
const GaussRule& gauss_legendre(int npoints);

} // namespace nlgrad

#endif
