#ifndef NLGRAD_SYMBOL_HPP
#define NLGRAD_SYMBOL_HPP

#include "nlgrad/kernels.hpp"
#include "nlgrad/potential.hpp"

#include <array>
#include <complex>
#include <string>
#include <vector>

namespace nlgrad {

enum class SymbolMethod { sine_reduction, bessel };

// Radial tabulation of the Fourier symbol Qhat_rho, sample 0 holding the
// zero-frequency value |Q_rho|_L1. Interpolation is monotone cubic in log k
// above 1 and linear below.
class SpectralSymbol {
public:
    SpectralSymbol() = default;
    SpectralSymbol(std::vector<double> k_samples, std::vector<double> qhat,
                   SymbolMethod method, std::string kernel_label);

    const std::vector<double>& k_samples() const { return k_; }
    const std::vector<double>& qhat() const { return q_; }
    SymbolMethod method() const { return method_; }
    const std::string& kernel_label() const { return label_; }

    double value(double k) const;  // interpolated Qhat at |xi| = k

private:
    std::vector<double> k_, q_;
    SymbolMethod method_ = SymbolMethod::bessel;
    std::string label_;
    PchipInterpolant log_interp_;   // on (ln k, qhat) for k >= 1
    std::vector<double> low_k_, low_q_;  // linear part below 1
    double high_start_ = 1.0;       // first abscissa covered by the log part
};

// Qhat at k = 0 equals the L1 norm of Q_rho.
double qhat_zero(const RadialKernel& kernel, const QuadratureSpec& spec = {});

// Sine-reduction route: sphere integral of the half-line sine transform of f_rho.
double qhat_sine(const RadialKernel& kernel, double k, const QuadratureSpec& spec = {});

// Bessel route: k^{-n/2} int_0^delta rho(t) t^{n/2-1} J_{n/2}(2 pi k t) dt.
double qhat_bessel(const RadialKernel& kernel, double k, const QuadratureSpec& spec = {});

// Multiplier of the nonlocal gradient: lambda(xi) = 2 pi i xi Qhat(|xi|).
std::vector<std::complex<double>> lambda_multiplier(const RadialKernel& kernel,
                                                    const std::vector<double>& xi,
                                                    const SpectralSymbol& symbol);

// Default frequency grid: 0 plus log-spaced points in [1e-2, k_max].
std::vector<double> default_k_grid(double k_max, int samples = 400);

SpectralSymbol tabulate_symbol(const RadialKernel& kernel, const std::vector<double>& k_grid,
                               SymbolMethod method, const QuadratureSpec& spec = {});

struct BoundReport {
    double k_min = 0.0, k_max = 0.0;
    double lower_ratio = 0.0;   // inf of Qhat(k) k^n / rho(1/k)
    double upper_ratio = 0.0;   // sup of the same
    double lower_k2 = 0.0;      // inf of Qhat(k) k^2
    std::array<double, 2> derivative_ratios{0.0, 0.0};  // orders 1, 2
    bool empty = true;
};

// Two-sided envelope and finite-difference derivative-decay ratios on a
// log-spaced grid in [k_min, k_max].
BoundReport bound_report(const SpectralSymbol& symbol, const RadialKernel& kernel,
                         double k_min, double k_max, int samples = 96);

struct ComparisonReport {
    double sup_m = 0.0;
    double inf_m = 0.0;
    std::array<double, 2> mihlin_ratios{0.0, 0.0};  // sup |D^a m| k^a, orders 1, 2
};

// Ratio multiplier m = Qhat_1 / Qhat_2 on a shared k grid.
ComparisonReport comparison_multiplier(const SpectralSymbol& s1, const SpectralSymbol& s2,
                                       const std::vector<double>& k_grid);

} // namespace nlgrad

#endif
