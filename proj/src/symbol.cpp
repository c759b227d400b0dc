#include "nlgrad/symbol.hpp"
#include "nlgrad/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace nlgrad {

SpectralSymbol::SpectralSymbol(std::vector<double> k_samples, std::vector<double> qhat,
                               SymbolMethod method, std::string kernel_label)
    : k_(std::move(k_samples)), q_(std::move(qhat)), method_(method),
      label_(std::move(kernel_label)) {
    if (k_.size() != q_.size() || k_.size() < 2)
        throw std::invalid_argument("SpectralSymbol: mismatched samples");
    std::vector<double> hx, hy;
    for (std::size_t i = 0; i < k_.size(); ++i) {
        if (k_[i] >= 1.0) {
            hx.push_back(std::log(k_[i]));
            hy.push_back(q_[i]);
        } else {
            low_k_.push_back(k_[i]);
            low_q_.push_back(q_[i]);
        }
    }
    if (hx.size() >= 2) log_interp_ = PchipInterpolant(hx, hy);
    if (!low_k_.empty() && hx.size() >= 1) {
        // bridge point so the linear part reaches the log part continuously
        high_start_ = std::exp(hx.front());
        low_k_.push_back(high_start_);
        low_q_.push_back(hy.front());
    }
}

double SpectralSymbol::value(double k) const {
    if (k < 0) k = -k;
    if (k >= high_start_ || low_k_.empty()) {
        double lk = std::log(std::max(k, high_start_));
        return log_interp_(lk);
    }
    auto it = std::upper_bound(low_k_.begin(), low_k_.end(), k);
    if (it == low_k_.begin()) return low_q_.front();
    if (it == low_k_.end()) return low_q_.back();
    std::size_t hi = it - low_k_.begin(), lo = hi - 1;
    double t = (k - low_k_[lo]) / (low_k_[hi] - low_k_[lo]);
    return (1 - t) * low_q_[lo] + t * low_q_[hi];
}

double qhat_zero(const RadialKernel& kernel, const QuadratureSpec& spec) {
    auto mass = [&](double t) { return kernel(t) * std::pow(t, kernel.n - 1); };
    double m = integrate_graded(mass, 0.0, kernel.delta, true, spec).require();
    return sphere_area(kernel.n) / kernel.n * m;
}

namespace {

// S(kappa) = int_0^delta f_rho(r) sin(2 pi kappa r) dr.
double sine_transform(const RadialKernel& kernel, double kappa, const QuadratureSpec& spec) {
    auto f = [&](double r) { return std::pow(r, kernel.n - 2) * kernel(r); };
    return integrate_oscillatory(f, kappa, OscPhase::sin_phase, true, kernel.delta, spec)
        .require();
}

} // namespace

double qhat_sine(const RadialKernel& kernel, double k, const QuadratureSpec& spec) {
    if (!(k > 0)) throw std::invalid_argument("qhat_sine: k must be positive");
    const int n = kernel.n;
    if (n == 1) return sine_transform(kernel, k, spec) / (M_PI * k);

    // Outer sphere integral; panels sized so Gauss-Legendre resolves the
    // oscillation of the inner transform in the outer variable.
    const GaussRule& rule = gauss_legendre(16);
    int panels = static_cast<int>(std::ceil(k * kernel.delta / 2.0)) + 8;
    double acc = 0.0;
    if (n == 2) {
        // int_{S^1_+} z1 S(k z1) dH = 2 int_0^{pi/2} cos(th) S(k cos th) dth
        const double width = (M_PI / 2) / panels;
        std::vector<double> partial(static_cast<std::size_t>(panels), 0.0);
        parallel_for(static_cast<std::size_t>(panels), [&](std::size_t p) {
            double a = p * width, c = a + width / 2, h = width / 2;
            double sum = 0.0;
            for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
                double th = c + h * rule.nodes[i];
                double z1 = std::cos(th);
                if (z1 <= 0) continue;
                sum += rule.weights[i] * z1 * sine_transform(kernel, k * z1, spec);
            }
            partial[p] = sum * h;
        });
        for (double v : partial) acc += v;
        acc *= 2.0;
    } else {
        // int_{S^2_+} z1 S(k z1) dH = 2 pi int_0^1 z1 S(k z1) dz1
        const double width = 1.0 / panels;
        std::vector<double> partial(static_cast<std::size_t>(panels), 0.0);
        parallel_for(static_cast<std::size_t>(panels), [&](std::size_t p) {
            double a = p * width, c = a + width / 2, h = width / 2;
            double sum = 0.0;
            for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
                double z1 = c + h * rule.nodes[i];
                if (z1 <= 0) continue;
                sum += rule.weights[i] * z1 * sine_transform(kernel, k * z1, spec);
            }
            partial[p] = sum * h;
        });
        for (double v : partial) acc += v;
        acc *= 2.0 * M_PI;
    }
    return acc / (M_PI * k);
}

double qhat_bessel(const RadialKernel& kernel, double k, const QuadratureSpec& spec) {
    if (!(k > 0)) throw std::invalid_argument("qhat_bessel: k must be positive");
    const int n = kernel.n;
    const double nu = n / 2.0;
    const double two_pi_k = 2.0 * M_PI * k;
    auto integrand = [&](double t) {
        return kernel(t) * std::pow(t, nu - 1.0) * bessel_j(nu, two_pi_k * t);
    };

    // Panels split at the asymptotic Bessel zero lattice pi(m + n/4 - 1/4)/(2 pi k).
    const double L = kernel.delta;
    auto zero_at = [&](int m) { return (m + n / 4.0 - 0.25) / (2.0 * k); };
    double t1 = std::min(zero_at(1), L);
    double total = integrate_graded(integrand, 0.0, t1, true, spec).require();
    if (t1 < L) {
        const GaussRule& rule = gauss_legendre(spec.gauss_points);
        for (int m = 1;; ++m) {
            double a = zero_at(m);
            if (a >= L) break;
            double b = std::min(zero_at(m + 1), L);
            double c = 0.5 * (a + b), h = 0.5 * (b - a);
            double sum = 0.0;
            for (std::size_t i = 0; i < rule.nodes.size(); ++i)
                sum += rule.weights[i] * integrand(c + h * rule.nodes[i]);
            total += sum * h;
        }
    }
    return total / std::pow(k, nu);
}

std::vector<std::complex<double>> lambda_multiplier(const RadialKernel& kernel,
                                                    const std::vector<double>& xi,
                                                    const SpectralSymbol& symbol) {
    if (xi.size() != static_cast<std::size_t>(kernel.n))
        throw std::invalid_argument("lambda_multiplier: xi dimension mismatch");
    double mag = 0.0;
    for (double c : xi) mag += c * c;
    mag = std::sqrt(mag);
    std::vector<std::complex<double>> out(xi.size(), {0.0, 0.0});
    if (mag == 0.0) return out;
    double q = symbol.value(mag);
    for (std::size_t d = 0; d < xi.size(); ++d)
        out[d] = std::complex<double>(0.0, 2.0 * M_PI * xi[d] * q);
    return out;
}

std::vector<double> default_k_grid(double k_max, int samples) {
    std::vector<double> ks;
    ks.push_back(0.0);
    const double k_lo = 1e-2;
    for (int i = 0; i < samples; ++i)
        ks.push_back(k_lo * std::pow(k_max / k_lo, static_cast<double>(i) / (samples - 1)));
    ks.back() = k_max;
    return ks;
}

SpectralSymbol tabulate_symbol(const RadialKernel& kernel, const std::vector<double>& k_grid,
                               SymbolMethod method, const QuadratureSpec& spec) {
    std::vector<double> q(k_grid.size());
    parallel_for(k_grid.size(), [&](std::size_t i) {
        double k = k_grid[i];
        if (k == 0.0) {
            q[i] = qhat_zero(kernel, spec);
        } else {
            q[i] = (method == SymbolMethod::bessel) ? qhat_bessel(kernel, k, spec)
                                                    : qhat_sine(kernel, k, spec);
        }
    });
    return SpectralSymbol(k_grid, q, method, kernel.label);
}

BoundReport bound_report(const SpectralSymbol& symbol, const RadialKernel& kernel,
                         double k_min, double k_max, int samples) {
    BoundReport rep;
    rep.k_min = k_min;
    rep.k_max = k_max;
    if (!(k_min < k_max) || samples < 2) return rep;
    rep.empty = false;
    rep.lower_ratio = std::numeric_limits<double>::infinity();
    rep.lower_k2 = std::numeric_limits<double>::infinity();

    for (int i = 0; i < samples; ++i) {
        double k = k_min * std::pow(k_max / k_min, static_cast<double>(i) / (samples - 1));
        double q = symbol.value(k);
        double envelope = kernel(1.0 / k) / std::pow(k, kernel.n);
        if (envelope > 0) {
            double ratio = q / envelope;
            rep.lower_ratio = std::min(rep.lower_ratio, ratio);
            rep.upper_ratio = std::max(rep.upper_ratio, ratio);
        }
        rep.lower_k2 = std::min(rep.lower_k2, q * k * k);

        // central differences of qhat in k, step 1e-3 k
        double h = 1e-3 * k;
        double qp = symbol.value(k + h), qm = symbol.value(k - h);
        double d1 = (qp - qm) / (2 * h);
        double d2 = (qp - 2 * q + qm) / (h * h);
        double gauge = q + 1.0 / k;
        rep.derivative_ratios[0] = std::max(rep.derivative_ratios[0], std::abs(d1) * k / gauge);
        rep.derivative_ratios[1] =
            std::max(rep.derivative_ratios[1], std::abs(d2) * k * k / gauge);
    }
    return rep;
}

ComparisonReport comparison_multiplier(const SpectralSymbol& s1, const SpectralSymbol& s2,
                                       const std::vector<double>& k_grid) {
    ComparisonReport rep;
    rep.inf_m = std::numeric_limits<double>::infinity();
    for (double k : k_grid) {
        double q2 = s2.value(std::max(k, 0.0));
        double q1 = s1.value(std::max(k, 0.0));
        if (!(q2 > 0)) throw std::runtime_error("comparison_multiplier: denominator symbol not positive");
        double m = q1 / q2;
        rep.sup_m = std::max(rep.sup_m, m);
        rep.inf_m = std::min(rep.inf_m, m);
        if (k > 0) {
            double h = 1e-3 * k;
            double mp = s1.value(k + h) / s2.value(k + h);
            double mm = s1.value(k - h) / s2.value(k - h);
            double d1 = (mp - mm) / (2 * h);
            double d2 = (mp - 2 * m + mm) / (h * h);
            rep.mihlin_ratios[0] = std::max(rep.mihlin_ratios[0], std::abs(d1) * k);
            rep.mihlin_ratios[1] = std::max(rep.mihlin_ratios[1], std::abs(d2) * k * k);
        }
    }
    return rep;
}

} // namespace nlgrad
