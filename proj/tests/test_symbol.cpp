#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "nlgrad/symbol.hpp"

#include <cmath>

using namespace nlgrad;

namespace {

RadialKernel catalog(KernelKind kind, double s, int n) {
    KernelCatalogEntry e;
    e.kind = kind;
    e.s = s;
    return make_catalog_kernel(e, n);
}

} // namespace

TEST_CASE("sine route matches a dense quadrature oracle in 1d") {
    RadialKernel k = catalog(KernelKind::indicator_riesz, 0.5, 1);
    const double freq = 1.0;
    QuadratureSpec tight;
    tight.rel_tol = 1e-13;
    // (1/(pi k)) int_0^1 r^{-1.5} sin(2 pi k r) dr, graded toward the origin
    auto weighted = [&](double r) {
        return std::pow(r, -1.5) * std::sin(2 * M_PI * freq * r);
    };
    double oracle = (integrate_graded(weighted, 0.0, 0.5 / freq, true, tight).require() +
                     integrate_adaptive(weighted, 0.5 / freq, 1.0, tight).value) /
                    (M_PI * freq);
    CHECK(qhat_sine(k, freq) == doctest::Approx(oracle).epsilon(1e-6));
}

TEST_CASE("qhat approaches the L1 norm of Q as k vanishes") {
    for (int n : {1, 2, 3}) {
        RadialKernel k = catalog(KernelKind::indicator_riesz, 0.5, n);
        double q0 = qhat_zero(k);
        double qlow = qhat_bessel(k, 1e-3 / k.delta);
        CHECK(qlow == doctest::Approx(q0).epsilon(1e-4));
    }
}

TEST_CASE("sine and bessel routes agree across the catalog") {
    for (int n : {1, 2, 3})
        for (const RadialKernel& k : default_catalog(n))
            for (double freq : {0.1, 1.0, 8.0, 47.0}) {
                double qs = qhat_sine(k, freq);
                double qb = qhat_bessel(k, freq);
                INFO(k.label, " k=", freq);
                CHECK(std::abs(qs - qb) / std::abs(qs) < 1e-5);
            }
}

TEST_CASE("qhat stays positive at every sampled frequency") {
    for (int n : {1, 2, 3})
        for (const RadialKernel& k : default_catalog(n))
            for (double freq = 0.05; freq < 300.0; freq *= 2.3) {
                INFO(k.label, " k=", freq);
                CHECK(qhat_bessel(k, freq) > 0.0);
            }
}

TEST_CASE("large-k decay exponent matches the two-sided envelope in 3d") {
    RadialKernel k = catalog(KernelKind::indicator_riesz, 0.5, 3);
    // Qhat ~ rho(1/k)/k^n = k^{s-1}: fitted slope -(1-s)
    std::vector<double> ks, qs;
    for (double freq = 40.0; freq <= 400.0; freq *= 1.3) {
        ks.push_back(std::log(freq));
        qs.push_back(std::log(qhat_bessel(k, freq)));
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < ks.size(); ++i) {
        sx += ks[i];
        sy += qs[i];
        sxx += ks[i] * ks[i];
        sxy += ks[i] * qs[i];
    }
    double slope = (ks.size() * sxy - sx * sy) / (ks.size() * sxx - sx * sx);
    CHECK(slope == doctest::Approx(-0.5).epsilon(0.04));
}

TEST_CASE("zero profile transforms to zero") {
    RadialKernel k;
    k.n = 2;
    k.delta = 1.0;
    k.epsilon = 0.5;
    k.profile = [](double) { return 0.0; };
    k.label = "zero";
    CHECK(qhat_bessel(k, 3.0) == 0.0);
}

TEST_CASE("lambda multiplier is parallel to i xi and vanishes at zero") {
    RadialKernel k = catalog(KernelKind::indicator_riesz, 0.5, 2);
    SpectralSymbol sym = tabulate_symbol(k, default_k_grid(2000.0, 200), SymbolMethod::bessel);

    auto at_zero = lambda_multiplier(k, {0.0, 0.0}, sym);
    CHECK(std::abs(at_zero[0]) == 0.0);
    CHECK(std::abs(at_zero[1]) == 0.0);

    std::vector<double> xi = {3.0, -4.0};
    auto lam = lambda_multiplier(k, xi, sym);
    // lambda = 2 pi i xi Qhat: real parts vanish, imag parts proportional to xi
    CHECK(std::abs(lam[0].real()) < 1e-12);
    CHECK(std::abs(lam[1].real()) < 1e-12);
    CHECK(lam[0].imag() * xi[1] == doctest::Approx(lam[1].imag() * xi[0]).epsilon(1e-12));

    auto big = lambda_multiplier(k, {1000.0, 0.0}, sym);
    CHECK(std::isfinite(big[0].imag()));
    CHECK(std::abs(big[0]) > 0.0);
}

TEST_CASE("bound report certifies the two-sided envelope") {
    RadialKernel k = catalog(KernelKind::indicator_riesz, 0.5, 2);
    SpectralSymbol sym = tabulate_symbol(k, default_k_grid(600.0), SymbolMethod::bessel);
    BoundReport rep = bound_report(sym, k, 2.0 / k.epsilon, 500.0);
    REQUIRE_FALSE(rep.empty);
    CHECK(rep.lower_ratio > 0.0);
    CHECK(std::isfinite(rep.upper_ratio));
    CHECK(rep.upper_ratio >= rep.lower_ratio);
    CHECK(rep.lower_k2 > 0.0);
    CHECK(rep.derivative_ratios[0] <= 100.0);
    CHECK(rep.derivative_ratios[1] <= 100.0);
}

TEST_CASE("bound report with an inverted range is empty") {
    RadialKernel k = catalog(KernelKind::indicator_riesz, 0.5, 2);
    SpectralSymbol sym = tabulate_symbol(k, default_k_grid(100.0, 50), SymbolMethod::bessel);
    BoundReport rep = bound_report(sym, k, 50.0, 10.0);
    CHECK(rep.empty);
}

TEST_CASE("comparison of a kernel with itself is the unit multiplier") {
    RadialKernel k = catalog(KernelKind::indicator_riesz, 0.5, 1);
    SpectralSymbol sym = tabulate_symbol(k, default_k_grid(200.0, 100), SymbolMethod::bessel);
    std::vector<double> grid;
    for (double freq = 0.1; freq <= 100.0; freq *= 1.7) grid.push_back(freq);
    ComparisonReport rep = comparison_multiplier(sym, sym, grid);
    CHECK(rep.sup_m == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.inf_m == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.mihlin_ratios[0] == doctest::Approx(0.0));
    CHECK(rep.mihlin_ratios[1] == doctest::Approx(0.0));
}

TEST_CASE("comparison multiplier is one-sided for the log-enhanced pair") {
    RadialKernel ind = catalog(KernelKind::indicator_riesz, 0.5, 1);
    RadialKernel le = catalog(KernelKind::log_enhanced, 0.5, 1);
    auto kgrid = default_k_grid(1000.0, 220);
    SpectralSymbol s_ind = tabulate_symbol(ind, kgrid, SymbolMethod::bessel);
    SpectralSymbol s_le = tabulate_symbol(le, kgrid, SymbolMethod::bessel);

    std::vector<double> probe;
    for (double freq = 0.1; freq <= 1000.0; freq *= 1.2) probe.push_back(freq);

    // rho1 = indicator, rho2 = log_enhanced: liminf rho2/rho1 = infinity > 0,
    // so the multiplier stays bounded
    ComparisonReport fwd = comparison_multiplier(s_ind, s_le, probe);
    CHECK(std::isfinite(fwd.sup_m));
    CHECK(fwd.sup_m < 2.0);

    // the reverse direction grows like log k and exceeds 10 by k = 1e3
    ComparisonReport rev = comparison_multiplier(s_le, s_ind, probe);
    CHECK(rev.sup_m > 10.0);
}
