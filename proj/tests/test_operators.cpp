#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "nlgrad/operators.hpp"
#include "nlgrad/symbol.hpp"

#include <cmath>
#include <random>

using namespace nlgrad;

namespace {

RadialKernel catalog(KernelKind kind, double s, int n) {
    KernelCatalogEntry e;
    e.kind = kind;
    e.s = s;
    return make_catalog_kernel(e, n);
}

GridSpec box_spec(int n, double half_extent, double h) {
    GridSpec s;
    s.n = n;
    s.spacing = h;
    std::size_t pts = static_cast<std::size_t>(std::llround(2 * half_extent / h)) + 1;
    for (int d = 0; d < n; ++d) {
        s.shape[d] = pts;
        s.origin[d] = -half_extent;
    }
    return s;
}

double rel_l2_diff(const GridVectorField& a, const GridVectorField& b) {
    double num = 0, den = 0;
    for (int d = 0; d < a.spec.n; ++d)
        for (std::size_t i = 0; i < a.spec.size(); ++i) {
            double r = a.components[d].data[i] - b.components[d].data[i];
            num += r * r;
            den += b.components[d].data[i] * b.components[d].data[i];
        }
    return std::sqrt(num / den);
}

} // namespace

TEST_CASE("constant region maps to zero in its interior") {
    RadialKernel k = catalog(KernelKind::indicator_riesz, 0.5, 1);
    GridSpec spec = box_spec(1, 4.0, 1.0 / 32);
    GridField u(spec);
    for (double& v : u.data) v = 3.25;  // constant across the whole grid
    GridVectorField g = gradient_direct(k, u);
    // at points with the full horizon inside the constant region the
    // difference quotients vanish identically
    std::size_t mid = spec.shape[0] / 2;
    std::size_t reach = static_cast<std::size_t>(k.delta / spec.spacing) + 3;
    for (std::size_t i = mid - 8; i <= mid + 8; ++i) {
        REQUIRE(i > reach);
        CHECK(std::abs(g.components[0].data[i]) < 1e-12);
    }
}

TEST_CASE("odd field has a positive first component at the origin") {
    RadialKernel k = catalog(KernelKind::indicator_riesz, 0.5, 1);
    GridSpec spec = box_spec(1, 2.0, 1.0 / 64);
    GridField plus = make_bump(spec, {0.4, 0, 0}, 0.25, 1.0);
    GridField minus = make_bump(spec, {-0.4, 0, 0}, 0.25, 1.0);
    GridField u(spec);
    for (std::size_t i = 0; i < spec.size(); ++i) u.data[i] = plus.data[i] - minus.data[i];
    GridVectorField g = gradient_direct(k, u);
    std::size_t origin = spec.shape[0] / 2;
    CHECK(g.components[0].data[origin] > 0.0);
}

TEST_CASE("1d gradient matches the continuum quadrature oracle pointwise") {
    RadialKernel k = catalog(KernelKind::indicator_riesz, 0.5, 1);
    const double h = 1.0 / 256;
    GridSpec spec = box_spec(1, 1.5, h);
    const double R = 0.25;
    GridField u = make_bump(spec, {0.0, 0, 0}, R, 1.0);
    GridVectorField g = gradient_direct(k, u);

    auto bump = [&](double x) {
        double q = x * x / (R * R);
        return q < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - q)) : 0.0;
    };
    QuadratureSpec tight;
    tight.rel_tol = 1e-12;
    double sup = 0.0;
    for (std::size_t i = 0; i < spec.size(); ++i)
        sup = std::max(sup, std::abs(g.components[0].data[i]));

    for (int probe = 0; probe < 16; ++probe) {
        double x = -0.28 + probe * 0.035;  // avoid the symmetric zero at 0... probes straddle it
        if (std::abs(x) < 0.02) continue;
        std::size_t idx = static_cast<std::size_t>(std::llround((x - spec.origin[0]) / h));
        double xg = spec.coord(0, idx);
        double oracle =
            integrate_graded(
                [&](double t) { return (bump(xg + t) - bump(xg - t)) * k(t) / t; }, 0.0,
                k.delta, true, tight)
                .require();
        CHECK(std::abs(g.components[0].data[idx] - oracle) < 1e-3 * std::max(std::abs(oracle), 0.05 * sup));
    }
}

TEST_CASE("divergence of (u, 0) matches the first gradient component") {
    RadialKernel k = catalog(KernelKind::indicator_riesz, 0.5, 2);
    GridSpec spec = box_spec(2, 1.6, 1.0 / 32);
    GridField u = make_bump(spec, {0.0, 0.0, 0}, 0.3, 1.0);
    StencilCache st = build_stencil(k, spec.spacing);
    GridVectorField g = gradient_direct(st, u);
    GridVectorField phi(spec);
    phi.components[0] = u;
    GridField div = divergence_direct(st, phi);
    double num = 0, den = 0;
    for (std::size_t i = 0; i < spec.size(); ++i) {
        double r = div.data[i] - g.components[0].data[i];
        num += r * r;
        den += g.components[0].data[i] * g.components[0].data[i];
    }
    CHECK(std::sqrt(num / den) < 1e-12);
}

TEST_CASE("constant vector field has zero divergence in the interior") {
    RadialKernel k = catalog(KernelKind::indicator_riesz, 0.5, 2);
    GridSpec spec = box_spec(2, 2.0, 1.0 / 16);
    GridVectorField phi(spec);
    for (int d = 0; d < 2; ++d)
        for (double& v : phi.components[d].data) v = 1.0 + d;
    GridField div = divergence_direct(k, phi);
    std::size_t mid = spec.shape[0] / 2;
    CHECK(std::abs(div.at(mid, mid)) < 1e-12);
}

TEST_CASE("fft route agrees with the direct route") {
    for (int n : {1, 2}) {
        const double h = n == 1 ? 1.0 / 256 : 1.0 / 128;
        RadialKernel k = catalog(KernelKind::indicator_riesz, 0.5, n);
        GridSpec spec = box_spec(n, 0.25 + k.delta + 10 * h, h);
        GridField u = make_bump(spec, {0, 0, 0}, 0.25, 1.0);
        PotentialTable table(k, make_potential_radii(k, h / 4));
        GridVectorField direct = gradient_direct(k, u);
        GridVectorField fft = gradient_fft(k, table, u);
        INFO("n=", n);
        CHECK(rel_l2_diff(fft, direct) < (n == 1 ? 1e-3 : 2e-3));
    }
}

TEST_CASE("fft route of the zero field is zero") {
    RadialKernel k = catalog(KernelKind::indicator_riesz, 0.5, 1);
    GridSpec spec = box_spec(1, 2.0, 1.0 / 64);
    GridField u(spec);
    PotentialTable table(k, make_potential_radii(k, spec.spacing / 4));
    GridVectorField g = gradient_fft(k, table, u);
    for (double v : g.components[0].data) CHECK(v == 0.0);
}

TEST_CASE("per-mode transfer matches the continuum symbol on heavy modes") {
    RadialKernel k = catalog(KernelKind::indicator_riesz, 0.5, 1);
    const double h = 1.0 / 256;
    GridSpec spec = box_spec(1, 1.5, h);
    GridField u = make_bump(spec, {0, 0, 0}, 0.25, 1.0);
    PotentialTable table(k, make_potential_radii(k, h / 4));
    PaddedPlan plan = make_padded_plan(k, table, spec);
    GridVectorField g = gradient_fft(plan, u);

    std::vector<cplx> uhat, ghat;
    embed_padded(plan, u, uhat);
    Fft::forward(uhat, plan.shape);
    embed_padded(plan, g.components[0], ghat);
    Fft::forward(ghat, plan.shape);

    SpectralSymbol sym = tabulate_symbol(k, default_k_grid(600.0), SymbolMethod::bessel);

    double total_mass = 0.0;
    for (const cplx& c : uhat) total_mass += std::norm(c);
    const std::size_t N = plan.shape[0];
    for (std::size_t m = 1; m < N; ++m) {
        if (2 * m == N) continue;
        if (std::norm(uhat[m]) < 1e-6 * total_mass) continue;
        double xi = fft_frequency(m, N, h);
        cplx predicted = cplx{0.0, 2 * M_PI * xi * sym.value(std::abs(xi))} * uhat[m];
        cplx ratio = ghat[m] / predicted;
        CHECK(std::abs(ratio - 1.0) < 1e-2);
    }
}

TEST_CASE("integration by parts telescopes to roundoff") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> pos(-0.25, 0.25);
    for (int n : {1, 2}) {
        RadialKernel k = catalog(KernelKind::indicator_riesz, 0.5, n);
        GridSpec spec = box_spec(n, 1.8, 1.0 / (n == 1 ? 128 : 48));
        for (int trial = 0; trial < 3; ++trial) {
            GridField u = make_bump(spec, {pos(rng), pos(rng), 0}, 0.3, 1.0);
            GridVectorField phi(spec);
            for (int d = 0; d < n; ++d)
                phi.components[d] = make_bump(spec, {pos(rng), pos(rng), 0}, 0.35, 0.7 + d);
            CHECK(check_ibp(k, u, phi) < 1e-6);
        }
    }
}

TEST_CASE("integration by parts with phi equal to the gradient itself") {
    RadialKernel k = catalog(KernelKind::indicator_riesz, 0.5, 1);
    GridSpec spec = box_spec(1, 2.5, 1.0 / 128);
    GridField u = make_bump(spec, {0, 0, 0}, 0.3, 1.0);
    GridVectorField g = gradient_direct(k, u);
    // the gradient spills delta beyond supp u but stays well inside this grid
    CHECK(check_ibp(k, u, g) < 1e-6);
}

TEST_CASE("leibniz rule holds to roundoff") {
    RadialKernel k = catalog(KernelKind::indicator_riesz, 0.5, 1);
    GridSpec spec = box_spec(1, 2.0, 1.0 / 128);
    GridField g = make_bump(spec, {0.1, 0, 0}, 0.3, 1.0);

    SUBCASE("constant multiplier reduces to linearity") {
        GridField f(spec);
        for (double& v : f.data) v = 2.0;
        CHECK(leibniz_check(k, f, g) < 1e-12);
    }
    SUBCASE("overlapping bumps") {
        GridField f = make_bump(spec, {0.0, 0, 0}, 0.5, 1.0);
        CHECK(leibniz_check(k, f, g) < 1e-6);
    }
    SUBCASE("disjoint supports separated beyond the horizon leave fg empty") {
        GridSpec wide = box_spec(1, 3.4, 1.0 / 64);
        GridField ff = make_bump(wide, {-1.6, 0, 0}, 0.3, 1.0);
        GridField gg = make_bump(wide, {1.6, 0, 0}, 0.3, 1.0);
        // fg == 0, so the identity reduces to f D g + K_f(g) = 0
        StencilCache st = build_stencil(k, wide.spacing);
        GridField fg(wide);
        for (std::size_t i = 0; i < wide.size(); ++i) fg.data[i] = ff.data[i] * gg.data[i];
        CHECK(lp_norm(fg, 2.0) == 0.0);
        CHECK(leibniz_check(k, ff, gg) < 1e-6);
    }
}

TEST_CASE("mollification commutes with the gradient") {
    RadialKernel k = catalog(KernelKind::indicator_riesz, 0.5, 1);
    GridSpec spec = box_spec(1, 2.2, 1.0 / 96);
    SUBCASE("zero field") {
        GridField u(spec);
        CHECK(mollify_commute_check(k, u, 0.1) == 0.0);
    }
    SUBCASE("bump field") {
        GridField u = make_bump(spec, {0, 0, 0}, 0.3, 1.0);
        CHECK(mollify_commute_check(k, u, 0.1) < 1e-8);
    }
    SUBCASE("spike field") {
        GridField u(spec);
        u.data[spec.shape[0] / 2] = 1.0;
        CHECK(mollify_commute_check(k, u, 0.1) < 1e-6);
    }
}

TEST_CASE("carryover identity for the chi-truncation pair") {
    RadialKernel ind = catalog(KernelKind::indicator_riesz, 0.5, 1);
    RadialKernel smooth = catalog(KernelKind::smooth_riesz, 0.5, 1);
    GridSpec spec = box_spec(1, 2.2, 1.0 / 128);
    GridField u = make_bump(spec, {0, 0, 0}, 0.3, 1.0);

    CarryoverResult same = carryover_check(ind, ind, u);
    CHECK(same.comparable);
    CHECK(same.residual == 0.0);

    CarryoverResult pair = carryover_check(ind, smooth, u);
    CHECK(pair.comparable);
    CHECK(pair.residual < 1e-6);
}

TEST_CASE("carryover refuses kernels with non-integrable difference") {
    RadialKernel a = catalog(KernelKind::indicator_riesz, 0.3, 1);
    RadialKernel b = catalog(KernelKind::indicator_riesz, 0.7, 1);
    GridSpec spec = box_spec(1, 2.2, 1.0 / 64);
    GridField u = make_bump(spec, {0, 0, 0}, 0.3, 1.0);
    CarryoverResult res = carryover_check(a, b, u);
    CHECK_FALSE(res.comparable);
}

TEST_CASE("gradient is linear") {
    RadialKernel k = catalog(KernelKind::log_enhanced, 0.5, 1);
    GridSpec spec = box_spec(1, 2.0, 1.0 / 64);
    GridField u = make_bump(spec, {-0.2, 0, 0}, 0.3, 1.0);
    GridField v = make_bump(spec, {0.25, 0, 0}, 0.4, 1.0);
    const double a = 1.7, b = -0.6;
    GridField combo(spec);
    for (std::size_t i = 0; i < spec.size(); ++i)
        combo.data[i] = a * u.data[i] + b * v.data[i];
    StencilCache st = build_stencil(k, spec.spacing);
    GridVectorField gu = gradient_direct(st, u);
    GridVectorField gv = gradient_direct(st, v);
    GridVectorField gc = gradient_direct(st, combo);
    double worst = 0.0;
    for (std::size_t i = 0; i < spec.size(); ++i) {
        double expect = a * gu.components[0].data[i] + b * gv.components[0].data[i];
        worst = std::max(worst, std::abs(gc.components[0].data[i] - expect));
    }
    double scale = lp_norm(gu, std::numeric_limits<double>::infinity());
    CHECK(worst < 1e-12 * std::max(scale, 1.0));
}

TEST_CASE("translation by one cell is exact equivariance") {
    RadialKernel k = catalog(KernelKind::indicator_riesz, 0.5, 1);
    GridSpec spec = box_spec(1, 2.5, 1.0 / 64);
    GridField u = make_bump(spec, {0.0, 0, 0}, 0.3, 1.0);
    GridField shifted(spec);
    for (std::size_t i = 1; i < spec.size(); ++i) shifted.data[i] = u.data[i - 1];
    StencilCache st = build_stencil(k, spec.spacing);
    GridVectorField g = gradient_direct(st, u);
    GridVectorField gs = gradient_direct(st, shifted);
    std::size_t reach = static_cast<std::size_t>(st.reach) + 4;
    for (std::size_t i = reach; i + reach < spec.size(); ++i)
        CHECK(gs.components[0].data[i] == g.components[0].data[i - 1]);
}

TEST_CASE("sobolev control by the kernel mass") {
    RadialKernel k = catalog(KernelKind::indicator_riesz, 0.5, 2);
    GridSpec spec = box_spec(2, 1.8, 1.0 / 48);
    GridField u = make_bump(spec, {0, 0, 0}, 0.4, 1.0);
    GridVectorField g = gradient_direct(k, u);
    GridVectorField du = fd4_gradient(u);
    // C = 2 int min{1, |z|^{-1}} rho(z) dz; support radius <= 1 keeps only the
    // first piece
    double mass = sphere_area(k.n) *
                  integrate_graded([&](double t) { return k(t) * std::pow(t, k.n - 1); },
                                   0.0, k.delta, true)
                      .require();
    double bound_const = 2.0 * mass;
    for (double p : {1.0, 2.0, 4.0}) {
        double lhs = lp_norm(g, p);
        double rhs = bound_const * (lp_norm(u, p) + lp_norm(du, p));
        CHECK(lhs <= rhs);
    }
}

TEST_CASE("stencil construction guards") {
    RadialKernel k = catalog(KernelKind::indicator_riesz, 0.5, 1);
    CHECK_THROWS(build_stencil(k, 0.0));
    CHECK_THROWS(build_stencil(k, 2.0));  // spacing above the horizon
    GridSpec small = box_spec(1, 0.25, 1.0 / 32);
    GridField u(small);
    CHECK_THROWS(gradient_direct(k, u));  // horizon exceeds grid extent
}
