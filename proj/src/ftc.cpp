#include "nlgrad/ftc.hpp"
#include "nlgrad/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace nlgrad {

namespace {

// Iterate the padded lattice, handing the flat index, the frequency vector,
// and the wrapped spatial coordinate to the callback. Nyquist frequencies are
// zeroed, matching the spectral-derivative convention of the gradient.
template <class F>
void for_each_mode(const PaddedPlan& plan, F&& f) {
    std::array<std::size_t, 3> sh = {1, 1, 1};
    for (int d = 0; d < plan.n; ++d) sh[d] = plan.shape[d];
    parallel_for(sh[0], [&](std::size_t i0) {
        std::array<std::size_t, 3> iv{i0, 0, 0};
        for (std::size_t i1 = 0; i1 < sh[1]; ++i1) {
            iv[1] = i1;
            for (std::size_t i2 = 0; i2 < sh[2]; ++i2) {
                iv[2] = i2;
                std::size_t flat = i0;
                if (plan.n >= 2) flat = flat * sh[1] + i1;
                if (plan.n >= 3) flat = flat * sh[2] + i2;
                std::array<double, 3> xi{0, 0, 0};
                for (int d = 0; d < plan.n; ++d) {
                    xi[d] = (2 * iv[d] == plan.shape[d])
                                ? 0.0
                                : fft_frequency(iv[d], plan.shape[d], plan.h);
                }
                f(flat, iv, xi);
            }
        }
    });
}

std::array<double, 3> wrapped_coord(const PaddedPlan& plan,
                                    const std::array<std::size_t, 3>& iv) {
    std::array<double, 3> x{0, 0, 0};
    for (int d = 0; d < plan.n; ++d) {
        std::size_t N = plan.shape[d];
        double idx = (iv[d] <= N / 2) ? static_cast<double>(iv[d])
                                      : static_cast<double>(iv[d]) - static_cast<double>(N);
        x[d] = idx * plan.h;
    }
    return x;
}

} // namespace

double modulus_omega(const RadialKernel& kernel, double t) {
    if (!(t > 0)) return 0.0;
    double r = kernel(t);
    if (!(r > 0)) return std::numeric_limits<double>::infinity();
    return 1.0 / (std::pow(t, kernel.n - 1) * r);
}

ReconstructionKernel build_reconstruction(const RadialKernel& kernel,
                                          const SpectralSymbol& symbol,
                                          const PotentialTable& table,
                                          const GridSpec& field_spec, bool tabulate_v) {
    ReconstructionKernel recon;
    recon.plan = make_padded_plan(kernel, table, field_spec);
    recon.symbol = symbol;
    recon.epsilon = kernel.epsilon;
    recon.chi_cutoff_radius = 2.0 / kernel.epsilon;

    const double hn = std::pow(recon.plan.h, recon.plan.n);
    for (double q : recon.plan.q_modes)
        if (!(q * hn > 0))
            throw std::runtime_error(
                "build_reconstruction: grid symbol not positive at a needed mode");

    if (tabulate_v) {
        const std::size_t total = recon.plan.padded_size();
        std::vector<std::vector<cplx>> wd(recon.plan.n, std::vector<cplx>(total));
        for_each_mode(recon.plan, [&](std::size_t flat, const std::array<std::size_t, 3>&,
                                      const std::array<double, 3>& xi) {
            double k2 = 0.0;
            for (int d = 0; d < recon.plan.n; ++d) k2 += xi[d] * xi[d];
            double qe = recon.plan.q_modes[flat] * hn;
            for (int d = 0; d < recon.plan.n; ++d) {
                if (k2 == 0.0) {
                    wd[d][flat] = 0.0;
                } else {
                    wd[d][flat] = cplx{0.0, -xi[d] / (2.0 * M_PI * k2 * qe)};
                }
            }
        });
        for (int d = 0; d < recon.plan.n; ++d) {
            Fft::inverse(wd[d], recon.plan.shape);
            recon.v_padded[d].resize(total);
            for (std::size_t i = 0; i < total; ++i)
                recon.v_padded[d][i] = wd[d][i].real() / hn;
        }
    }
    return recon;
}

double max_product_defect(const ReconstructionKernel& recon) {
    const PaddedPlan& plan = recon.plan;
    const double hn = std::pow(plan.h, plan.n);
    std::vector<double> worst_per_row(plan.shape[0], 0.0);
    for_each_mode(plan, [&](std::size_t flat, const std::array<std::size_t, 3>& iv,
                            const std::array<double, 3>& xi) {
        double k2 = 0.0;
        for (int d = 0; d < plan.n; ++d) k2 += xi[d] * xi[d];
        if (k2 == 0.0) return;
        double qe = plan.q_modes[flat] * hn;
        // sum_d [-i xi_d/(2 pi k2 qe)] [2 pi i xi_d qe], evaluated with the
        // same floating operations the composed multipliers apply
        double prod = 0.0;
        for (int d = 0; d < plan.n; ++d)
            prod += (xi[d] / (2.0 * M_PI * k2 * qe)) * (2.0 * M_PI * xi[d] * qe);
        worst_per_row[iv[0]] = std::max(worst_per_row[iv[0]], std::abs(prod - 1.0));
    });
    double worst = 0.0;
    for (double v : worst_per_row) worst = std::max(worst, v);
    return worst;
}

GridField reconstruct(const ReconstructionKernel& recon, const GridVectorField& G,
                      const Box& omega, double delta) {
    const PaddedPlan& plan = recon.plan;
    if (!(G.spec == plan.field_spec))
        throw std::invalid_argument("reconstruct: gradient grid differs from plan");
    const double hn = std::pow(plan.h, plan.n);
    const std::size_t total = plan.padded_size();

    std::vector<cplx> acc(total, cplx{0.0, 0.0});
    std::vector<cplx> ghat;
    for (int d = 0; d < plan.n; ++d) {
        embed_padded(plan, G.components[d], ghat);
        Fft::forward(ghat, plan.shape);
        for_each_mode(plan, [&](std::size_t flat, const std::array<std::size_t, 3>&,
                                const std::array<double, 3>& xi) {
            double k2 = 0.0;
            for (int a = 0; a < plan.n; ++a) k2 += xi[a] * xi[a];
            if (k2 == 0.0) return;
            double qe = plan.q_modes[flat] * hn;
            cplx w{0.0, -xi[d] / (2.0 * M_PI * k2 * qe)};
            acc[flat] += w * ghat[flat];
        });
    }
    Fft::inverse(acc, plan.shape);

    // Fix the lost constant: mean over lattice points farther than delta from omega.
    double sum = 0.0;
    std::size_t count = 0;
    std::array<std::size_t, 3> sh = {1, 1, 1};
    for (int d = 0; d < plan.n; ++d) sh[d] = plan.shape[d];
    std::size_t flat = 0;
    for (std::size_t i0 = 0; i0 < sh[0]; ++i0)
        for (std::size_t i1 = 0; i1 < sh[1]; ++i1)
            for (std::size_t i2 = 0; i2 < sh[2]; ++i2, ++flat) {
                std::array<double, 3> x{plan.pad_origin[0] + plan.h * static_cast<double>(i0),
                                        plan.pad_origin[1] + plan.h * static_cast<double>(i1),
                                        plan.pad_origin[2] + plan.h * static_cast<double>(i2)};
                if (omega.distance(x, plan.n) > delta + 2 * plan.h) {
                    sum += acc[flat].real();
                    ++count;
                }
            }
    if (count == 0)
        throw std::invalid_argument("reconstruct: no lattice points outside omega_delta");
    const double c = sum / static_cast<double>(count);
    parallel_for(total, [&](std::size_t i) { acc[i] -= c; });
    return crop_padded(plan, acc);
}

VBoundReport vrho_bound_check(const ReconstructionKernel& recon, const RadialKernel& kernel,
                              double r_lo, double r_hi) {
    if (!recon.has_v()) throw std::logic_error("vrho_bound_check: V not tabulated");
    const PaddedPlan& plan = recon.plan;
    VBoundReport rep;

    std::array<std::size_t, 3> sh = {1, 1, 1};
    for (int d = 0; d < plan.n; ++d) sh[d] = plan.shape[d];
    auto wrap_idx = [&](std::ptrdiff_t i, std::size_t N) {
        std::ptrdiff_t m = i % static_cast<std::ptrdiff_t>(N);
        if (m < 0) m += static_cast<std::ptrdiff_t>(N);
        return static_cast<std::size_t>(m);
    };
    auto flat_of = [&](const std::array<std::ptrdiff_t, 3>& iv) {
        std::size_t f = wrap_idx(iv[0], sh[0]);
        if (plan.n >= 2) f = f * sh[1] + wrap_idx(iv[1], sh[1]);
        if (plan.n >= 3) f = f * sh[2] + wrap_idx(iv[2], sh[2]);
        return f;
    };

    double vmax = 0.0;
    for (const auto& comp : recon.v_padded)
        for (double v : comp)
            if (plan.n >= 1) vmax = std::max(vmax, std::abs(v));

    std::size_t flat = 0;
    for (std::size_t i0 = 0; i0 < sh[0]; ++i0)
        for (std::size_t i1 = 0; i1 < sh[1]; ++i1)
            for (std::size_t i2 = 0; i2 < sh[2]; ++i2, ++flat) {
                std::array<std::size_t, 3> iv{i0, i1, i2};
                std::array<double, 3> x = wrapped_coord(plan, iv);
                double r = 0.0;
                for (int d = 0; d < plan.n; ++d) r += x[d] * x[d];
                r = std::sqrt(r);
                if (r <= r_lo || r >= r_hi) continue;
                double vm = 0.0;
                for (int d = 0; d < plan.n; ++d)
                    vm += recon.v_padded[d][flat] * recon.v_padded[d][flat];
                vm = std::sqrt(vm);
                double rho = kernel(r);
                if (!(rho > 0)) continue;
                rep.sup_value_bound =
                    std::max(rep.sup_value_bound, vm * std::pow(r, 2 * plan.n - 1) * rho);

                // centered difference gradient magnitude of V
                double g2 = 0.0;
                for (int d = 0; d < plan.n; ++d)
                    for (int a = 0; a < plan.n; ++a) {
                        std::array<std::ptrdiff_t, 3> ip{static_cast<std::ptrdiff_t>(i0),
                                                         static_cast<std::ptrdiff_t>(i1),
                                                         static_cast<std::ptrdiff_t>(i2)};
                        std::array<std::ptrdiff_t, 3> im = ip;
                        ip[a] += 1;
                        im[a] -= 1;
                        double dv = (recon.v_padded[d][flat_of(ip)] -
                                     recon.v_padded[d][flat_of(im)]) /
                                    (2 * plan.h);
                        g2 += dv * dv;
                    }
                rep.sup_gradient_bound =
                    std::max(rep.sup_gradient_bound, std::sqrt(g2) * std::pow(r, 2 * plan.n) * rho);

                // vector radiality under sign flips and axis permutations
                if (plan.n >= 2 && vmax > 0) {
                    std::array<std::ptrdiff_t, 3> neg{-static_cast<std::ptrdiff_t>(i0),
                                                      static_cast<std::ptrdiff_t>(i1),
                                                      static_cast<std::ptrdiff_t>(i2)};
                    std::size_t nf = flat_of(neg);
                    double d0 = std::abs(recon.v_padded[0][nf] + recon.v_padded[0][flat]);
                    double d1 = std::abs(recon.v_padded[1][nf] - recon.v_padded[1][flat]);
                    rep.radiality_residual =
                        std::max(rep.radiality_residual, std::max(d0, d1) / vmax);
                    if (plan.n == 2 && sh[0] == sh[1]) {
                        std::array<std::ptrdiff_t, 3> swp{static_cast<std::ptrdiff_t>(i1),
                                                          static_cast<std::ptrdiff_t>(i0), 0};
                        std::size_t sf = flat_of(swp);
                        double s0 = std::abs(recon.v_padded[1][sf] - recon.v_padded[0][flat]);
                        rep.radiality_residual = std::max(rep.radiality_residual, s0 / vmax);
                    }
                } else if (plan.n == 1 && vmax > 0) {
                    std::array<std::ptrdiff_t, 3> neg{-static_cast<std::ptrdiff_t>(i0), 0, 0};
                    double d0 = std::abs(recon.v_padded[0][flat_of(neg)] + recon.v_padded[0][flat]);
                    rep.radiality_residual = std::max(rep.radiality_residual, d0 / vmax);
                }
            }
    return rep;
}

void write_v_profile_csv(const ReconstructionKernel& recon, const RadialKernel& kernel,
                         const std::string& path) {
    if (!recon.has_v()) throw std::logic_error("write_v_profile_csv: V not tabulated");
    const PaddedPlan& plan = recon.plan;
    std::FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw std::runtime_error("cannot open for writing: " + path);
    std::fprintf(fp, "r,vmag,envelope\n");

    // radial profile along the first axis, both signs averaged
    const std::size_t N = plan.shape[0];
    std::array<std::size_t, 3> sh = {1, 1, 1};
    for (int d = 0; d < plan.n; ++d) sh[d] = plan.shape[d];
    auto flat_axis = [&](std::size_t i0) {
        std::size_t f = i0;
        for (int d = 1; d < plan.n; ++d) f *= sh[d];
        return f;
    };
    for (std::size_t m = 1; m < N / 2; ++m) {
        double r = m * plan.h;
        double vm = 0.0;
        for (int d = 0; d < plan.n; ++d) {
            double plus = recon.v_padded[d][flat_axis(m)];
            double minus = recon.v_padded[d][flat_axis(N - m)];
            vm += 0.25 * (plus - minus) * (plus - minus);  // odd component
        }
        vm = std::sqrt(vm);
        double rho = kernel(r);
        double envelope = rho > 0 ? 1.0 / (std::pow(r, 2 * plan.n - 1) * rho) : 0.0;
        std::fprintf(fp, "%.17g,%.17g,%.17g\n", r, vm, envelope);
    }
    std::fclose(fp);
}

VlpTable vrho_lp_bounds(const ReconstructionKernel& recon, const RadialKernel& kernel,
                        double p, double sigma, double gamma,
                        const std::vector<double>& r_list,
                        const std::vector<std::array<double, 3>>& shifts, double R) {
    if (!recon.has_v()) throw std::logic_error("vrho_lp_bounds: V not tabulated");
    if (!(p > 1.0)) throw std::invalid_argument("vrho_lp_bounds: p must exceed 1");
    if (!(sigma * p > kernel.n))
        throw std::invalid_argument("vrho_lp_bounds: requires sigma p > n");
    const PaddedPlan& plan = recon.plan;
    const double pprime = std::isinf(p) ? 1.0 : p / (p - 1.0);
    const double hn = std::pow(plan.h, plan.n);

    std::array<std::size_t, 3> sh = {1, 1, 1};
    for (int d = 0; d < plan.n; ++d) sh[d] = plan.shape[d];
    auto wrap_idx = [&](std::ptrdiff_t i, std::size_t N) {
        std::ptrdiff_t m = i % static_cast<std::ptrdiff_t>(N);
        if (m < 0) m += static_cast<std::ptrdiff_t>(N);
        return static_cast<std::size_t>(m);
    };

    VlpTable table;
    for (double r : r_list) {
        VlpRow row;
        row.r = r;
        double acc = 0.0;
        std::size_t flat = 0;
        for (std::size_t i0 = 0; i0 < sh[0]; ++i0)
            for (std::size_t i1 = 0; i1 < sh[1]; ++i1)
                for (std::size_t i2 = 0; i2 < sh[2]; ++i2, ++flat) {
                    std::array<double, 3> x = wrapped_coord(plan, {i0, i1, i2});
                    double rr = 0.0;
                    for (int d = 0; d < plan.n; ++d) rr += x[d] * x[d];
                    rr = std::sqrt(rr);
                    if (rr == 0.0 || rr > r) continue;
                    double vm = 0.0;
                    for (int d = 0; d < plan.n; ++d)
                        vm += recon.v_padded[d][flat] * recon.v_padded[d][flat];
                    acc += std::pow(std::sqrt(vm), pprime);
                }
        row.norm = std::pow(acc * hn, 1.0 / pprime);
        double gauge = modulus_omega(kernel, r) * std::pow(r, -double(plan.n) / p);
        row.ratio = gauge > 0 ? row.norm / gauge : 0.0;
        table.ball_rows.push_back(row);
    }

    for (const auto& zeta : shifts) {
        VlpRow row;
        double zn = 0.0;
        std::array<std::ptrdiff_t, 3> zi{0, 0, 0};
        for (int d = 0; d < plan.n; ++d) {
            zn += zeta[d] * zeta[d];
            zi[d] = static_cast<std::ptrdiff_t>(std::llround(zeta[d] / plan.h));
        }
        row.r = std::sqrt(zn);
        double acc = 0.0;
        std::size_t flat = 0;
        for (std::size_t i0 = 0; i0 < sh[0]; ++i0)
            for (std::size_t i1 = 0; i1 < sh[1]; ++i1)
                for (std::size_t i2 = 0; i2 < sh[2]; ++i2, ++flat) {
                    std::array<double, 3> x = wrapped_coord(plan, {i0, i1, i2});
                    double rr = 0.0;
                    for (int d = 0; d < plan.n; ++d) rr += x[d] * x[d];
                    rr = std::sqrt(rr);
                    if (rr == 0.0 || rr > R) continue;
                    std::array<std::ptrdiff_t, 3> is{
                        static_cast<std::ptrdiff_t>(i0) + zi[0],
                        static_cast<std::ptrdiff_t>(i1) + zi[1],
                        static_cast<std::ptrdiff_t>(i2) + zi[2]};
                    std::size_t sf = wrap_idx(is[0], sh[0]);
                    if (plan.n >= 2) sf = sf * sh[1] + wrap_idx(is[1], sh[1]);
                    if (plan.n >= 3) sf = sf * sh[2] + wrap_idx(is[2], sh[2]);
                    double vm = 0.0;
                    for (int d = 0; d < plan.n; ++d) {
                        double dv = recon.v_padded[d][flat] - recon.v_padded[d][sf];
                        vm += dv * dv;
                    }
                    acc += std::pow(std::sqrt(vm), pprime);
                }
        row.norm = std::pow(acc * hn, 1.0 / pprime);
        if (row.r > 0) {
            double gauge = modulus_omega(kernel, row.r) * std::pow(row.r, -double(plan.n) / p);
            row.ratio = gauge > 0 ? row.norm / gauge : 0.0;
        }
        table.shift_rows.push_back(row);
    }

    // doubling sanity on the sampled radii
    for (double r : r_list) {
        if (2 * r >= kernel.epsilon) continue;
        double w1 = modulus_omega(kernel, r), w2 = modulus_omega(kernel, 2 * r);
        if (w1 > 0 && std::isfinite(w2))
            table.doubling_constant =
                std::max(table.doubling_constant, w2 / (std::pow(2.0, gamma) * w1));
    }
    return table;
}

} // namespace nlgrad
