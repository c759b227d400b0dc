#include "nlgrad/analysis.hpp"
#include "nlgrad/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace nlgrad {

namespace {

// Restricted-gradient normal operator on interior unknowns: one forward and
// one inverse FFT per application of A^T A through the multiplier |lambda|^2.
class RestrictedGradientOperator {
public:
    RestrictedGradientOperator(const RadialKernel& kernel, const Box& omega, double h)
        : h_(h) {
        const double margin = kernel.delta + 6 * h;
        GridSpec spec;
        spec.n = kernel.n;
        spec.spacing = h;
        for (int d = 0; d < kernel.n; ++d) {
            spec.origin[d] = omega.lo[d] - margin;
            double extent = (omega.hi[d] - omega.lo[d]) + 2 * margin;
            spec.shape[d] = static_cast<std::size_t>(std::ceil(extent / h)) + 1;
        }
        PotentialTable table(kernel, make_potential_radii(kernel, h / 4));
        plan_ = make_padded_plan(kernel, table, spec);

        // interior lattice positions (padded flat indices)
        std::array<std::size_t, 3> sh = {1, 1, 1};
        for (int d = 0; d < plan_.n; ++d) sh[d] = plan_.shape[d];
        std::size_t flat = 0;
        for (std::size_t i0 = 0; i0 < sh[0]; ++i0)
            for (std::size_t i1 = 0; i1 < sh[1]; ++i1)
                for (std::size_t i2 = 0; i2 < sh[2]; ++i2, ++flat) {
                    std::array<double, 3> x{
                        plan_.pad_origin[0] + h * static_cast<double>(i0),
                        plan_.pad_origin[1] + h * static_cast<double>(i1),
                        plan_.pad_origin[2] + h * static_cast<double>(i2)};
                    if (omega.contains(x, plan_.n)) {
                        interior_.push_back(flat);
                        interior_coords_.push_back(x);
                    }
                }
        if (interior_.empty())
            throw std::invalid_argument("poincare_estimate: empty interior at this resolution");

        // |lambda|^2 per mode and its positive floor for preconditioning
        const double hn = std::pow(h, plan_.n);
        lambda2_.assign(plan_.padded_size(), 0.0);
        double floor2 = std::numeric_limits<double>::infinity();
        std::size_t m = 0;
        std::array<std::size_t, 3> iv{0, 0, 0};
        for (iv[0] = 0; iv[0] < sh[0]; ++iv[0])
            for (iv[1] = 0; iv[1] < sh[1]; ++iv[1])
                for (iv[2] = 0; iv[2] < sh[2]; ++iv[2], ++m) {
                    double k2 = 0.0;
                    for (int d = 0; d < plan_.n; ++d) {
                        double xi = fft_frequency(iv[d], plan_.shape[d], h);
                        k2 += xi * xi;
                    }
                    double lam = 2.0 * M_PI * std::sqrt(k2) * plan_.q_modes[m] * hn;
                    lambda2_[m] = lam * lam;
                    if (k2 > 0) floor2 = std::min(floor2, lambda2_[m]);
                }
        floor2_ = floor2;
        work_.resize(plan_.padded_size());
    }

    std::size_t unknowns() const { return interior_.size(); }
    double spacing() const { return h_; }
    const std::vector<std::array<double, 3>>& coords() const { return interior_coords_; }

    // y = A^T A x
    void normal_apply(const std::vector<double>& x, std::vector<double>& y) {
        mode_multiply(x, lambda2_, y);
    }

    // y = M^{-1} x, symbol-inverse preconditioner
    void precondition(const std::vector<double>& x, std::vector<double>& y) {
        if (inv_lambda2_.empty()) {
            inv_lambda2_.resize(lambda2_.size());
            for (std::size_t i = 0; i < lambda2_.size(); ++i)
                inv_lambda2_[i] = 1.0 / std::max(lambda2_[i], floor2_);
        }
        mode_multiply(x, inv_lambda2_, y);
    }

private:
    void mode_multiply(const std::vector<double>& x, const std::vector<double>& mult,
                       std::vector<double>& y) {
        std::fill(work_.begin(), work_.end(), cplx{0.0, 0.0});
        for (std::size_t i = 0; i < interior_.size(); ++i) work_[interior_[i]] = x[i];
        Fft::forward(work_, plan_.shape);
        parallel_for(work_.size(), [&](std::size_t i) { work_[i] *= mult[i]; });
        Fft::inverse(work_, plan_.shape);
        y.resize(interior_.size());
        for (std::size_t i = 0; i < interior_.size(); ++i) y[i] = work_[interior_[i]].real();
    }

    double h_;
    PaddedPlan plan_;
    std::vector<std::size_t> interior_;
    std::vector<std::array<double, 3>> interior_coords_;
    std::vector<double> lambda2_, inv_lambda2_;
    double floor2_ = 0.0;
    std::vector<cplx> work_;
};

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Preconditioned CG on the normal operator; returns iterations used, -1 on
// failure to reach tolerance.
int pcg_solve(RestrictedGradientOperator& op, const std::vector<double>& rhs,
              std::vector<double>& x, double tol, int max_iter) {
    const std::size_t n = rhs.size();
    x.assign(n, 0.0);
    std::vector<double> r = rhs, z(n), p(n), Ap(n);
    op.precondition(r, z);
    p = z;
    double rz = dot(r, z);
    const double rhs_norm = std::sqrt(dot(rhs, rhs));
    if (rhs_norm == 0) return 0;
    for (int it = 1; it <= max_iter; ++it) {
        op.normal_apply(p, Ap);
        double p_ap = dot(p, Ap);
        if (!(p_ap > 0)) return -1;
        double alpha = rz / p_ap;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * Ap[i];
        }
        if (std::sqrt(dot(r, r)) <= tol * rhs_norm) return it;
        op.precondition(r, z);
        double rz_new = dot(r, z);
        double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    return -1;
}

void fit_loglog(const std::vector<double>& x, const std::vector<double>& y, double& slope) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t n = x.size();
    for (std::size_t i = 0; i < n; ++i) {
        double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

void fit_loglog_raw(const std::vector<double>& lx, const std::vector<double>& ly,
                    double& slope) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t n = lx.size();
    for (std::size_t i = 0; i < n; ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace

PoincareReport poincare_estimate(const RadialKernel& kernel, const Box& omega,
                                 const std::vector<double>& resolutions, std::uint64_t seed) {
    PoincareReport rep;
    std::vector<std::array<double, 3>> prev_coords;
    std::vector<double> prev_v;
    double prev_h = 0.0;
    for (double h : resolutions) {
        RestrictedGradientOperator op(kernel, omega, h);
        const std::size_t n = op.unknowns();

        std::mt19937_64 rng(seed);
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::vector<double> v(n), w, bv;
        if (!prev_v.empty()) {
            // warm start from the coarser eigenvector by nearest-point lookup
            std::array<double, 3> lo = prev_coords.front();
            std::array<std::size_t, 3> dims{1, 1, 1};
            for (const auto& c : prev_coords)
                for (int d = 0; d < kernel.n; ++d) {
                    std::size_t idx = static_cast<std::size_t>(
                        std::llround((c[d] - lo[d]) / prev_h));
                    dims[d] = std::max(dims[d], idx + 1);
                }
            auto flat_prev = [&](const std::array<double, 3>& x) -> std::ptrdiff_t {
                std::size_t f = 0;
                for (int d = 0; d < kernel.n; ++d) {
                    double rel = (x[d] - lo[d]) / prev_h;
                    std::ptrdiff_t idx = std::llround(rel);
                    if (idx < 0) idx = 0;
                    if (idx >= static_cast<std::ptrdiff_t>(dims[d]))
                        idx = static_cast<std::ptrdiff_t>(dims[d]) - 1;
                    f = f * dims[d] + static_cast<std::size_t>(idx);
                }
                return static_cast<std::ptrdiff_t>(f);
            };
            std::vector<double> dense(dims[0] * dims[1] * dims[2], 0.0);
            for (std::size_t i = 0; i < prev_coords.size(); ++i)
                dense[flat_prev(prev_coords[i])] = prev_v[i];
            for (std::size_t i = 0; i < n; ++i) v[i] = dense[flat_prev(op.coords()[i])];
        } else {
            for (double& c : v) c = gauss(rng);
        }
        double nv = std::sqrt(dot(v, v));
        if (nv == 0) {
            for (double& c : v) c = gauss(rng);
            nv = std::sqrt(dot(v, v));
        }
        for (double& c : v) c /= nv;

        double lam_min = 0.0, lam_prev = -1.0;
        int worst_cg = 0;
        bool converged_all = true;
        for (int outer = 0; outer < 15; ++outer) {
            int its = pcg_solve(op, v, w, 1e-8, 10000);
            if (its < 0) {
                converged_all = false;
                break;
            }
            worst_cg = std::max(worst_cg, its);
            // Rayleigh estimate from the inverse step: lambda = <v,w>/<w,w>
            lam_min = dot(v, w) / dot(w, w);
            double nw = std::sqrt(dot(w, w));
            for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / nw;
            if (lam_prev > 0 && std::abs(lam_min - lam_prev) < 1e-4 * lam_min) break;
            lam_prev = lam_min;
        }
        rep.resolutions.push_back(h);
        rep.sigma_min.push_back(std::sqrt(std::max(lam_min, 0.0)));
        rep.poincare_constant.push_back(lam_min > 0 ? 1.0 / std::sqrt(lam_min) : 0.0);
        rep.cg_iterations.push_back(worst_cg);
        rep.cg_converged.push_back(converged_all);
        prev_coords = op.coords();
        prev_v = v;
        prev_h = h;
    }
    if (rep.resolutions.size() >= 2) {
        std::vector<double> hs, sig;
        for (std::size_t i = 0; i < rep.resolutions.size(); ++i)
            if (rep.sigma_min[i] > 0) {
                hs.push_back(rep.resolutions[i]);
                sig.push_back(rep.sigma_min[i]);
            }
        if (hs.size() >= 2) fit_loglog(hs, sig, rep.trend);
    }
    return rep;
}

CompactnessReport compactness_proxy(const SpectralSymbol& symbol, const RadialKernel& kernel,
                                    double k_max) {
    CompactnessReport rep;
    const double k0 = 4.0 / kernel.epsilon;
    if (!(k_max > k0)) return rep;
    auto M = [&](double k) { return 1.0 / (2.0 * M_PI * k * symbol.value(k)); };
    rep.m_start = M(k0);
    rep.m_end = M(k_max);
    rep.decays = rep.m_end < 1e-2 * rep.m_start;

    std::vector<double> ks, ms;
    const double fit_lo = std::max(k0, k_max / 10.0);
    for (int i = 0; i < 64; ++i) {
        double k = fit_lo * std::pow(k_max / fit_lo, i / 63.0);
        ks.push_back(k);
        ms.push_back(M(k));
    }
    fit_loglog(ks, ms, rep.fitted_exponent);
    return rep;
}

TranslationReport translation_estimate(const RadialKernel& kernel, const GridField& u,
                                       const GridVectorField& grad_u, double p,
                                       const std::vector<int>& shifts_cells) {
    TranslationReport rep;
    const double h = u.spec.spacing;
    const double gnorm = lp_norm(grad_u, p);
    std::array<std::size_t, 3> sh = {1, 1, 1};
    for (int d = 0; d < u.spec.n; ++d) sh[d] = u.spec.shape[d];

    for (int cells : shifts_cells) {
        double dist = std::abs(cells) * h;
        TranslationRow row;
        row.dist = dist;
        if (cells == 0) {
            rep.rows.push_back(row);
            continue;
        }
        if (!(dist < kernel.epsilon / 3.0))
            throw std::invalid_argument("translation_estimate: |zeta| must stay below eps/3");
        // u - u(. + zeta) along the first axis, zero extension
        GridField diff(u.spec);
        std::size_t idx = 0;
        for (std::size_t i0 = 0; i0 < sh[0]; ++i0)
            for (std::size_t i1 = 0; i1 < sh[1]; ++i1)
                for (std::size_t i2 = 0; i2 < sh[2]; ++i2, ++idx) {
                    std::ptrdiff_t j0 = static_cast<std::ptrdiff_t>(i0) + cells;
                    double shifted = 0.0;
                    if (j0 >= 0 && j0 < static_cast<std::ptrdiff_t>(sh[0])) {
                        std::size_t f = static_cast<std::size_t>(j0);
                        if (u.spec.n >= 2) f = f * sh[1] + i1;
                        if (u.spec.n >= 3) f = f * sh[2] + i2;
                        shifted = u.data[f];
                    }
                    diff.data[idx] = u.data[idx] - shifted;
                }
        double num = lp_norm(diff, p);
        double w = modulus_omega(kernel, dist);
        row.ratio = (w > 0 && gnorm > 0) ? num / (w * gnorm) : 0.0;
        rep.sup_ratio = std::max(rep.sup_ratio, row.ratio);
        rep.rows.push_back(row);
    }
    return rep;
}

double morrey_check(const RadialKernel& kernel, const GridField& u,
                    const GridVectorField& grad_u, double p, double sigma,
                    std::uint64_t seed) {
    if (!(sigma * p > kernel.n))
        throw std::invalid_argument("morrey_check: requires sigma p > n");
    const double alpha = kernel.n / p;
    const double gnorm = lp_norm(grad_u, p);
    if (gnorm == 0) return 0.0;

    std::array<std::size_t, 3> sh = {1, 1, 1};
    for (int d = 0; d < u.spec.n; ++d) sh[d] = u.spec.shape[d];
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick0(0, sh[0] - 1);
    std::uniform_int_distribution<std::size_t> pick1(0, sh[1] - 1);
    std::uniform_int_distribution<std::size_t> pick2(0, sh[2] - 1);

    auto flat = [&](std::size_t a, std::size_t b, std::size_t c) {
        std::size_t f = a;
        if (u.spec.n >= 2) f = f * sh[1] + b;
        if (u.spec.n >= 3) f = f * sh[2] + c;
        return f;
    };

    double sup = 0.0;
    const double h = u.spec.spacing;
    for (int trial = 0; trial < 100000; ++trial) {
        std::size_t a0 = pick0(rng), b0 = pick1(rng), c0 = pick2(rng);
        std::size_t a1 = pick0(rng), b1 = pick1(rng), c1 = pick2(rng);
        double dx0 = (static_cast<double>(a0) - static_cast<double>(a1)) * h;
        double dx1 = (static_cast<double>(b0) - static_cast<double>(b1)) * h;
        double dx2 = (static_cast<double>(c0) - static_cast<double>(c1)) * h;
        double dist = std::sqrt(dx0 * dx0 + (u.spec.n >= 2 ? dx1 * dx1 : 0.0) +
                                (u.spec.n >= 3 ? dx2 * dx2 : 0.0));
        if (dist <= 0 || dist >= kernel.epsilon) continue;
        double w_alpha = modulus_omega(kernel, dist) * std::pow(dist, -alpha);
        if (!(w_alpha > 0)) continue;
        double du = std::abs(u.data[flat(a0, b0, c0)] - u.data[flat(a1, b1, c1)]);
        sup = std::max(sup, du / w_alpha);
    }
    return sup / gnorm;
}

OrliczVerdict orlicz_condition_check(const RadialKernel& kernel, double p, double gamma,
                                     const std::function<double(double)>& young_inverse) {
    if (!(gamma * p < kernel.n))
        throw std::invalid_argument("orlicz_condition_check: requires gamma p < n");
    OrliczVerdict verdict;
    verdict.tail_infimum = std::numeric_limits<double>::infinity();
    const int samples = 256;
    double prev_ainv = -std::numeric_limits<double>::infinity();
    std::vector<double> lt, lr;
    for (int i = 0; i < samples; ++i) {
        double t = 1e2 * std::pow(1e10, i / double(samples - 1));  // [1e2, 1e12]
        double ainv = young_inverse(t);
        if (ainv < prev_ainv)
            throw std::runtime_error("orlicz_condition_check: A^{-1} not monotone on samples");
        prev_ainv = ainv;
        double arg = std::pow(t, -1.0 / kernel.n);
        double w = modulus_omega(kernel, arg);
        if (!(w > 0) || !std::isfinite(w)) continue;
        double ratio = ainv / (w * std::pow(t, 1.0 / p));
        if (t >= 1e10) verdict.tail_infimum = std::min(verdict.tail_infimum, ratio);
        if (t >= 1e8 && ratio > 0) {
            lt.push_back(std::log(t));
            lr.push_back(std::log(ratio));
        }
    }
    // a decaying tail means the liminf is 0 even when the sampled window
    // has not yet crossed the floor
    double tail_slope = 0.0;
    if (lt.size() >= 8) fit_loglog_raw(lt, lr, tail_slope);
    verdict.positive = verdict.tail_infimum > 1e-6 && tail_slope >= -0.05;
    return verdict;
}

ModulusProfile modulus_profile(const RadialKernel& kernel, double sigma, double gamma,
                               double alpha, int samples) {
    ModulusProfile prof;
    prof.alpha = alpha;
    prof.sigma = sigma;
    prof.gamma = gamma;
    const double lo = 1e-6 * kernel.epsilon, hi = kernel.epsilon * (1 - 1e-9);
    double c = 0.0;
    for (int i = 0; i < samples; ++i) {
        double t = lo * std::pow(hi / lo, i / double(samples - 1));
        double w = modulus_omega(kernel, t);
        prof.t_samples.push_back(t);
        prof.omega.push_back(w);
        prof.omega_alpha.push_back(w * std::pow(t, -alpha));
        if (w > 0 && std::isfinite(w)) {
            c = std::max(c, w / std::pow(t, sigma));
            c = std::max(c, std::pow(t, gamma) / w);
        }
    }
    prof.envelope_constant = c;
    return prof;
}

} // namespace nlgrad
