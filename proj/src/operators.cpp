#include "nlgrad/operators.hpp"
#include "nlgrad/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nlgrad {

namespace {

double ball_equivalent_radius(int n, double h) {
    return h * std::pow(n / sphere_area(n), 1.0 / n);
}

// Integral of rho(|x|) 1_{|x|<=delta} over the cube of side h centered at z,
// per-axis Gauss product rule.
double cell_weight_plain(const RadialKernel& kernel, const std::array<double, 3>& z,
                         double h, int npts) {
    const GaussRule& rule = gauss_legendre(npts);
    const int n = kernel.n;
    double acc = 0.0;
    if (n == 1) {
        for (int i = 0; i < npts; ++i) {
            double x = z[0] + 0.5 * h * rule.nodes[i];
            double r = std::abs(x);
            if (r <= kernel.delta && r > 0) acc += rule.weights[i] * kernel(r);
        }
        return acc * h / 2;
    }
    if (n == 2) {
        for (int i = 0; i < npts; ++i)
            for (int j = 0; j < npts; ++j) {
                double x = z[0] + 0.5 * h * rule.nodes[i];
                double y = z[1] + 0.5 * h * rule.nodes[j];
                double r = std::hypot(x, y);
                if (r <= kernel.delta && r > 0)
                    acc += rule.weights[i] * rule.weights[j] * kernel(r);
            }
        return acc * h * h / 4;
    }
    for (int i = 0; i < npts; ++i)
        for (int j = 0; j < npts; ++j)
            for (int k = 0; k < npts; ++k) {
                double x = z[0] + 0.5 * h * rule.nodes[i];
                double y = z[1] + 0.5 * h * rule.nodes[j];
                double w = z[2] + 0.5 * h * rule.nodes[k];
                double r = std::sqrt(x * x + y * y + w * w);
                if (r <= kernel.delta && r > 0)
                    acc += rule.weights[i] * rule.weights[j] * rule.weights[k] * kernel(r);
            }
    return acc * h * h * h / 8;
}

// Cells straddling the horizon sphere carry the support jump; subdividing them
// keeps the edge quadrature error in line with the interior cells.
constexpr int kEdgeRefine = 2;

double cell_weight(const RadialKernel& kernel, const std::array<double, 3>& z, double h,
                   int npts) {
    const int n = kernel.n;
    double half_diag = 0.5 * h * std::sqrt(double(n));
    double r2 = 0.0;
    for (int d = 0; d < n; ++d) r2 += z[d] * z[d];
    double r = std::sqrt(r2);
    bool straddles = std::abs(r - kernel.delta) <= half_diag;
    if (!straddles) return cell_weight_plain(kernel, z, h, npts);

    const int m = kEdgeRefine;
    const double hs = h / m;
    double acc = 0.0;
    std::array<int, 3> iv{0, 0, 0};
    std::array<int, 3> lim{m, n >= 2 ? m : 1, n >= 3 ? m : 1};
    for (iv[0] = 0; iv[0] < lim[0]; ++iv[0])
        for (iv[1] = 0; iv[1] < lim[1]; ++iv[1])
            for (iv[2] = 0; iv[2] < lim[2]; ++iv[2]) {
                std::array<double, 3> zc = z;
                for (int d = 0; d < n; ++d)
                    zc[d] += (-0.5 * h + (iv[d] + 0.5) * hs);
                acc += cell_weight_plain(kernel, zc, hs, npts);
            }
    return acc;
}

struct BBox {
    std::array<std::size_t, 3> lo{0, 0, 0}, hi{0, 0, 0};  // inclusive
    bool empty = true;
};

BBox nonzero_bbox(const GridField& u) {
    BBox b;
    const GridSpec& s = u.spec;
    std::array<std::size_t, 3> sh = {1, 1, 1};
    for (int d = 0; d < s.n; ++d) sh[d] = s.shape[d];
    for (int d = 0; d < 3; ++d) {
        b.lo[d] = sh[d];
        b.hi[d] = 0;
    }
    std::size_t idx = 0;
    for (std::size_t i0 = 0; i0 < sh[0]; ++i0)
        for (std::size_t i1 = 0; i1 < sh[1]; ++i1)
            for (std::size_t i2 = 0; i2 < sh[2]; ++i2, ++idx)
                if (u.data[idx] != 0.0) {
                    b.empty = false;
                    b.lo[0] = std::min(b.lo[0], i0);
                    b.hi[0] = std::max(b.hi[0], i0);
                    b.lo[1] = std::min(b.lo[1], i1);
                    b.hi[1] = std::max(b.hi[1], i1);
                    b.lo[2] = std::min(b.lo[2], i2);
                    b.hi[2] = std::max(b.hi[2], i2);
                }
    if (b.empty)
        for (int d = 0; d < 3; ++d) b.lo[d] = b.hi[d] = 0;
    return b;
}

} // namespace

StencilCache build_stencil(const RadialKernel& kernel, double h) {
    if (!(h > 0)) throw std::invalid_argument("build_stencil: h must be positive");
    if (kernel.delta < h)
        throw std::invalid_argument("build_stencil: horizon below grid spacing");
    StencilCache st;
    st.kernel_label = kernel.label;
    st.n = kernel.n;
    st.h = h;
    st.delta = kernel.delta;
    st.reach = static_cast<int>(std::floor(kernel.delta / h + 0.5 * std::sqrt(double(kernel.n)))) + 1;
    const int M = st.reach;
    const std::size_t ext = st.box_extent();
    const std::size_t total = st.box_size();
    st.weights.assign(total, 0.0);
    for (int d = 0; d < st.n; ++d) st.k_factor[d].assign(total, 0.0);

    const double cutoff = kernel.delta + 0.5 * std::sqrt(double(kernel.n)) * h;
    const int n = st.n;
    const std::size_t outer = (n == 1) ? ext : ext * ext;
    parallel_for(outer, [&](std::size_t row) {
        std::size_t i = (n == 1) ? row : row / ext;
        std::size_t j = (n == 1) ? 0 : row % ext;
        const std::size_t kmax = (n == 3) ? ext : 1;
        for (std::size_t kk = 0; kk < kmax; ++kk) {
            std::array<int, 3> zi{static_cast<int>(i) - M,
                                  n >= 2 ? static_cast<int>(j) - M : 0,
                                  n >= 3 ? static_cast<int>(kk) - M : 0};
            if (zi[0] == 0 && zi[1] == 0 && zi[2] == 0) continue;
            double r2 = 0.0;
            std::array<double, 3> z{0, 0, 0};
            for (int d = 0; d < n; ++d) {
                z[d] = zi[d] * h;
                r2 += z[d] * z[d];
            }
            double r = std::sqrt(r2);
            if (r > cutoff) continue;
            int npts = (r <= 8.0 * h) ? 5 : 3;
            double w = cell_weight(kernel, z, h, npts);
            if (w == 0.0) continue;
            std::size_t flat = i;
            if (n >= 2) flat = flat * ext + j;
            if (n >= 3) flat = flat * ext + kk;
            st.weights[flat] = w;
            for (int d = 0; d < n; ++d) st.k_factor[d][flat] = w * z[d] / r2;
        }
    });

    const double heff = ball_equivalent_radius(n, h);
    auto mass = [&](double t) { return kernel(t) * std::pow(t, n - 1); };
    st.near_cell_coefficient =
        sphere_area(n) / n * integrate_graded(mass, 0.0, heff, true).require();
    return st;
}

GridVectorField fd4_gradient(const GridField& u) {
    const GridSpec& s = u.spec;
    GridVectorField g(s);
    const double inv12h = 1.0 / (12.0 * s.spacing);
    std::array<std::size_t, 3> sh = {1, 1, 1};
    for (int d = 0; d < s.n; ++d) sh[d] = s.shape[d];
    std::array<std::size_t, 3> stride = {0, 0, 0};
    stride[s.n - 1] = 1;
    for (int d = s.n - 2; d >= 0; --d) stride[d] = stride[d + 1] * sh[d + 1];

    auto val = [&](std::ptrdiff_t base, int axis, std::ptrdiff_t shift,
                   std::size_t coord) -> double {
        std::ptrdiff_t c = static_cast<std::ptrdiff_t>(coord) + shift;
        if (c < 0 || c >= static_cast<std::ptrdiff_t>(sh[axis])) return 0.0;
        return u.data[base + shift * static_cast<std::ptrdiff_t>(stride[axis])];
    };

    parallel_for(u.data.size(), [&](std::size_t idx) {
        std::array<std::size_t, 3> iv{0, 0, 0};
        std::size_t rem = idx;
        for (int d = 0; d < s.n; ++d) {
            iv[d] = rem / stride[d];
            rem %= stride[d];
        }
        for (int d = 0; d < s.n; ++d) {
            double um2 = val(idx, d, -2, iv[d]);
            double um1 = val(idx, d, -1, iv[d]);
            double up1 = val(idx, d, +1, iv[d]);
            double up2 = val(idx, d, +2, iv[d]);
            g.components[d].data[idx] = (8.0 * (up1 - um1) - (up2 - um2)) * inv12h;
        }
    });
    return g;
}

namespace {

// out_d(x) = -sum_z K_d(z) v(x-z) for all components, restricted to the box
// where the result can be nonzero. The u(x) term of the difference quotient
// cancels exactly against the odd symmetry of K.
void apply_stencil_components(const StencilCache& st, const GridField& v,
                              GridVectorField& out) {
    const GridSpec& s = v.spec;
    const int n = st.n;
    const int M = st.reach;
    const std::size_t ext = st.box_extent();
    BBox bb = nonzero_bbox(v);
    if (bb.empty) return;

    std::array<std::size_t, 3> sh = {1, 1, 1};
    for (int d = 0; d < n; ++d) sh[d] = s.shape[d];
    std::array<std::size_t, 3> out_lo{0, 0, 0}, out_hi{0, 0, 0};
    for (int d = 0; d < n; ++d) {
        out_lo[d] = bb.lo[d] > static_cast<std::size_t>(M) ? bb.lo[d] - M : 0;
        out_hi[d] = std::min(sh[d] - 1, bb.hi[d] + M);
    }

    if (n == 1) {
        parallel_for(out_hi[0] - out_lo[0] + 1, [&](std::size_t t) {
            std::size_t i = out_lo[0] + t;
            double acc = 0.0;
            std::size_t ylo = std::max<std::ptrdiff_t>(bb.lo[0], static_cast<std::ptrdiff_t>(i) - M);
            std::size_t yhi = std::min<std::size_t>(bb.hi[0], i + M);
            for (std::size_t y = ylo; y <= yhi; ++y) {
                std::size_t zi = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(i) - static_cast<std::ptrdiff_t>(y) + M);
                acc -= st.k_factor[0][zi] * v.data[y];
            }
            out.components[0].data[i] += acc;
        });
        return;
    }
    if (n == 2) {
        const std::size_t out_rows = out_hi[0] - out_lo[0] + 1;
        parallel_for(out_rows, [&](std::size_t t) {
            std::size_t i0 = out_lo[0] + t;
            std::size_t y0lo = std::max<std::ptrdiff_t>(bb.lo[0], static_cast<std::ptrdiff_t>(i0) - M);
            std::size_t y0hi = std::min<std::size_t>(bb.hi[0], i0 + M);
            for (std::size_t i1 = out_lo[1]; i1 <= out_hi[1]; ++i1) {
                double acc0 = 0.0, acc1 = 0.0;
                for (std::size_t y0 = y0lo; y0 <= y0hi; ++y0) {
                    std::size_t z0 = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(i0) - static_cast<std::ptrdiff_t>(y0) + M);
                    const double* k0row = &st.k_factor[0][z0 * ext];
                    const double* k1row = &st.k_factor[1][z0 * ext];
                    const double* vrow = &v.data[y0 * sh[1]];
                    std::size_t y1lo = std::max<std::ptrdiff_t>(bb.lo[1], static_cast<std::ptrdiff_t>(i1) - M);
                    std::size_t y1hi = std::min<std::size_t>(bb.hi[1], i1 + M);
                    std::ptrdiff_t zoff = static_cast<std::ptrdiff_t>(i1) + M;
                    for (std::size_t y1 = y1lo; y1 <= y1hi; ++y1) {
                        std::size_t z1 = static_cast<std::size_t>(zoff - static_cast<std::ptrdiff_t>(y1));
                        double uv = vrow[y1];
                        acc0 -= k0row[z1] * uv;
                        acc1 -= k1row[z1] * uv;
                    }
                }
                std::size_t idx = i0 * sh[1] + i1;
                out.components[0].data[idx] += acc0;
                out.components[1].data[idx] += acc1;
            }
        });
        return;
    }
    // n == 3: small grids only
    const std::size_t out_rows = out_hi[0] - out_lo[0] + 1;
    parallel_for(out_rows, [&](std::size_t t) {
        std::size_t i0 = out_lo[0] + t;
        for (std::size_t i1 = out_lo[1]; i1 <= out_hi[1]; ++i1)
            for (std::size_t i2 = out_lo[2]; i2 <= out_hi[2]; ++i2) {
                double acc[3] = {0, 0, 0};
                std::size_t y0lo = std::max<std::ptrdiff_t>(bb.lo[0], static_cast<std::ptrdiff_t>(i0) - M);
                std::size_t y0hi = std::min<std::size_t>(bb.hi[0], i0 + M);
                for (std::size_t y0 = y0lo; y0 <= y0hi; ++y0) {
                    std::size_t z0 = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(i0) - static_cast<std::ptrdiff_t>(y0) + M);
                    std::size_t y1lo = std::max<std::ptrdiff_t>(bb.lo[1], static_cast<std::ptrdiff_t>(i1) - M);
                    std::size_t y1hi = std::min<std::size_t>(bb.hi[1], i1 + M);
                    for (std::size_t y1 = y1lo; y1 <= y1hi; ++y1) {
                        std::size_t z1 = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(i1) - static_cast<std::ptrdiff_t>(y1) + M);
                        std::size_t y2lo = std::max<std::ptrdiff_t>(bb.lo[2], static_cast<std::ptrdiff_t>(i2) - M);
                        std::size_t y2hi = std::min<std::size_t>(bb.hi[2], i2 + M);
                        for (std::size_t y2 = y2lo; y2 <= y2hi; ++y2) {
                            std::size_t z2 = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(i2) - static_cast<std::ptrdiff_t>(y2) + M);
                            std::size_t zflat = (z0 * ext + z1) * ext + z2;
                            double uv = v.at(y0, y1, y2);
                            for (int d = 0; d < 3; ++d) acc[d] -= st.k_factor[d][zflat] * uv;
                        }
                    }
                }
                std::size_t idx = (i0 * sh[1] + i1) * sh[2] + i2;
                for (int d = 0; d < 3; ++d) out.components[d].data[idx] += acc[d];
            }
    });
}

} // namespace

GridVectorField gradient_direct(const StencilCache& st, const GridField& u) {
    if (u.spec.n != st.n) throw std::invalid_argument("gradient_direct: dimension mismatch");
    if (std::abs(u.spec.spacing - st.h) > 1e-12 * st.h)
        throw std::invalid_argument("gradient_direct: stencil built for different spacing");
    for (int d = 0; d < st.n; ++d)
        if (u.spec.shape[d] * u.spec.spacing < st.delta)
            throw std::invalid_argument("gradient_direct: horizon exceeds grid extent");
    GridVectorField out(u.spec);
    apply_stencil_components(st, u, out);
    GridVectorField grad = fd4_gradient(u);
    const double c = st.near_cell_coefficient;
    for (int d = 0; d < st.n; ++d)
        parallel_for(out.spec.size(), [&](std::size_t i) {
            out.components[d].data[i] += c * grad.components[d].data[i];
        });
    return out;
}

GridVectorField gradient_direct(const RadialKernel& kernel, const GridField& u) {
    return gradient_direct(build_stencil(kernel, u.spec.spacing), u);
}

GridField divergence_direct(const StencilCache& st, const GridVectorField& phi) {
    if (phi.spec.n != st.n) throw std::invalid_argument("divergence_direct: dimension mismatch");
    GridField out(phi.spec);
    // div(x) = -sum_z K(z) . Phi(x-z) + c div_h Phi: apply the vector stencil
    // to each component and keep the matching axis.
    for (int d = 0; d < st.n; ++d) {
        GridVectorField tmp(phi.spec);
        apply_stencil_components(st, phi.components[d], tmp);
        parallel_for(out.data.size(),
                     [&](std::size_t i) { out.data[i] += tmp.components[d].data[i]; });
    }
    const double c = st.near_cell_coefficient;
    for (int d = 0; d < st.n; ++d) {
        GridVectorField gd = fd4_gradient(phi.components[d]);
        parallel_for(out.data.size(),
                     [&](std::size_t i) { out.data[i] += c * gd.components[d].data[i]; });
    }
    return out;
}

GridField divergence_direct(const RadialKernel& kernel, const GridVectorField& phi) {
    return divergence_direct(build_stencil(kernel, phi.spec.spacing), phi);
}

PaddedPlan make_padded_plan(const RadialKernel& kernel, const PotentialTable& table,
                            const GridSpec& field_spec) {
    if (field_spec.n != kernel.n)
        throw std::invalid_argument("make_padded_plan: dimension mismatch");
    PaddedPlan plan;
    plan.field_spec = field_spec;
    plan.n = field_spec.n;
    plan.h = field_spec.spacing;
    const double h = plan.h;
    const std::size_t pad = static_cast<std::size_t>(std::ceil(kernel.delta / h)) + 4;
    plan.shape.resize(plan.n);
    for (int d = 0; d < plan.n; ++d) {
        plan.shape[d] = next_pow2(field_spec.shape[d] + 2 * pad);
        plan.offset[d] = (plan.shape[d] - field_spec.shape[d]) / 2;
        plan.pad_origin[d] = field_spec.origin[d] - static_cast<double>(plan.offset[d]) * h;
    }

    // Tabulate Q on the padded lattice with wrapped signed coordinates; cells
    // near the origin carry Gauss cell averages, the origin cell the analytic
    // ball average. Q is unbounded at 0 but integrable, so point values are
    // meaningless there.
    const std::size_t total = plan.padded_size();
    std::vector<double> q(total, 0.0);
    const double heff = ball_equivalent_radius(plan.n, h);
    const double avg_radius = 8.0 * h;
    const GaussRule& rule = gauss_legendre(5);
    const int n = plan.n;
    auto qval = [&](double r) { return r >= table.delta() ? 0.0 : table.value(std::max(r, table.radii().front())); };

    std::array<std::size_t, 3> sh = {1, 1, 1};
    for (int d = 0; d < n; ++d) sh[d] = plan.shape[d];
    parallel_for(sh[0], [&](std::size_t i0) {
        auto wrap = [&](std::size_t m, std::size_t N) {
            double idx = (m <= N / 2) ? static_cast<double>(m)
                                      : static_cast<double>(m) - static_cast<double>(N);
            return idx * h;
        };
        double x0 = wrap(i0, sh[0]);
        for (std::size_t i1 = 0; i1 < sh[1]; ++i1) {
            double x1 = n >= 2 ? wrap(i1, sh[1]) : 0.0;
            for (std::size_t i2 = 0; i2 < sh[2]; ++i2) {
                double x2 = n >= 3 ? wrap(i2, sh[2]) : 0.0;
                double r = std::sqrt(x0 * x0 + x1 * x1 + x2 * x2);
                std::size_t flat = i0;
                if (n >= 2) flat = flat * sh[1] + i1;
                if (n >= 3) flat = flat * sh[2] + i2;
                if (r == 0.0) {
                    q[flat] = table.cell_average(heff);
                } else if (r > table.delta() + h) {
                    q[flat] = 0.0;
                } else if (r <= avg_radius) {
                    // Gauss cell average of Q over the cell at x
                    double acc = 0.0;
                    if (n == 1) {
                        for (int a = 0; a < 5; ++a)
                            acc += rule.weights[a] * qval(std::abs(x0 + 0.5 * h * rule.nodes[a]));
                        acc /= 2.0;
                    } else if (n == 2) {
                        for (int a = 0; a < 5; ++a)
                            for (int b = 0; b < 5; ++b)
                                acc += rule.weights[a] * rule.weights[b] *
                                       qval(std::hypot(x0 + 0.5 * h * rule.nodes[a],
                                                       x1 + 0.5 * h * rule.nodes[b]));
                        acc /= 4.0;
                    } else {
                        for (int a = 0; a < 5; ++a)
                            for (int b = 0; b < 5; ++b)
                                for (int cgl = 0; cgl < 5; ++cgl) {
                                    double xa = x0 + 0.5 * h * rule.nodes[a];
                                    double xb = x1 + 0.5 * h * rule.nodes[b];
                                    double xc = x2 + 0.5 * h * rule.nodes[cgl];
                                    acc += rule.weights[a] * rule.weights[b] * rule.weights[cgl] *
                                           qval(std::sqrt(xa * xa + xb * xb + xc * xc));
                                }
                        acc /= 8.0;
                    }
                    q[flat] = acc;
                } else {
                    q[flat] = qval(r);
                }
            }
        }
    });

    std::vector<cplx> qc(total);
    for (std::size_t i = 0; i < total; ++i) qc[i] = q[i];
    Fft::forward(qc, plan.shape);
    plan.q_modes.resize(total);
    for (std::size_t i = 0; i < total; ++i) plan.q_modes[i] = qc[i].real();
    return plan;
}

void embed_padded(const PaddedPlan& plan, const GridField& u, std::vector<cplx>& out) {
    if (!(u.spec == plan.field_spec))
        throw std::invalid_argument("embed_padded: field grid differs from plan");
    out.assign(plan.padded_size(), cplx{0.0, 0.0});
    const GridSpec& s = u.spec;
    std::array<std::size_t, 3> sh = {1, 1, 1}, psh = {1, 1, 1};
    for (int d = 0; d < s.n; ++d) {
        sh[d] = s.shape[d];
        psh[d] = plan.shape[d];
    }
    std::size_t idx = 0;
    for (std::size_t i0 = 0; i0 < sh[0]; ++i0)
        for (std::size_t i1 = 0; i1 < sh[1]; ++i1)
            for (std::size_t i2 = 0; i2 < sh[2]; ++i2, ++idx) {
                std::size_t p0 = i0 + plan.offset[0];
                std::size_t p1 = s.n >= 2 ? i1 + plan.offset[1] : 0;
                std::size_t p2 = s.n >= 3 ? i2 + plan.offset[2] : 0;
                std::size_t flat = p0;
                if (s.n >= 2) flat = flat * psh[1] + p1;
                if (s.n >= 3) flat = flat * psh[2] + p2;
                out[flat] = u.data[idx];
            }
}

GridField crop_padded(const PaddedPlan& plan, const std::vector<cplx>& padded) {
    GridField out(plan.field_spec);
    const GridSpec& s = plan.field_spec;
    std::array<std::size_t, 3> sh = {1, 1, 1}, psh = {1, 1, 1};
    for (int d = 0; d < s.n; ++d) {
        sh[d] = s.shape[d];
        psh[d] = plan.shape[d];
    }
    std::size_t idx = 0;
    for (std::size_t i0 = 0; i0 < sh[0]; ++i0)
        for (std::size_t i1 = 0; i1 < sh[1]; ++i1)
            for (std::size_t i2 = 0; i2 < sh[2]; ++i2, ++idx) {
                std::size_t p0 = i0 + plan.offset[0];
                std::size_t p1 = s.n >= 2 ? i1 + plan.offset[1] : 0;
                std::size_t p2 = s.n >= 3 ? i2 + plan.offset[2] : 0;
                std::size_t flat = p0;
                if (s.n >= 2) flat = flat * psh[1] + p1;
                if (s.n >= 3) flat = flat * psh[2] + p2;
                out.data[idx] = padded[flat].real();
            }
    return out;
}

double plan_frequency(const PaddedPlan& plan, int axis, std::size_t index) {
    return fft_frequency(index, plan.shape[axis], plan.h);
}

namespace {

void check_wraparound(const PaddedPlan& plan, const std::vector<cplx>& padded) {
    // Energy within one cell of the pad boundary must stay negligible.
    std::array<std::size_t, 3> psh = {1, 1, 1};
    for (int d = 0; d < plan.n; ++d) psh[d] = plan.shape[d];
    double total = 0.0, boundary = 0.0;
    std::size_t idx = 0;
    for (std::size_t i0 = 0; i0 < psh[0]; ++i0)
        for (std::size_t i1 = 0; i1 < psh[1]; ++i1)
            for (std::size_t i2 = 0; i2 < psh[2]; ++i2, ++idx) {
                double m = std::norm(padded[idx]);
                total += m;
                bool edge = (i0 == 0 || i0 + 1 == psh[0]);
                if (plan.n >= 2) edge = edge || (i1 == 0 || i1 + 1 == psh[1]);
                if (plan.n >= 3) edge = edge || (i2 == 0 || i2 + 1 == psh[2]);
                if (edge) boundary += m;
            }
    if (total > 0 && boundary > 1e-12 * total)
        throw std::runtime_error("gradient_fft: insufficient padding (wraparound detected)");
}

} // namespace

GridVectorField gradient_fft(const PaddedPlan& plan, const GridField& u) {
    std::vector<cplx> uhat;
    embed_padded(plan, u, uhat);
    Fft::forward(uhat, plan.shape);
    const double hn = std::pow(plan.h, plan.n);
    const std::size_t total = plan.padded_size();

    // conv modes: Qhat_grid * uhat * h^n
    parallel_for(total, [&](std::size_t i) { uhat[i] *= plan.q_modes[i] * hn; });

    GridVectorField out(plan.field_spec);
    std::array<std::size_t, 3> psh = {1, 1, 1};
    for (int d = 0; d < plan.n; ++d) psh[d] = plan.shape[d];

    std::vector<cplx> comp(total);
    for (int d = 0; d < plan.n; ++d) {
        // spectral derivative: multiply by 2 pi i xi_d, Nyquist mode zeroed
        parallel_for(total, [&](std::size_t flat) {
            std::size_t rem = flat, iv[3] = {0, 0, 0};
            for (int a = plan.n - 1; a >= 0; --a) {
                iv[a] = rem % psh[a];
                rem /= psh[a];
            }
            std::size_t m = iv[d];
            double xi = fft_frequency(m, psh[d], plan.h);
            if (2 * m == psh[d]) xi = 0.0;
            comp[flat] = uhat[flat] * cplx{0.0, 2.0 * M_PI * xi};
        });
        Fft::inverse(comp, plan.shape);
        check_wraparound(plan, comp);
        out.components[d] = crop_padded(plan, comp);
    }
    return out;
}

GridVectorField gradient_fft(const RadialKernel& kernel, const PotentialTable& table,
                             const GridField& u) {
    return gradient_fft(make_padded_plan(kernel, table, u.spec), u);
}

double check_ibp(const RadialKernel& kernel, const GridField& u, const GridVectorField& phi) {
    if (!(u.spec == phi.spec)) throw std::invalid_argument("check_ibp: grids differ");
    StencilCache st = build_stencil(kernel, u.spec.spacing);
    GridVectorField gu = gradient_direct(st, u);
    GridField divphi = divergence_direct(st, phi);
    const double hn = std::pow(u.spec.spacing, u.spec.n);
    double pairing = 0.0;
    for (int d = 0; d < u.spec.n; ++d)
        for (std::size_t i = 0; i < u.spec.size(); ++i)
            pairing += gu.components[d].data[i] * phi.components[d].data[i] * hn;
    for (std::size_t i = 0; i < u.spec.size(); ++i)
        pairing += u.data[i] * divphi.data[i] * hn;
    double nu = lp_norm(u, 2.0), nphi = lp_norm(phi, 2.0);
    if (nu == 0 || nphi == 0) return 0.0;
    return std::abs(pairing) / (nu * nphi);
}

double leibniz_check(const RadialKernel& kernel, const GridField& f, const GridField& g) {
    if (!(f.spec == g.spec)) throw std::invalid_argument("leibniz_check: grids differ");
    StencilCache st = build_stencil(kernel, f.spec.spacing);
    const GridSpec& s = f.spec;
    GridField fg(s);
    for (std::size_t i = 0; i < s.size(); ++i) fg.data[i] = f.data[i] * g.data[i];

    GridVectorField lhs = gradient_direct(st, fg);
    GridVectorField gg = gradient_direct(st, g);

    // commutator: stencil part sum_z K(z)(f(x)-f(x-z)) g(x-z), near-cell part
    // c (grad_h(fg) - f grad_h g)
    GridVectorField stencil_fg(s), stencil_g(s);
    apply_stencil_components(st, fg, stencil_fg);
    apply_stencil_components(st, g, stencil_g);
    GridVectorField grad_fg = fd4_gradient(fg);
    GridVectorField grad_g = fd4_gradient(g);

    double num = 0.0, den = 0.0;
    const double c = st.near_cell_coefficient;
    for (int d = 0; d < s.n; ++d)
        for (std::size_t i = 0; i < s.size(); ++i) {
            double kf = stencil_fg.components[d].data[i] -
                        f.data[i] * stencil_g.components[d].data[i] +
                        c * (grad_fg.components[d].data[i] - f.data[i] * grad_g.components[d].data[i]);
            double r = lhs.components[d].data[i] - f.data[i] * gg.components[d].data[i] - kf;
            num += r * r;
            den += lhs.components[d].data[i] * lhs.components[d].data[i];
        }
    return den > 0 ? std::sqrt(num / den) : 0.0;
}

double mollify_commute_check(const RadialKernel& kernel, const GridField& u,
                             double mollifier_width) {
    const GridSpec& s = u.spec;
    const double h = s.spacing;
    if (!(mollifier_width > 2 * h))
        throw std::invalid_argument("mollify_commute_check: width unresolvable");
    const int R = static_cast<int>(std::floor(mollifier_width / h));

    // normalized discrete bump phi on the offset box
    std::array<int, 3> span{0, 0, 0};
    for (int d = 0; d < s.n; ++d) span[d] = R;
    std::vector<double> phi;
    double sum = 0.0;
    for (int a = -span[0]; a <= span[0]; ++a)
        for (int b = -span[1]; b <= span[1]; ++b)
            for (int c = -span[2]; c <= span[2]; ++c) {
                double q = (a * a + b * b + c * c) * h * h / (mollifier_width * mollifier_width);
                double v = q < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - q)) : 0.0;
                phi.push_back(v);
                sum += v;
            }
    const double hn = std::pow(h, s.n);
    for (double& v : phi) v /= sum * hn;

    auto convolve = [&](const GridField& w) {
        GridField out(s);
        std::array<std::size_t, 3> sh = {1, 1, 1};
        for (int d = 0; d < s.n; ++d) sh[d] = s.shape[d];
        parallel_for(sh[0], [&](std::size_t i0) {
            for (std::size_t i1 = 0; i1 < sh[1]; ++i1)
                for (std::size_t i2 = 0; i2 < sh[2]; ++i2) {
                    double acc = 0.0;
                    std::size_t pi = 0;
                    for (int a = -span[0]; a <= span[0]; ++a)
                        for (int b = -span[1]; b <= span[1]; ++b)
                            for (int c = -span[2]; c <= span[2]; ++c, ++pi) {
                                if (phi[pi] == 0.0) continue;
                                std::ptrdiff_t j0 = static_cast<std::ptrdiff_t>(i0) - a;
                                std::ptrdiff_t j1 = static_cast<std::ptrdiff_t>(i1) - b;
                                std::ptrdiff_t j2 = static_cast<std::ptrdiff_t>(i2) - c;
                                if (j0 < 0 || j0 >= static_cast<std::ptrdiff_t>(sh[0])) continue;
                                if (s.n >= 2 && (j1 < 0 || j1 >= static_cast<std::ptrdiff_t>(sh[1]))) continue;
                                if (s.n >= 3 && (j2 < 0 || j2 >= static_cast<std::ptrdiff_t>(sh[2]))) continue;
                                std::size_t flat = static_cast<std::size_t>(j0);
                                if (s.n >= 2) flat = flat * sh[1] + static_cast<std::size_t>(j1);
                                if (s.n >= 3) flat = flat * sh[2] + static_cast<std::size_t>(j2);
                                acc += phi[pi] * w.data[flat];
                            }
                    std::size_t flat = i0;
                    if (s.n >= 2) flat = flat * sh[1] + i1;
                    if (s.n >= 3) flat = flat * sh[2] + i2;
                    out.data[flat] = acc * hn;
                }
        });
        return out;
    };

    StencilCache st = build_stencil(kernel, h);
    GridField mu = convolve(u);
    GridVectorField g_mu = gradient_direct(st, mu);
    GridVectorField gu = gradient_direct(st, u);
    double num = 0.0, den = 0.0;
    for (int d = 0; d < s.n; ++d) {
        GridField m_gu = convolve(gu.components[d]);
        for (std::size_t i = 0; i < s.size(); ++i) {
            double r = g_mu.components[d].data[i] - m_gu.data[i];
            num += r * r;
            den += gu.components[d].data[i] * gu.components[d].data[i];
        }
    }
    return den > 0 ? std::sqrt(num / den) : 0.0;
}

CarryoverResult carryover_check(const RadialKernel& k1, const RadialKernel& k2,
                                const GridField& u) {
    CarryoverResult res;
    const double dmax = std::max(k1.delta, k2.delta);
    auto diff = [&](double t) { return std::abs(k1(t) - k2(t)) * std::pow(t, k1.n - 2); };
    IntegralResult integ = integrate_graded(diff, 0.0, dmax, true);
    if (!integ.ok()) {
        res.comparable = false;
        return res;
    }
    res.comparable = true;

    const double h = u.spec.spacing;
    StencilCache s1 = build_stencil(k1, h);
    StencilCache s2 = build_stencil(k2, h);
    GridVectorField g1 = gradient_direct(s1, u);
    GridVectorField g2 = gradient_direct(s2, u);

    // F*u with F built from the same cell-integrated weights: the stencil
    // parts difference is exactly -sum (K1-K2) u(x-z).
    const int M = std::max(s1.reach, s2.reach);
    StencilCache fd;
    fd.n = s1.n;
    fd.h = h;
    fd.reach = M;
    const std::size_t total = fd.box_size();
    for (int d = 0; d < fd.n; ++d) fd.k_factor[d].assign(total, 0.0);
    fd.weights.assign(total, 0.0);
    auto at_flat = [&](const StencilCache& st, std::array<int, 3> zi) -> std::size_t {
        std::size_t flat = static_cast<std::size_t>(zi[0] + st.reach);
        if (st.n >= 2) flat = flat * st.box_extent() + static_cast<std::size_t>(zi[1] + st.reach);
        if (st.n >= 3) flat = flat * st.box_extent() + static_cast<std::size_t>(zi[2] + st.reach);
        return flat;
    };
    std::array<int, 3> zi{0, 0, 0};
    for (zi[0] = -M; zi[0] <= M; ++zi[0])
        for (zi[1] = (fd.n >= 2 ? -M : 0); zi[1] <= (fd.n >= 2 ? M : 0); ++zi[1])
            for (zi[2] = (fd.n >= 3 ? -M : 0); zi[2] <= (fd.n >= 3 ? M : 0); ++zi[2]) {
                if (zi[0] == 0 && zi[1] == 0 && zi[2] == 0) continue;
                std::size_t f = at_flat(fd, zi);
                for (int d = 0; d < fd.n; ++d) {
                    double v1 = 0.0, v2 = 0.0;
                    if (std::abs(zi[0]) <= s1.reach && std::abs(zi[1]) <= s1.reach &&
                        std::abs(zi[2]) <= s1.reach)
                        v1 = s1.k_factor[d][at_flat(s1, zi)];
                    if (std::abs(zi[0]) <= s2.reach && std::abs(zi[1]) <= s2.reach &&
                        std::abs(zi[2]) <= s2.reach)
                        v2 = s2.k_factor[d][at_flat(s2, zi)];
                    fd.k_factor[d][f] = v1 - v2;  // apply() negates: F*u = -sum(K1-K2) u
                }
            }
    GridVectorField fu(u.spec);
    apply_stencil_components(fd, u, fu);

    double num = 0.0, den = 0.0;
    for (int d = 0; d < u.spec.n; ++d)
        for (std::size_t i = 0; i < u.spec.size(); ++i) {
            double r = g1.components[d].data[i] - g2.components[d].data[i] -
                       fu.components[d].data[i];
            num += r * r;
            den += g1.components[d].data[i] * g1.components[d].data[i];
        }
    res.residual = den > 0 ? std::sqrt(num / den) : 0.0;
    return res;
}

} // namespace nlgrad
