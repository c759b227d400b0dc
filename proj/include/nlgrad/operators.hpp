#ifndef NLGRAD_OPERATORS_HPP
#define NLGRAD_OPERATORS_HPP

#include "nlgrad/fft.hpp"
#include "nlgrad/fields.hpp"
#include "nlgrad/kernels.hpp"
#include "nlgrad/potential.hpp"

#include <array>
#include <string>
#include <vector>

namespace nlgrad {

// Lattice discretization of the interaction kernel on offsets within the
// horizon ball. Weights are per-cell integrals of rho (Gauss subcells), so
// the quadrature sees the singularity growth rather than point values; the
// origin cell is replaced by the analytic small-ball limit, which acts
// through a 4th-order central difference gradient.
struct StencilCache {
    std::string kernel_label;
    int n = 1;
    double h = 0.0;
    double delta = 0.0;
    int reach = 0;  // offsets span [-reach, reach] per axis
    // K_d(z) = w(z) z_d / |z|^2 stored as flat arrays over the offset box.
    std::array<std::vector<double>, 3> k_factor;
    std::vector<double> weights;  // w(z) = integral of rho over the offset cell
    double near_cell_coefficient = 0.0;

    std::size_t box_extent() const { return 2 * static_cast<std::size_t>(reach) + 1; }
    std::size_t box_size() const {
        std::size_t e = box_extent(), s = e;
        for (int d = 1; d < n; ++d) s *= e;
        return s;
    }
};

StencilCache build_stencil(const RadialKernel& kernel, double h);

GridVectorField gradient_direct(const StencilCache& stencil, const GridField& u);
GridVectorField gradient_direct(const RadialKernel& kernel, const GridField& u);

GridField divergence_direct(const StencilCache& stencil, const GridVectorField& phi);
GridField divergence_direct(const RadialKernel& kernel, const GridVectorField& phi);

// Zero-padded spectral plan shared by the FFT gradient and the inversion
// kernel: DFT modes of the grid tabulation of Q_rho.
struct PaddedPlan {
    GridSpec field_spec;
    int n = 1;
    double h = 0.0;
    std::vector<std::size_t> shape;          // padded, powers of two
    std::array<std::size_t, 3> offset{0, 0, 0};
    std::vector<double> q_modes;             // real DFT of the Q tabulation
    std::array<double, 3> pad_origin{0, 0, 0};

    std::size_t padded_size() const {
        std::size_t s = 1;
        for (std::size_t v : shape) s *= v;
        return s;
    }
};

PaddedPlan make_padded_plan(const RadialKernel& kernel, const PotentialTable& table,
                            const GridSpec& field_spec);

GridVectorField gradient_fft(const PaddedPlan& plan, const GridField& u);
GridVectorField gradient_fft(const RadialKernel& kernel, const PotentialTable& table,
                             const GridField& u);

// |<G u, Phi> + <u, div Phi>| / (|u|_2 |Phi|_2), h-weighted inner products.
double check_ibp(const RadialKernel& kernel, const GridField& u, const GridVectorField& phi);

// |G(fg) - f G g - K_f(g)|_2 / |G(fg)|_2 with the commutator K_f applied by
// direct stencil.
double leibniz_check(const RadialKernel& kernel, const GridField& f, const GridField& g);

// |G(phi*u) - phi*G u|_2 / |G u|_2 for a normalized discrete bump mollifier.
double mollify_commute_check(const RadialKernel& kernel, const GridField& u,
                             double mollifier_width);

struct CarryoverResult {
    bool comparable = false;
    double residual = 0.0;
};

// |G_1 u - G_2 u - F*u|_2 / |G_1 u|_2 with F(z) = (z/|z|)(rho2-rho1)(z)/|z|,
// gated on integrability of the kernel difference.
CarryoverResult carryover_check(const RadialKernel& k1, const RadialKernel& k2,
                                const GridField& u);

// 4th-order central difference gradient (zero extension past the grid).
GridVectorField fd4_gradient(const GridField& u);

// Embed/crop between a field grid and the padded lattice.
void embed_padded(const PaddedPlan& plan, const GridField& u, std::vector<cplx>& out);
GridField crop_padded(const PaddedPlan& plan, const std::vector<cplx>& padded);

// Frequency of padded-lattice mode index along one axis.
double plan_frequency(const PaddedPlan& plan, int axis, std::size_t index);

} // namespace nlgrad

#endif
