#ifndef NLGRAD_FTC_HPP
#define NLGRAD_FTC_HPP

#include "nlgrad/operators.hpp"
#include "nlgrad/symbol.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace nlgrad {

// Axis-aligned box region.
struct Box {
    std::array<double, 3> lo{0, 0, 0};
    std::array<double, 3> hi{0, 0, 0};

    double distance(const std::array<double, 3>& x, int n) const {
        double d2 = 0.0;
        for (int d = 0; d < n; ++d) {
            double g = std::max({lo[d] - x[d], x[d] - hi[d], 0.0});
            d2 += g * g;
        }
        return std::sqrt(d2);
    }
    bool contains(const std::array<double, 3>& x, int n) const {
        for (int d = 0; d < n; ++d)
            if (x[d] <= lo[d] || x[d] >= hi[d]) return false;
        return true;
    }
};

// Fourier-side inversion data: the per-mode division multiplier derived from
// the same grid symbol the FFT gradient applies, so the composition
// reconstruct(gradient_fft(u)) is the identity on every nonzero mode.
struct ReconstructionKernel {
    PaddedPlan plan;
    SpectralSymbol symbol;        // continuum symbol, kept for diagnostics
    double chi_cutoff_radius = 0.0;
    double epsilon = 0.0;
    // V tabulation on the padded lattice (wrapped coordinates), one array per
    // component; empty when not requested.
    std::array<std::vector<double>, 3> v_padded;
    bool has_v() const { return !v_padded[0].empty(); }
};

ReconstructionKernel build_reconstruction(const RadialKernel& kernel,
                                          const SpectralSymbol& symbol,
                                          const PotentialTable& table,
                                          const GridSpec& field_spec, bool tabulate_v);

// Per-mode product W(m) . lambda(m); 1 for every nonzero mode by construction.
double max_product_defect(const ReconstructionKernel& recon);

// u from its nonlocal gradient; the zero mode is fixed by forcing the mean of
// the reconstruction over lattice points farther than delta from omega to 0.
GridField reconstruct(const ReconstructionKernel& recon, const GridVectorField& G,
                      const Box& omega, double delta);

struct VBoundReport {
    double sup_value_bound = 0.0;     // sup |V(x)| |x|^{2n-1} rho(x) on (r_lo, r_hi)
    double sup_gradient_bound = 0.0;  // sup |grad V(x)| |x|^{2n} rho(x)
    double radiality_residual = 0.0;  // vector-radiality defect under grid symmetries
};
VBoundReport vrho_bound_check(const ReconstructionKernel& recon, const RadialKernel& kernel,
                              double r_lo, double r_hi);

struct VlpRow {
    double r = 0.0;      // ball radius or shift length
    double norm = 0.0;   // L^{p'} norm
    double ratio = 0.0;  // norm / (omega(r) r^{-n/p})
};
struct VlpTable {
    std::vector<VlpRow> ball_rows;
    std::vector<VlpRow> shift_rows;
    double doubling_constant = 0.0;  // sup omega(2r) / (2^gamma omega(r))
};
// Requires sigma p > n; the L^{p'} estimates only hold in that regime.
VlpTable vrho_lp_bounds(const ReconstructionKernel& recon, const RadialKernel& kernel,
                        double p, double sigma, double gamma,
                        const std::vector<double>& r_list,
                        const std::vector<std::array<double, 3>>& shifts, double R);

// Modulus of continuity omega(t) = 1 / (t^{n-1} rho(t)).
double modulus_omega(const RadialKernel& kernel, double t);

// CSV dump of the radial profile of |V| with the singular-bound envelope
// 1/(r^{2n-1} rho(r)); columns r, vmag, envelope.
void write_v_profile_csv(const ReconstructionKernel& recon, const RadialKernel& kernel,
                         const std::string& path);

} // namespace nlgrad

#endif
