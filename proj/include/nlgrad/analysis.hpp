#ifndef NLGRAD_ANALYSIS_HPP
#define NLGRAD_ANALYSIS_HPP

#include "nlgrad/ftc.hpp"
#include "nlgrad/operators.hpp"
#include "nlgrad/symbol.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace nlgrad {

struct PoincareReport {
    std::vector<double> resolutions;        // grid spacings h
    std::vector<double> sigma_min;          // smallest singular value per h
    std::vector<double> poincare_constant;  // 1 / sigma_min
    std::vector<int> cg_iterations;         // worst inner CG count per h
    std::vector<bool> cg_converged;
    double trend = 0.0;                     // slope of ln sigma_min vs ln h
};

// Smallest singular value of the restricted nonlocal gradient (matrix-free
// FFT application, inverse iteration on A^T A with preconditioned CG solves).
PoincareReport poincare_estimate(const RadialKernel& kernel, const Box& omega,
                                 const std::vector<double>& resolutions,
                                 std::uint64_t seed = 1);

struct CompactnessReport {
    bool decays = false;          // M dropped below 1e-2 of its value at 4/eps
    double fitted_exponent = 0.0; // log-log slope of M over the top decade
    double m_start = 0.0;
    double m_end = 0.0;
};

// M(k) = 1/(2 pi k Qhat(k)) on k >= 4/eps.
CompactnessReport compactness_proxy(const SpectralSymbol& symbol, const RadialKernel& kernel,
                                    double k_max);

struct TranslationRow {
    double dist = 0.0;   // |zeta|
    double ratio = 0.0;  // |u - u(.+zeta)|_p / (omega(|zeta|) |G u|_p)
};
struct TranslationReport {
    std::vector<TranslationRow> rows;
    double sup_ratio = 0.0;
};

// Lattice shifts zeta given in grid cells along the first axis.
TranslationReport translation_estimate(const RadialKernel& kernel, const GridField& u,
                                       const GridVectorField& grad_u, double p,
                                       const std::vector<int>& shifts_cells);

// Empirical Morrey seminorm ratio over a fixed-seed random pair subsample.
double morrey_check(const RadialKernel& kernel, const GridField& u,
                    const GridVectorField& grad_u, double p, double sigma,
                    std::uint64_t seed = 0x6E6C6772u);

struct OrliczVerdict {
    bool positive = false;
    double tail_infimum = 0.0;
};

// Samples A^{-1}(t) / (omega(t^{-1/n}) t^{1/p}) on t in [1e2, 1e12]; the
// verdict is positive when the running infimum over the top two decades
// clears 1e-6.
OrliczVerdict orlicz_condition_check(const RadialKernel& kernel, double p, double gamma,
                                     const std::function<double(double)>& young_inverse);

struct ModulusProfile {
    double alpha = 0.0;
    std::vector<double> t_samples;
    std::vector<double> omega;
    std::vector<double> omega_alpha;
    double sigma = 0.0, gamma = 0.0;
    double envelope_constant = 0.0;  // smallest C with t^gamma/C <= omega <= C t^sigma
};

ModulusProfile modulus_profile(const RadialKernel& kernel, double sigma, double gamma,
                               double alpha, int samples = 256);

} // namespace nlgrad

#endif
