#ifndef NLGRAD_KERNELS_HPP
#define NLGRAD_KERNELS_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace nlgrad {

// Radial kernel rho(x) = profile(|x|), supported in |x| <= delta. The
// singular regime checked by the hypotheses lives on (0, epsilon].
struct RadialKernel {
    int n = 1;
    std::function<double(double)> profile;
    double delta = 1.0;
    double epsilon = 0.5;
    std::function<double(double)> profile_dt;  // optional closed-form d/dt
    std::string label;

    double operator()(double t) const { return profile(t); }
    bool has_derivative() const { return static_cast<bool>(profile_dt); }
};

enum class GrowthClass { vanishes, bounded_positive, diverges, inconclusive };

struct HypothesisReport {
    bool h0_ok = false;
    bool h1_ok = false;
    bool h2_ok = false;
    bool h3_ok = false;
    bool h4_ok = false;
    std::optional<double> mu;      // doubling constant, (0,1)
    std::optional<double> sigma;   // almost-decrease exponent of t^{n+sigma-1} rho
    std::optional<double> gamma;   // almost-increase exponent of t^{n+gamma-1} rho
    std::vector<double> ck;        // derivative-bound constants, ck[k-1] for order k
    GrowthClass limit_class = GrowthClass::inconclusive;
    std::vector<std::string> notes;

    bool all_ok() const { return h0_ok && h1_ok && h2_ok && h3_ok && h4_ok; }
};

enum class KernelKind {
    indicator_riesz,   // |x|^{-(n+s-1)} on B_1
    smooth_riesz,      // chi(|x|) |x|^{-(n+s-1)}, chi == 1 near 0, smooth descent
    log_enhanced,      // (-log|x|) |x|^{-(n+s-1)} on B_1
    log_damped,        // |x|^{-(n+s-1)} / (-log|x|) on B_{1/e}
    variable_exponent  // |x|^{-(n+s(|x|)-1)}
};

enum class ChiCutoff { indicator, bump };

struct KernelCatalogEntry {
    KernelKind kind = KernelKind::indicator_riesz;
    double s = 0.5;
    std::function<double(double)> s_fn;       // for variable_exponent; default 0.45 + 0.2 t
    std::function<double(double)> s_fn_dt;
    std::optional<double> delta_override;
    std::optional<double> epsilon_override;
    ChiCutoff chi = ChiCutoff::indicator;
};

RadialKernel make_catalog_kernel(const KernelCatalogEntry& entry, int n);

// The five catalog kernels at default parameters, in a fixed order.
std::vector<RadialKernel> default_catalog(int n);

// Log-spaced hypothesis sample grid over [1e-8 delta, delta], 512 points per decade.
std::vector<double> make_hypothesis_grid(const RadialKernel& kernel);

HypothesisReport check_h0(const RadialKernel& kernel, const std::vector<double>& grid);
void check_h1(const RadialKernel& kernel, const std::vector<double>& grid, HypothesisReport& report);
void check_h2(const RadialKernel& kernel, const std::vector<double>& grid, int k_max, HypothesisReport& report);
void check_h3_h4(const RadialKernel& kernel, const std::vector<double>& grid, HypothesisReport& report);
GrowthClass classify_growth(const RadialKernel& kernel);
bool t2f_limit_check(const RadialKernel& kernel);

// All checks in sequence on the default grid.
HypothesisReport run_all_checks(const RadialKernel& kernel, int k_max = 4);

// INI kernel config: [kernel] section with kind, s, delta, epsilon, n, chi.
struct KernelConfig {
    KernelCatalogEntry entry;
    int n = 1;
};
KernelConfig load_kernel_config(const std::string& path);
RadialKernel kernel_from_config(const KernelConfig& config);

} // namespace nlgrad

#endif
