// Command-line front end: hypotheses -> symbol -> gradient -> reconstruct ->
// poincare -> compare, emitting CSV tables and field files.

#include "CLI11.hpp"
#include "nlgrad/analysis.hpp"
#include "nlgrad/ftc.hpp"

#include <clocale>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

using namespace nlgrad;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPropertyFail = 2;
constexpr int kExitInconclusive = 3;
constexpr int kExitUsage = 64;
constexpr int kExitNumeric = 70;

struct CsvFile {
    std::FILE* fp = nullptr;
    explicit CsvFile(const std::string& path) {
        fp = std::fopen(path.c_str(), "wb");
        if (!fp) throw std::runtime_error("cannot open for writing: " + path);
    }
    ~CsvFile() {
        if (fp) std::fclose(fp);
    }
    void row(const char* fmt, ...) {
        va_list args;
        va_start(args, fmt);
        std::vfprintf(fp, fmt, args);
        va_end(args);
        std::fputc('\n', fp);
    }
};

std::string out_path(const std::string& dir, const std::string& name) {
    std::filesystem::create_directories(dir);
    return (std::filesystem::path(dir) / name).string();
}

const char* growth_name(GrowthClass g) {
    switch (g) {
        case GrowthClass::vanishes: return "vanishes";
        case GrowthClass::bounded_positive: return "bounded_positive";
        case GrowthClass::diverges: return "diverges";
        case GrowthClass::inconclusive: return "inconclusive";
    }
    return "?";
}

Box parse_domain(const std::string& text, int n) {
    std::vector<double> vals;
    std::string cur;
    for (char c : text + ",") {
        if (c == ',') {
            if (!cur.empty()) vals.push_back(std::stod(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (static_cast<int>(vals.size()) != 2 * n)
        throw std::runtime_error("domain needs 2n comma-separated coordinates");
    Box box;
    for (int d = 0; d < n; ++d) {
        box.lo[d] = vals[2 * d];
        box.hi[d] = vals[2 * d + 1];
        if (!(box.lo[d] < box.hi[d])) throw std::runtime_error("domain box is empty");
    }
    return box;
}

GridField load_or_make_field(const std::string& field_path, const RadialKernel& kernel,
                             int res, double radius) {
    if (!field_path.empty()) return read_field(field_path);
    const double h = 1.0 / res;
    double half = radius + kernel.delta + 10 * h;
    GridSpec spec;
    spec.n = kernel.n;
    spec.spacing = h;
    for (int d = 0; d < kernel.n; ++d) {
        spec.shape[d] = static_cast<std::size_t>(std::llround(2 * half / h)) + 1;
        spec.origin[d] = -half;
    }
    return make_bump(spec, {0, 0, 0}, radius, 1.0);
}

int cmd_hypotheses(const std::string& config_path, const std::string& out_dir) {
    RadialKernel k = kernel_from_config(load_kernel_config(config_path));
    HypothesisReport rep = run_all_checks(k);
    bool t2f = t2f_limit_check(k);

    CsvFile csv(out_path(out_dir, "hypotheses.csv"));
    csv.row("check,verdict,value");
    csv.row("h0,%d,", rep.h0_ok ? 1 : 0);
    csv.row("h1,%d,%.17g", rep.h1_ok ? 1 : 0, rep.mu.value_or(0.0));
    csv.row("h2,%d,%.17g", rep.h2_ok ? 1 : 0, rep.ck.empty() ? 0.0 : rep.ck[0]);
    for (std::size_t i = 1; i < rep.ck.size(); ++i)
        csv.row("h2_c%zu,%d,%.17g", i + 1, rep.h2_ok ? 1 : 0, rep.ck[i]);
    csv.row("h3,%d,%.17g", rep.h3_ok ? 1 : 0, rep.sigma.value_or(0.0));
    csv.row("h4,%d,%.17g", rep.h4_ok ? 1 : 0, rep.gamma.value_or(0.0));
    csv.row("t2f_limit,%d,", t2f ? 1 : 0);
    csv.row("growth_class,,%s", growth_name(rep.limit_class));
    for (const std::string& note : rep.notes) csv.row("note,,%s", note.c_str());

    std::printf("kernel: %s\n", k.label.c_str());
    std::printf("h0=%d h1=%d h2=%d h3=%d h4=%d growth=%s\n", rep.h0_ok, rep.h1_ok, rep.h2_ok,
                rep.h3_ok, rep.h4_ok, growth_name(rep.limit_class));
    if (rep.limit_class == GrowthClass::inconclusive) return kExitInconclusive;
    return rep.all_ok() ? kExitOk : kExitPropertyFail;
}

int cmd_symbol(const std::string& config_path, double kmax, int samples,
               const std::string& method, const std::string& out_dir) {
    RadialKernel k = kernel_from_config(load_kernel_config(config_path));
    auto grid = default_k_grid(kmax, samples);
    SpectralSymbol bes = tabulate_symbol(k, grid, SymbolMethod::bessel);
    SpectralSymbol sin_route;
    const bool both = method == "both";
    const bool use_sine = method == "sine";
    if (both || use_sine) sin_route = tabulate_symbol(k, grid, SymbolMethod::sine_reduction);
    const SpectralSymbol& primary = use_sine ? sin_route : bes;

    BoundReport bounds = bound_report(primary, k, 2.0 / k.epsilon, kmax);

    CsvFile csv(out_path(out_dir, "symbol.csv"));
    if (both)
        csv.row("k,qhat,qhat_sine,agreement,lower_envelope,upper_envelope,positive");
    else
        csv.row("k,qhat,lower_envelope,upper_envelope,positive");
    bool all_positive = true;
    double worst_agreement = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double kk = grid[i];
        double q = primary.qhat()[i];
        all_positive = all_positive && q > 0;
        double lo = 0.0, hi = 0.0;
        if (kk >= 2.0 / k.epsilon) {
            double envelope = k(1.0 / kk) / std::pow(kk, k.n);
            lo = bounds.lower_ratio * envelope;
            hi = bounds.upper_ratio * envelope;
        }
        if (both) {
            double qs = sin_route.qhat()[i];
            double agreement = q != 0 ? std::abs(qs - q) / std::abs(q) : 0.0;
            worst_agreement = std::max(worst_agreement, agreement);
            csv.row("%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d", kk, q, qs, agreement, lo, hi,
                    q > 0 ? 1 : 0);
        } else {
            csv.row("%.17g,%.17g,%.17g,%.17g,%d", kk, q, lo, hi, q > 0 ? 1 : 0);
        }
    }
    std::printf("symbol: %zu samples to k=%.17g, positive=%d", grid.size(), kmax,
                all_positive ? 1 : 0);
    if (both) std::printf(", max cross-route disagreement %.3e", worst_agreement);
    std::printf("\n");
    return all_positive ? kExitOk : kExitPropertyFail;
}

int cmd_gradient(const std::string& config_path, const std::string& field_path, int res,
                 double radius, const std::string& method, const std::string& out_dir) {
    RadialKernel k = kernel_from_config(load_kernel_config(config_path));
    GridField u = load_or_make_field(field_path, k, res, radius);
    GridVectorField g;
    if (method == "direct") {
        g = gradient_direct(k, u);
    } else {
        PotentialTable table(k, make_potential_radii(k, u.spec.spacing / 4));
        g = gradient_fft(k, table, u);
    }
    write_vector_field(g, out_path(out_dir, "gradient"));
    write_csv_slice(g.components[0], out_path(out_dir, "gradient_c0.csv"));
    std::printf("gradient (%s): |G u|_2 = %.17g\n", method.c_str(), lp_norm(g, 2.0));
    return kExitOk;
}

int cmd_reconstruct(const std::string& config_path, const std::string& field_path, int res,
                    double radius, const std::string& domain, bool vprofile,
                    const std::string& out_dir) {
    RadialKernel k = kernel_from_config(load_kernel_config(config_path));
    GridField u = load_or_make_field(field_path, k, res, radius);
    Box omega;
    if (!domain.empty()) {
        omega = parse_domain(domain, k.n);
    } else {
        for (int d = 0; d < k.n; ++d) {
            omega.lo[d] = -(radius + 2 * u.spec.spacing);
            omega.hi[d] = radius + 2 * u.spec.spacing;
        }
    }
    PotentialTable table(k, make_potential_radii(k, u.spec.spacing / 4));
    SpectralSymbol sym =
        tabulate_symbol(k, default_k_grid(4.0 / u.spec.spacing), SymbolMethod::bessel);
    ReconstructionKernel recon = build_reconstruction(k, sym, table, u.spec, vprofile);
    if (vprofile) write_v_profile_csv(recon, k, out_path(out_dir, "v_profile.csv"));
    GridVectorField g = gradient_fft(recon.plan, u);
    GridField back = reconstruct(recon, g, omega, k.delta);

    double num = 0, den = 0;
    for (std::size_t i = 0; i < u.spec.size(); ++i) {
        double r = back.data[i] - u.data[i];
        num += r * r;
        den += u.data[i] * u.data[i];
    }
    double rel = den > 0 ? std::sqrt(num / den) : 0.0;
    write_field(back, out_path(out_dir, "reconstructed.nlgf"));
    CsvFile csv(out_path(out_dir, "reconstruct.csv"));
    csv.row("rel_l2_error");
    csv.row("%.17g", rel);
    std::printf("reconstruct: rel l2 error %.3e\n", rel);
    return rel < 1e-2 ? kExitOk : kExitPropertyFail;
}

int cmd_poincare(const std::string& config_path, const std::string& resolutions,
                 const std::string& domain, const std::string& out_dir,
                 std::uint64_t seed) {
    RadialKernel k = kernel_from_config(load_kernel_config(config_path));
    Box omega;
    if (!domain.empty()) {
        omega = parse_domain(domain, k.n);
    } else {
        for (int d = 0; d < k.n; ++d) {
            omega.lo[d] = -0.5;
            omega.hi[d] = 0.5;
        }
    }
    std::vector<double> hs;
    std::string cur;
    for (char c : resolutions + ",") {
        if (c == ',') {
            if (!cur.empty()) hs.push_back(1.0 / std::stod(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (hs.empty()) throw std::runtime_error("no resolutions given");
    PoincareReport rep = poincare_estimate(k, omega, hs, seed);

    CsvFile csv(out_path(out_dir, "poincare.csv"));
    csv.row("h,sigma_min,poincare_constant,cg_iterations,cg_converged");
    bool all_cg = true;
    for (std::size_t i = 0; i < rep.resolutions.size(); ++i) {
        csv.row("%.17g,%.17g,%.17g,%d,%d", rep.resolutions[i], rep.sigma_min[i],
                rep.poincare_constant[i], rep.cg_iterations[i],
                rep.cg_converged[i] ? 1 : 0);
        all_cg = all_cg && rep.cg_converged[i];
    }
    csv.row("trend,%.17g,,,", rep.trend);
    std::printf("poincare: trend %.4f, sigma_min", rep.trend);
    for (double s : rep.sigma_min) std::printf(" %.5g", s);
    std::printf("\n");
    return all_cg ? kExitOk : kExitInconclusive;
}

int cmd_compare(const std::string& config_path, const std::string& config2_path,
                double kmax, const std::string& out_dir) {
    RadialKernel k1 = kernel_from_config(load_kernel_config(config_path));
    RadialKernel k2 = kernel_from_config(load_kernel_config(config2_path));
    if (k1.n != k2.n) throw std::runtime_error("compare: kernels live in different dimensions");
    auto grid = default_k_grid(kmax, 300);
    SpectralSymbol s1 = tabulate_symbol(k1, grid, SymbolMethod::bessel);
    SpectralSymbol s2 = tabulate_symbol(k2, grid, SymbolMethod::bessel);

    std::vector<double> probe;
    for (std::size_t i = 1; i < grid.size(); ++i) probe.push_back(grid[i]);
    ComparisonReport rep = comparison_multiplier(s1, s2, probe);

    CsvFile csv(out_path(out_dir, "compare.csv"));
    csv.row("k,m");
    for (double kk : probe) csv.row("%.17g,%.17g", kk, s1.value(kk) / s2.value(kk));
    csv.row("sup_m,%.17g", rep.sup_m);
    csv.row("inf_m,%.17g", rep.inf_m);
    csv.row("mihlin_order1,%.17g", rep.mihlin_ratios[0]);
    csv.row("mihlin_order2,%.17g", rep.mihlin_ratios[1]);
    std::printf("compare: sup m = %.6g, inf m = %.6g, mihlin = %.4g / %.4g\n", rep.sup_m,
                rep.inf_m, rep.mihlin_ratios[0], rep.mihlin_ratios[1]);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    std::setlocale(LC_ALL, "C");
    CLI::App app{"nonlocal gradient toolkit"};
    app.require_subcommand(1);

    std::string kernel_path, kernel2_path, field_path, out_dir = ".", domain;
    std::string method = "fft", sym_method = "bessel", resolutions = "64,128,256";
    double kmax = 500.0, radius = 0.25;
    int samples = 400, res = 256;
    std::uint64_t seed = 1;

    CLI::App* hyp = app.add_subcommand("hypotheses", "verify kernel hypotheses");
    hyp->add_option("--kernel", kernel_path, "kernel config file")->required();
    hyp->add_option("--out", out_dir, "output directory");

    CLI::App* sym = app.add_subcommand("symbol", "tabulate the Fourier symbol");
    sym->add_option("--kernel", kernel_path)->required();
    sym->add_option("--kmax", kmax);
    sym->add_option("--samples", samples);
    sym->add_option("--method", sym_method)
        ->check(CLI::IsMember({"sine", "bessel", "both"}));
    sym->add_option("--out", out_dir);

    CLI::App* grad = app.add_subcommand("gradient", "apply the nonlocal gradient");
    grad->add_option("--kernel", kernel_path)->required();
    grad->add_option("--field", field_path, "input field (.nlgf); omit for a bump");
    grad->add_option("--res", res, "bump grid resolution");
    grad->add_option("--radius", radius, "bump radius");
    grad->add_option("--method", method)->check(CLI::IsMember({"direct", "fft"}));
    grad->add_option("--out", out_dir);

    bool vprofile = false;
    CLI::App* rec = app.add_subcommand("reconstruct", "invert the nonlocal gradient");
    rec->add_option("--kernel", kernel_path)->required();
    rec->add_option("--field", field_path);
    rec->add_option("--res", res);
    rec->add_option("--radius", radius);
    rec->add_option("--domain", domain, "omega box: x0,x1[,y0,y1[,z0,z1]]");
    rec->add_flag("--vprofile", vprofile, "also dump the radial |V| profile");
    rec->add_option("--out", out_dir);

    CLI::App* poi = app.add_subcommand("poincare", "estimate the Poincare constant");
    poi->add_option("--kernel", kernel_path)->required();
    poi->add_option("--resolutions", resolutions, "comma list of points per unit");
    poi->add_option("--domain", domain);
    poi->add_option("--seed", seed);
    poi->add_option("--out", out_dir);

    CLI::App* cmp = app.add_subcommand("compare", "symbol ratio of two kernels");
    cmp->add_option("--kernel", kernel_path)->required();
    cmp->add_option("--kernel2", kernel2_path)->required();
    cmp->add_option("--kmax", kmax);
    cmp->add_option("--out", out_dir);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (hyp->parsed()) return cmd_hypotheses(kernel_path, out_dir);
        if (sym->parsed()) return cmd_symbol(kernel_path, kmax, samples, sym_method, out_dir);
        if (grad->parsed())
            return cmd_gradient(kernel_path, field_path, res, radius, method, out_dir);
        if (rec->parsed())
            return cmd_reconstruct(kernel_path, field_path, res, radius, domain, vprofile,
                                   out_dir);
        if (poi->parsed())
            return cmd_poincare(kernel_path, resolutions, domain, out_dir, seed);
        if (cmp->parsed()) return cmd_compare(kernel_path, kernel2_path, kmax, out_dir);
    } catch (const io_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::runtime_error& e) {
        std::string msg = e.what();
        std::fprintf(stderr, "error: %s\n", msg.c_str());
        // config and file problems are usage errors, numerical ones are not
        if (msg.find("config") != std::string::npos ||
            msg.find("cannot open") != std::string::npos ||
            msg.find("domain") != std::string::npos ||
            msg.find("kind") != std::string::npos ||
            msg.find("key") != std::string::npos ||
            msg.find("section") != std::string::npos ||
            msg.find("resolutions") != std::string::npos)
            return kExitUsage;
        return kExitNumeric;
    }
    return kExitUsage;
}
