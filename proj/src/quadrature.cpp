#include "nlgrad/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <queue>

namespace nlgrad {

namespace {

// 15-point Kronrod extension of 7-point Gauss (QUADPACK constants).
const double xgk[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};
const double wgk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
const double wg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct PanelEstimate {
    double value;
    double error;
};

PanelEstimate gk15(const Integrand& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double fc = f(c);
    double res_g = fc * wg[3];
    double res_k = fc * wgk[7];
    for (int j = 0; j < 7; ++j) {
        double x = h * xgk[j];
        double f1 = f(c - x);
        double f2 = f(c + x);
        res_k += wgk[j] * (f1 + f2);
        if (j % 2 == 1) res_g += wg[j / 2] * (f1 + f2);
    }
    double value = res_k * h;
    double err = std::abs((res_k - res_g) * h);
    // QUADPACK-style error sharpening
    if (err != 0.0) {
        double scale = std::pow(200.0 * err / std::max(std::abs(value), 1e-300), 1.5);
        if (scale < 1.0) err *= scale;
    }
    return {value, err};
}

struct Interval {
    double a, b, value, error;
    bool operator<(const Interval& o) const { return error < o.error; }
};

} // namespace

IntegralResult integrate_adaptive(const Integrand& f, double a, double b,
                                  const QuadratureSpec& spec) {
    IntegralResult out;
    if (!(b > a)) return out;
    PanelEstimate e0 = gk15(f, a, b);
    if (!std::isfinite(e0.value))
        throw std::runtime_error("quadrature: non-finite integrand value");
    std::priority_queue<Interval> heap;
    heap.push({a, b, e0.value, e0.error});
    double total = e0.value, toterr = e0.error;
    std::size_t used = 1;
    while (toterr > std::max(spec.abs_tol, spec.rel_tol * std::abs(total)) &&
           used < spec.max_subdivisions) {
        Interval worst = heap.top();
        heap.pop();
        double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) {  // cannot split further
            heap.push(worst);
            break;
        }
        PanelEstimate l = gk15(f, worst.a, mid);
        PanelEstimate r = gk15(f, mid, worst.b);
        if (!std::isfinite(l.value) || !std::isfinite(r.value))
            throw std::runtime_error("quadrature: non-finite integrand value");
        total += l.value + r.value - worst.value;
        toterr += l.error + r.error - worst.error;
        heap.push({worst.a, mid, l.value, l.error});
        heap.push({mid, worst.b, r.value, r.error});
        ++used;
    }
    out.value = total;
    out.error = toterr;
    out.status = toterr <= std::max(spec.abs_tol, spec.rel_tol * std::abs(total))
                     ? QuadStatus::converged
                     : QuadStatus::max_subdivisions;
    return out;
}

IntegralResult integrate_graded(const Integrand& f, double a, double b,
                                bool singular_at_a, const QuadratureSpec& spec) {
    IntegralResult out;
    if (!(b > a)) return out;
    if (!singular_at_a) return integrate_adaptive(f, a, b, spec);

    // Geometric panels [a + w*2^-(j+1), a + w*2^-j] toward a.
    const double w = b - a;
    QuadratureSpec panel_spec = spec;
    panel_spec.max_subdivisions = std::max<std::size_t>(64, spec.max_subdivisions / 64);

    double total = 0.0, toterr = 0.0;
    double prev = 0.0, prev_ratio = -1.0;
    int stable_ratio = 0;
    int grow = 0;
    const int max_panels = 1200;  // 2^-1200 underflows long before this
    for (int j = 0; j < max_panels; ++j) {
        double hi = a + w * std::ldexp(1.0, -j);
        double lo = a + w * std::ldexp(1.0, -(j + 1));
        if (lo <= a || hi <= lo) break;
        IntegralResult p = integrate_adaptive(f, lo, hi, panel_spec);
        total += p.value;
        toterr += p.error;
        double mag = std::abs(p.value);
        if (j > 0) {
            double pm = std::abs(prev);
            double ratio = pm > 0 ? mag / pm : 0.0;
            if (ratio >= 1.0 - 1e-9) {
                if (++grow >= 6) {
                    out.status = QuadStatus::diverged;
                    out.value = total;
                    return out;
                }
            } else {
                grow = 0;
            }
            if (prev_ratio > 0 && ratio > 0 && ratio < 1.0 - 1e-9 &&
                std::abs(ratio - prev_ratio) < 1e-6 * ratio && p.value * prev > 0) {
                ++stable_ratio;
            } else {
                stable_ratio = 0;
            }
            // Geometric tail: once the decay ratio locks in, extrapolate it.
            if (stable_ratio >= 4 && j >= 8) {
                double tail = p.value * ratio / (1.0 - ratio);
                if (std::abs(tail) <= std::max(spec.abs_tol, spec.rel_tol * std::abs(total))) {
                    total += tail;
                    toterr += std::abs(tail) * 1e-6 + p.error;
                    out.value = total;
                    out.error = toterr;
                    out.status = QuadStatus::converged;
                    return out;
                }
                if (j > 32) {
                    total += tail;
                    toterr += std::abs(tail) * 1e-4;
                    out.value = total;
                    out.error = toterr;
                    out.status = QuadStatus::converged;
                    return out;
                }
            }
            prev_ratio = ratio;
        }
        prev = p.value;
        if (std::abs(total) > 1e60) {
            out.status = QuadStatus::diverged;
            out.value = total;
            return out;
        }
        if (j >= 8 && mag <= 0.25 * std::max(spec.abs_tol, spec.rel_tol * std::abs(total))) {
            out.value = total;
            out.error = toterr;
            out.status = QuadStatus::converged;
            return out;
        }
    }
    out.value = total;
    out.error = toterr;
    out.status = QuadStatus::converged;
    return out;
}

IntegralResult integrate_oscillatory(const Integrand& g, double k, OscPhase phase,
                                     bool singular_origin, double L,
                                     const QuadratureSpec& spec) {
    if (!(k > 0)) throw std::invalid_argument("integrate_oscillatory: k must be positive");
    IntegralResult out;
    if (!(L > 0)) return out;

    const double two_pi_k = 2.0 * M_PI * k;
    auto weighted = [&](double r) {
        double ph = two_pi_k * r;
        double w = (phase == OscPhase::sin_phase) ? std::sin(ph) : std::cos(ph);
        return g(r) * w;
    };

    const double half = 1.0 / (2.0 * k);
    // First panel (0, min(half, L)] grades toward the origin.
    double first_hi = std::min(half, L);
    IntegralResult head = integrate_graded(weighted, 0.0, first_hi, singular_origin, spec);
    if (!head.ok()) return head;
    if (first_hi >= L) return head;

    const GaussRule& rule = gauss_legendre(spec.gauss_points);
    auto panel = [&](double a, double b) {
        double c = 0.5 * (a + b), h = 0.5 * (b - a);
        double acc = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i)
            acc += rule.weights[i] * weighted(c + h * rule.nodes[i]);
        return acc * h;
    };

    const std::size_t cap = spec.max_subdivisions;
    std::size_t npanels = static_cast<std::size_t>(std::ceil(L / half));
    double total = head.value, toterr = head.error;

    if (npanels <= cap) {
        // Compact support: the panel series terminates at L; sum it all.
        for (std::size_t j = 1;; ++j) {
            double a = j * half;
            if (a >= L) break;
            double b = std::min(a + half, L);
            double v = panel(a, b);
            if (!std::isfinite(v))
                throw std::runtime_error("integrate_oscillatory: non-finite amplitude");
            total += v;
        }
        out.value = total;
        out.error = toterr;
        return out;
    }

    // Truncated series: accelerate the alternating tail by pairwise averaging.
    std::vector<double> partial;
    partial.reserve(64);
    for (std::size_t j = 1; j <= cap; ++j) {
        double a = j * half;
        if (a >= L) break;
        double b = std::min(a + half, L);
        total += panel(a, b);
        if (j + 64 >= cap) partial.push_back(total);
    }
    for (int depth = 0; depth < 3 && partial.size() > 1; ++depth) {
        for (std::size_t i = 0; i + 1 < partial.size(); ++i)
            partial[i] = 0.5 * (partial[i] + partial[i + 1]);
        partial.pop_back();
    }
    out.value = partial.empty() ? total : partial.back();
    out.error = toterr + std::abs(total - out.value);
    return out;
}

const GaussRule& gauss_legendre(int n) {
    static std::map<int, GaussRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    // Newton iteration on Legendre P_n from Chebyshev initial guesses.
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it2 = 0; it2 < 100; ++it2) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= n; ++j) {
                double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        double wgt = 2.0 / ((1.0 - x * x) * pp * pp);
        rule.weights[i] = wgt;
        rule.weights[n - 1 - i] = wgt;
    }
    auto [pos, inserted] = cache.emplace(n, std::move(rule));
    return pos->second;
}

namespace {

// J1 rational minimax tables (Hart / Boost, double precision).
const double j1_P1[] = {-1.4258509801366645672e+11, 6.6781041261492395835e+09,
                        -1.1548696764841276794e+08, 9.8062904098958257677e+05,
                        -4.4615792982775076130e+03, 1.0650724020080236441e+01,
                        -1.0767857011487300348e-02};
const double j1_Q1[] = {4.1868604460820175290e+12, 4.2091902282580133541e+10,
                        2.0228375140097033958e+08, 5.9117614494174794095e+05,
                        1.0742272239517380498e+03, 1.0, 0.0};
const double j1_P2[] = {-1.7527881995806511112e+16, 1.6608531731299018674e+15,
                        -3.6658018905416665164e+13, 3.5580665670910619166e+11,
                        -1.8113931269860667829e+09, 5.0793266148011179143e+06,
                        -7.5023342220781607561e+03, 4.6179191852758252278e+00};
const double j1_Q2[] = {1.7253905888447681194e+18, 1.7128800897135812012e+16,
                        8.4899346165481429307e+13, 2.7622777286244082666e+11,
                        6.4872502899596389593e+08, 1.1267125065029138050e+06,
                        1.3886978985861357615e+03, 1.0};
const double j1_PC[] = {-4.4357578167941278571e+06, -9.9422465050776411957e+06,
                        -6.6033732483649391093e+06, -1.5235293511811373833e+06,
                        -1.0982405543459346727e+05, -1.6116166443246101165e+03, 0.0};
const double j1_QC[] = {-4.4357578167941278568e+06, -9.9341243899345856590e+06,
                        -6.5853394797230870728e+06, -1.5118095066341608816e+06,
                        -1.0726385991103820119e+05, -1.4550094401904961825e+03, 1.0};
const double j1_PS[] = {3.3220913409857223519e+04, 8.5145160675335701966e+04,
                        6.6178836581270835179e+04, 1.8494262873223866797e+04,
                        1.7063754290207680021e+03, 3.5265133846636032186e+01, 0.0};
const double j1_QS[] = {7.0871281941028743574e+05, 1.8194580422439972989e+06,
                        1.4194606696037208929e+06, 4.0029443582266975117e+05,
                        3.7890229745772202641e+04, 8.6383677696049909675e+02, 1.0};

template <std::size_t N>
double eval_rational(const double (&p)[N], const double (&q)[N], double x) {
    // Horner from the high end keeps both polynomials on a common scale.
    if (x <= 1.0) {
        double np = p[N - 1], nq = q[N - 1];
        for (int i = static_cast<int>(N) - 2; i >= 0; --i) {
            np = np * x + p[i];
            nq = nq * x + q[i];
        }
        return np / nq;
    }
    double z = 1.0 / x;
    double np = p[0], nq = q[0];
    for (std::size_t i = 1; i < N; ++i) {
        np = np * z + p[i];
        nq = nq * z + q[i];
    }
    return np / nq;
}

double bessel_j1_impl(double x) {
    const double x1 = 3.8317059702075123156e+00;
    const double x2 = 7.0155866698156187535e+00;
    const double x11 = 9.810e+02, x12 = -3.2527979248768438556e-04;
    const double x21 = 1.7960e+03, x22 = -3.8330184381246462950e-05;

    double w = std::abs(x);
    double value;
    if (x == 0.0) return 0.0;
    if (w <= 4.0) {
        double y = x * x;
        double r = eval_rational(j1_P1, j1_Q1, y);
        value = w * (w + x1) * ((w - x11 / 256) - x12) * r;
    } else if (w <= 8.0) {
        double y = x * x;
        double r = eval_rational(j1_P2, j1_Q2, y);
        value = w * (w + x2) * ((w - x21 / 256) - x22) * r;
    } else {
        double y = 8.0 / w;
        double y2 = y * y;
        double rc = eval_rational(j1_PC, j1_QC, y2);
        double rs = eval_rational(j1_PS, j1_QS, y2);
        double factor = 1.0 / (std::sqrt(w) * std::sqrt(M_PI));
        double sx = std::sin(w), cx = std::cos(w);
        value = factor * (rc * (sx - cx) + y * rs * (sx + cx));
    }
    return x < 0 ? -value : value;
}

// sin(x)/x - cos(x), stable near 0 via sum_{m>=1} (-1)^{m+1} x^{2m} (2m)/(2m+1)!
double sinc_minus_cos(double x) {
    if (std::abs(x) > 0.5) return std::sin(x) / x - std::cos(x);
    double x2 = x * x;
    double term = x2 / 3.0;
    double sum = term;
    for (int m = 2; m < 16; ++m) {
        term *= -x2 * (2.0 * m) / ((2.0 * m - 2.0) * (2.0 * m) * (2.0 * m + 1.0));
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
}

} // namespace

double bessel_j(double nu, double x) {
    if (x < 0) throw std::invalid_argument("bessel_j: negative argument");
    if (!std::isfinite(x)) throw std::invalid_argument("bessel_j: non-finite argument");
    if (nu == 0.5) {
        if (x == 0.0) return 0.0;
        return std::sqrt(2.0 / (M_PI * x)) * std::sin(x);
    }
    if (nu == 1.0) return bessel_j1_impl(x);
    if (nu == 1.5) {
        if (x == 0.0) return 0.0;
        return std::sqrt(2.0 / (M_PI * x)) * sinc_minus_cos(x);
    }
    throw std::invalid_argument("bessel_j: unsupported order");
}

} // namespace nlgrad
