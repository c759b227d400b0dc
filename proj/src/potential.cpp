#include "nlgrad/potential.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace nlgrad {

double sphere_area(int n) {
    switch (n) {
        case 1: return 2.0;
        case 2: return 2.0 * M_PI;
        case 3: return 4.0 * M_PI;
    }
    throw std::invalid_argument("sphere_area: n must be 1, 2 or 3");
}

PchipInterpolant::PchipInterpolant(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n)
        throw std::invalid_argument("PchipInterpolant: need matching arrays, size >= 2");
    d_.resize(n);
    std::vector<double> h(n - 1), s(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        h[i] = x_[i + 1] - x_[i];
        if (!(h[i] > 0)) throw std::invalid_argument("PchipInterpolant: abscissae not increasing");
        s[i] = (y_[i + 1] - y_[i]) / h[i];
    }
    d_[0] = s[0];
    d_[n - 1] = s[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (s[i - 1] * s[i] <= 0) {
            d_[i] = 0.0;
        } else {
            double w1 = 2 * h[i] + h[i - 1];
            double w2 = h[i] + 2 * h[i - 1];
            d_[i] = (w1 + w2) / (w1 / s[i - 1] + w2 / s[i]);
        }
    }
    // Endpoint slopes limited to keep monotonicity.
    auto limit_end = [&](std::size_t i, double sl) {
        if (d_[i] * sl <= 0) d_[i] = 0;
        else if (std::abs(d_[i]) > 3 * std::abs(sl)) d_[i] = 3 * sl;
    };
    limit_end(0, s[0]);
    limit_end(n - 1, s[n - 2]);
}

double PchipInterpolant::operator()(double x) const {
    if (x <= x_.front()) return y_.front();
    if (x >= x_.back()) return y_.back();
    std::size_t hi = std::upper_bound(x_.begin(), x_.end(), x) - x_.begin();
    std::size_t lo = hi - 1;
    double h = x_[hi] - x_[lo];
    double t = (x - x_[lo]) / h;
    double h00 = (1 + 2 * t) * (1 - t) * (1 - t);
    double h10 = t * (1 - t) * (1 - t);
    double h01 = t * t * (3 - 2 * t);
    double h11 = t * t * (t - 1);
    return h00 * y_[lo] + h10 * h * d_[lo] + h01 * y_[hi] + h11 * h * d_[hi];
}

double eval_Q(const RadialKernel& kernel, double r, const QuadratureSpec& spec) {
    if (!(r > 0)) throw std::invalid_argument("eval_Q: r must be positive (Q may be infinite at 0)");
    if (r >= kernel.delta) return 0.0;
    auto f = [&](double t) { return kernel(t) / t; };
    return integrate_adaptive(f, r, kernel.delta, spec).value;
}

std::vector<double> make_potential_radii(const RadialKernel& kernel, double r_min,
                                         int per_decade) {
    r_min = std::min(r_min, kernel.delta / 4);
    const double decades = std::log10(kernel.delta / r_min);
    const int count = static_cast<int>(std::ceil(decades * per_decade)) + 1;
    std::vector<double> radii(count);
    for (int i = 0; i < count; ++i)
        radii[i] = r_min * std::pow(kernel.delta / r_min, static_cast<double>(i) / (count - 1));
    radii.back() = kernel.delta;
    return radii;
}

PotentialTable::PotentialTable(const RadialKernel& kernel, std::vector<double> radii,
                               const QuadratureSpec& spec)
    : n_(kernel.n), delta_(kernel.delta), radii_(std::move(radii)) {
    if (radii_.empty() || !(radii_.front() > 0) || radii_.back() > kernel.delta * (1 + 1e-12))
        throw std::invalid_argument("PotentialTable: radii must lie in (0, delta]");
    const std::size_t m = radii_.size();
    values_.resize(m);

    // Q values by a single backward accumulation: Q(r_i) = Q(r_{i+1}) + int_{r_i}^{r_{i+1}}.
    values_[m - 1] = eval_Q(kernel, radii_[m - 1], spec);
    auto f = [&](double t) { return kernel(t) / t; };
    for (std::size_t i = m - 1; i-- > 0;) {
        double inc = integrate_adaptive(f, radii_[i], radii_[i + 1], spec).require();
        values_[i] = values_[i + 1] + inc;
    }
    for (std::size_t i = 0; i + 1 < m; ++i)
        if (values_[i] < values_[i + 1]) throw std::runtime_error("PotentialTable: Q not monotone");

    // Cumulative mass M(h) = int_0^h rho(t) t^{n-1} dt on the same radii.
    auto mass = [&](double t) { return kernel(t) * std::pow(t, n_ - 1); };
    std::vector<double> mvals(m);
    mvals[0] = integrate_graded(mass, 0.0, radii_[0], true, spec).require();
    for (std::size_t i = 1; i < m; ++i)
        mvals[i] = mvals[i - 1] + integrate_adaptive(mass, radii_[i - 1], radii_[i], spec).require();

    l1_norm_ = sphere_area(n_) / n_ * mvals[m - 1];

    std::vector<double> lx(m);
    for (std::size_t i = 0; i < m; ++i) lx[i] = std::log(radii_[i]);
    interp_ = PchipInterpolant(lx, values_);
    mass_ = PchipInterpolant(lx, mvals);
}

double PotentialTable::value(double r) const {
    if (r >= delta_) return 0.0;
    if (r < radii_.front() * (1 - 1e-9))
        throw std::out_of_range("PotentialTable::value: r below tabulated range");
    return std::max(0.0, interp_(std::log(r)));
}

double PotentialTable::cell_average(double h) const {
    if (!(h > 0)) throw std::invalid_argument("PotentialTable::cell_average: h must be positive");
    // avg over B_h = M(h)/h^n + Q(h), from int_{B_h} Q = (sigma/n)[M(h) + h^n Q(h)].
    double hc = std::min(h, delta_);
    double M = mass_(std::log(std::max(hc, radii_.front())));
    double tail = value(std::max(h, radii_.front()));
    return M / std::pow(h, n_) + tail;
}

void PotentialTable::write_csv(const std::string& path) const {
    std::FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw std::runtime_error("cannot open for writing: " + path);
    std::fprintf(fp, "r,Q\n");
    for (std::size_t i = 0; i < radii_.size(); ++i)
        std::fprintf(fp, "%.17g,%.17g\n", radii_[i], values_[i]);
    std::fclose(fp);
}

QDecayReport check_Q_decay(const PotentialTable& table, const RadialKernel& kernel, double M) {
    if (!(M > 0)) throw std::invalid_argument("check_Q_decay: M must be positive");
    QDecayReport rep;
    rep.M = M;
    for (std::size_t i = 0; i < table.radii().size(); ++i) {
        double r = table.radii()[i];
        if (r < M || r >= kernel.delta) continue;
        rep.sup_ratio = std::max(rep.sup_ratio,
                                 table.values()[i] * std::pow(r, kernel.n - 1));
    }
    return rep;
}

} // namespace nlgrad
