#ifndef NLGRAD_POTENTIAL_HPP
#define NLGRAD_POTENTIAL_HPP

#include "nlgrad/kernels.hpp"
#include "nlgrad/quadrature.hpp"

#include <string>
#include <vector>

namespace nlgrad {

// sigma_{n-1} = surface area of the unit sphere in R^n.
double sphere_area(int n);

// Monotone cubic (Fritsch-Carlson) interpolant on increasing abscissae.
class PchipInterpolant {
public:
    PchipInterpolant() = default;
    PchipInterpolant(std::vector<double> x, std::vector<double> y);
    double operator()(double x) const;
    double x_min() const { return x_.front(); }
    double x_max() const { return x_.back(); }

private:
    std::vector<double> x_, y_, d_;
};

// Q_rho(r) = int_r^delta rho(t)/t dt at a single radius r > 0; 0 for r >= delta.
double eval_Q(const RadialKernel& kernel, double r, const QuadratureSpec& spec = {});

// Radial tabulation of Q_rho with the L1 norm and the analytic ball averages
// used for singular grid cells.
class PotentialTable {
public:
    PotentialTable() = default;
    PotentialTable(const RadialKernel& kernel, std::vector<double> radii,
                   const QuadratureSpec& spec = {});

    const std::vector<double>& radii() const { return radii_; }
    const std::vector<double>& values() const { return values_; }
    double l1_norm() const { return l1_norm_; }
    double delta() const { return delta_; }
    int dim() const { return n_; }

    // Interpolated Q at r (0 beyond delta); r must be >= the smallest radius.
    double value(double r) const;
    // Average of Q_rho over the ball B_h, from the closed radial identity.
    double cell_average(double h) const;

    void write_csv(const std::string& path) const;

private:
    int n_ = 1;
    double delta_ = 1.0;
    double l1_norm_ = 0.0;
    std::vector<double> radii_, values_;
    PchipInterpolant interp_;
    PchipInterpolant mass_;  // int_0^h rho t^{n-1} dt on the same radii
};

// Log-spaced tabulation radii covering [r_min, delta].
std::vector<double> make_potential_radii(const RadialKernel& kernel, double r_min,
                                         int per_decade = 256);

struct QDecayReport {
    double sup_ratio = 0.0;  // sup over [M, delta) of Q(r) r^{n-1}
    double M = 0.0;
};
QDecayReport check_Q_decay(const PotentialTable& table, const RadialKernel& kernel, double M);

} // namespace nlgrad

#endif
