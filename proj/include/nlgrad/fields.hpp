#ifndef NLGRAD_FIELDS_HPP
#define NLGRAD_FIELDS_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace nlgrad {

// Uniform isotropic grid: row-major storage, last axis fastest.
struct GridSpec {
    int n = 1;
    std::array<std::size_t, 3> shape{0, 0, 0};
    double spacing = 1.0;
    std::array<double, 3> origin{0.0, 0.0, 0.0};

    std::size_t size() const {
        std::size_t s = 1;
        for (int d = 0; d < n; ++d) s *= shape[d];
        return s;
    }
    double coord(int axis, std::size_t index) const {
        return origin[axis] + spacing * static_cast<double>(index);
    }
    bool operator==(const GridSpec& o) const {
        if (n != o.n || spacing != o.spacing) return false;
        for (int d = 0; d < n; ++d)
            if (shape[d] != o.shape[d] || origin[d] != o.origin[d]) return false;
        return true;
    }
};

GridSpec make_grid_spec(int n, std::size_t points_per_axis, double spacing,
                        const std::array<double, 3>& origin);

struct GridField {
    GridSpec spec;
    std::vector<double> data;

    GridField() = default;
    explicit GridField(const GridSpec& s) : spec(s), data(s.size(), 0.0) {}

    double& at(std::size_t i0, std::size_t i1 = 0, std::size_t i2 = 0) {
        return data[index(i0, i1, i2)];
    }
    double at(std::size_t i0, std::size_t i1 = 0, std::size_t i2 = 0) const {
        return data[index(i0, i1, i2)];
    }
    std::size_t index(std::size_t i0, std::size_t i1 = 0, std::size_t i2 = 0) const {
        if (spec.n == 1) return i0;
        if (spec.n == 2) return i0 * spec.shape[1] + i1;
        return (i0 * spec.shape[1] + i1) * spec.shape[2] + i2;
    }
};

struct GridVectorField {
    GridSpec spec;
    std::vector<GridField> components;

    GridVectorField() = default;
    explicit GridVectorField(const GridSpec& s) : spec(s) {
        components.assign(s.n, GridField(s));
    }
};

// Kind-typed I/O failures, distinguished for callers.
struct io_error : std::runtime_error {
    enum class kind { bad_magic, bad_header, truncated, os_error };
    kind what_kind;
    io_error(kind k, const std::string& msg) : std::runtime_error(msg), what_kind(k) {}
};

// amplitude * exp(1 - 1/(1 - |x-c|^2/R^2)) inside the ball, 0 outside.
GridField make_bump(const GridSpec& spec, const std::array<double, 3>& center, double radius,
                    double amplitude);

double lp_norm(const GridField& field, double p);
double lp_norm(const GridVectorField& field, double p);  // pointwise Euclidean magnitude

// Binary format: magic "NLGF", version u32, n u32, shape n x u64, spacing f64,
// origin n x f64, payload little-endian f64 row-major.
void write_field(const GridField& field, const std::string& path);
GridField read_field(const std::string& path);
void write_vector_field(const GridVectorField& field, const std::string& base_path);
GridVectorField read_vector_field(const std::string& base_path, int n);

// CSV export of a 1D field or a 2D axis slice.
void write_csv_slice(const GridField& field, const std::string& path);

} // namespace nlgrad

#endif
