#include "nlgrad/fields.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>

namespace nlgrad {

GridSpec make_grid_spec(int n, std::size_t points_per_axis, double spacing,
                        const std::array<double, 3>& origin) {
    if (n < 1 || n > 3) throw std::invalid_argument("make_grid_spec: n must be 1, 2 or 3");
    if (points_per_axis < 8) throw std::invalid_argument("make_grid_spec: need >= 8 points per axis");
    if (!(spacing > 0)) throw std::invalid_argument("make_grid_spec: spacing must be positive");
    GridSpec s;
    s.n = n;
    for (int d = 0; d < n; ++d) s.shape[d] = points_per_axis;
    s.spacing = spacing;
    s.origin = origin;
    if (s.size() > (std::size_t(1) << 26))
        throw std::invalid_argument("make_grid_spec: grid exceeds the 2^26 point guard");
    return s;
}

GridField make_bump(const GridSpec& spec, const std::array<double, 3>& center, double radius,
                    double amplitude) {
    if (!(radius > 2 * spec.spacing))
        throw std::invalid_argument("make_bump: radius below 2h is unresolvable");
    for (int d = 0; d < spec.n; ++d) {
        double lo = spec.origin[d], hi = spec.coord(d, spec.shape[d] - 1);
        if (center[d] - radius < lo || center[d] + radius > hi)
            throw std::invalid_argument("make_bump: ball not contained in grid");
    }
    GridField f(spec);
    std::array<std::size_t, 3> sh = {1, 1, 1};
    for (int d = 0; d < spec.n; ++d) sh[d] = spec.shape[d];
    std::size_t idx = 0;
    for (std::size_t i0 = 0; i0 < sh[0]; ++i0)
        for (std::size_t i1 = 0; i1 < sh[1]; ++i1)
            for (std::size_t i2 = 0; i2 < sh[2]; ++i2, ++idx) {
                std::array<std::size_t, 3> iv{i0, i1, i2};
                double q = 0.0;
                for (int d = 0; d < spec.n; ++d) {
                    double dx = spec.coord(d, iv[d]) - center[d];
                    q += dx * dx;
                }
                q /= radius * radius;
                f.data[idx] = q < 1.0 ? amplitude * std::exp(1.0 - 1.0 / (1.0 - q)) : 0.0;
            }
    return f;
}

double lp_norm(const GridField& field, double p) {
    if (p < 1.0) throw std::invalid_argument("lp_norm: p must be >= 1");
    const double hn = std::pow(field.spec.spacing, field.spec.n);
    if (std::isinf(p)) {
        double m = 0.0;
        for (double v : field.data) m = std::max(m, std::abs(v));
        return m;
    }
    double acc = 0.0;
    for (double v : field.data) acc += std::pow(std::abs(v), p);
    return std::pow(acc * hn, 1.0 / p);
}

double lp_norm(const GridVectorField& field, double p) {
    if (p < 1.0) throw std::invalid_argument("lp_norm: p must be >= 1");
    const double hn = std::pow(field.spec.spacing, field.spec.n);
    const std::size_t sz = field.spec.size();
    if (std::isinf(p)) {
        double m = 0.0;
        for (std::size_t i = 0; i < sz; ++i) {
            double q = 0.0;
            for (const auto& c : field.components) q += c.data[i] * c.data[i];
            m = std::max(m, std::sqrt(q));
        }
        return m;
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < sz; ++i) {
        double q = 0.0;
        for (const auto& c : field.components) q += c.data[i] * c.data[i];
        acc += std::pow(std::sqrt(q), p);
    }
    return std::pow(acc * hn, 1.0 / p);
}

namespace {

constexpr char kMagic[4] = {'N', 'L', 'G', 'F'};

struct FileCloser {
    std::FILE* fp;
    ~FileCloser() {
        if (fp) std::fclose(fp);
    }
};

template <class T>
void put(std::FILE* fp, T v) {
    // host is little-endian on every supported target
    if (std::fwrite(&v, sizeof(T), 1, fp) != 1)
        throw io_error(io_error::kind::os_error, "write failed");
}

template <class T>
T get(std::FILE* fp) {
    T v;
    if (std::fread(&v, sizeof(T), 1, fp) != 1)
        throw io_error(io_error::kind::truncated, "payload shorter than header claims");
    return v;
}

} // namespace

void write_field(const GridField& field, const std::string& path) {
    std::FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw io_error(io_error::kind::os_error, "cannot open for writing: " + path);
    FileCloser closer{fp};
    if (std::fwrite(kMagic, 1, 4, fp) != 4)
        throw io_error(io_error::kind::os_error, "write failed");
    put<std::uint32_t>(fp, 1u);
    put<std::uint32_t>(fp, static_cast<std::uint32_t>(field.spec.n));
    for (int d = 0; d < field.spec.n; ++d)
        put<std::uint64_t>(fp, static_cast<std::uint64_t>(field.spec.shape[d]));
    put<double>(fp, field.spec.spacing);
    for (int d = 0; d < field.spec.n; ++d) put<double>(fp, field.spec.origin[d]);
    if (std::fwrite(field.data.data(), sizeof(double), field.data.size(), fp) !=
        field.data.size())
        throw io_error(io_error::kind::os_error, "write failed");
}

GridField read_field(const std::string& path) {
    std::FILE* fp = std::fopen(path.c_str(), "rb");
    if (!fp) throw io_error(io_error::kind::os_error, "cannot open: " + path);
    FileCloser closer{fp};
    char magic[4];
    if (std::fread(magic, 1, 4, fp) != 4)
        throw io_error(io_error::kind::truncated, path + ": truncated header");
    if (std::memcmp(magic, kMagic, 4) != 0)
        throw io_error(io_error::kind::bad_magic, path + ": magic mismatch");
    auto version = get<std::uint32_t>(fp);
    if (version != 1)
        throw io_error(io_error::kind::bad_header, path + ": unsupported version");
    auto n = get<std::uint32_t>(fp);
    if (n < 1 || n > 3)
        throw io_error(io_error::kind::bad_header, path + ": dimension out of range");
    GridSpec spec;
    spec.n = static_cast<int>(n);
    for (int d = 0; d < spec.n; ++d) {
        auto s = get<std::uint64_t>(fp);
        if (s == 0 || s > (std::uint64_t(1) << 26))
            throw io_error(io_error::kind::bad_header, path + ": bad shape");
        spec.shape[d] = static_cast<std::size_t>(s);
    }
    spec.spacing = get<double>(fp);
    for (int d = 0; d < spec.n; ++d) spec.origin[d] = get<double>(fp);
    if (spec.size() > (std::size_t(1) << 26))
        throw io_error(io_error::kind::bad_header, path + ": grid exceeds the point guard");
    GridField f(spec);
    if (std::fread(f.data.data(), sizeof(double), f.data.size(), fp) != f.data.size())
        throw io_error(io_error::kind::truncated, path + ": payload shorter than header claims");
    return f;
}

void write_vector_field(const GridVectorField& field, const std::string& base_path) {
    for (int d = 0; d < field.spec.n; ++d)
        write_field(field.components[d], base_path + ".c" + std::to_string(d));
}

GridVectorField read_vector_field(const std::string& base_path, int n) {
    if (n < 1 || n > 3) throw std::invalid_argument("read_vector_field: bad n");
    GridVectorField out;
    for (int d = 0; d < n; ++d) {
        GridField c = read_field(base_path + ".c" + std::to_string(d));
        if (d == 0) {
            out.spec = c.spec;
        } else if (!(c.spec == out.spec)) {
            throw io_error(io_error::kind::bad_header,
                           base_path + ": component grids disagree");
        }
        out.components.push_back(std::move(c));
    }
    if (out.spec.n != n)
        throw io_error(io_error::kind::bad_header, base_path + ": dimension mismatch");
    return out;
}

void write_csv_slice(const GridField& field, const std::string& path) {
    std::FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw io_error(io_error::kind::os_error, "cannot open for writing: " + path);
    FileCloser closer{fp};
    const GridSpec& s = field.spec;
    if (s.n == 1) {
        std::fprintf(fp, "x,u\n");
        for (std::size_t i = 0; i < s.shape[0]; ++i)
            std::fprintf(fp, "%.17g,%.17g\n", s.coord(0, i), field.data[i]);
    } else {
        // middle slice along the last axes
        std::fprintf(fp, "x,y,u\n");
        std::size_t i2 = s.n == 3 ? s.shape[2] / 2 : 0;
        for (std::size_t i0 = 0; i0 < s.shape[0]; ++i0)
            for (std::size_t i1 = 0; i1 < s.shape[1]; ++i1)
                std::fprintf(fp, "%.17g,%.17g,%.17g\n", s.coord(0, i0), s.coord(1, i1),
                             field.at(i0, i1, i2));
    }
}

} // namespace nlgrad
