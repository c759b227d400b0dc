#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "nlgrad/fields.hpp"
#include "nlgrad/quadrature.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

using namespace nlgrad;

TEST_CASE("bump takes its closed-form values at the center and the sphere") {
    GridSpec spec = make_grid_spec(1, 1025, 1.0 / 256, {-2.0, 0, 0});
    GridField f = make_bump(spec, {0.0, 0, 0}, 1.0, 2.5);
    CHECK(f.at(512) == doctest::Approx(2.5).epsilon(1e-14));     // center: exp(0)
    CHECK(f.at(512 + 256) == 0.0);                               // |x - c| = R
    CHECK(f.at(512 + 300) == 0.0);                               // outside
}

TEST_CASE("bump integral matches the quadrature oracle") {
    GridSpec spec = make_grid_spec(1, 1537, 1.0 / 512, {-1.5, 0, 0});
    GridField f = make_bump(spec, {0.0, 0, 0}, 1.0, 1.0);
    double grid_sum = 0.0;
    for (double v : f.data) grid_sum += v;
    grid_sum *= spec.spacing;
    QuadratureSpec tight;
    tight.rel_tol = 1e-13;
    double oracle = integrate_adaptive(
                        [](double x) {
                            double q = x * x;
                            return q < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - q)) : 0.0;
                        },
                        -1.0, 1.0, tight)
                        .value;
    // e * int exp(-1/(1-x^2)) = e * 0.4439938... for the unit-height profile
    CHECK(oracle == doctest::Approx(0.4439938 * std::exp(1.0)).epsilon(1e-5));
    CHECK(grid_sum == doctest::Approx(oracle).epsilon(1e-4));
}

TEST_CASE("bump rejects unresolvable or uncontained balls") {
    GridSpec spec = make_grid_spec(1, 64, 1.0 / 16, {-2.0, 0, 0});
    CHECK_THROWS(make_bump(spec, {0.0, 0, 0}, 0.1, 1.0));  // radius <= 2h
    CHECK_THROWS(make_bump(spec, {0.0, 0, 0}, 3.0, 1.0));  // leaves the grid
}

TEST_CASE("bump is symmetric under reflection about its center") {
    GridSpec spec = make_grid_spec(2, 65, 1.0 / 16, {-2.0, -2.0, 0});
    GridField f = make_bump(spec, {0.0, 0.0, 0}, 1.0, 1.0);
    for (std::size_t i = 0; i < 65; ++i)
        for (std::size_t j = 0; j < 65; ++j)
            CHECK(f.at(i, j) == f.at(64 - i, 64 - j));
}

TEST_CASE("lp norms: closed forms and homogeneity") {
    GridSpec spec = make_grid_spec(2, 16, 0.25, {0, 0, 0});
    GridField zero(spec);
    CHECK(lp_norm(zero, 2.0) == 0.0);

    GridField ones(spec);
    std::size_t m = 40;
    for (std::size_t i = 0; i < m; ++i) ones.data[i] = 1.0;
    double hn = 0.25 * 0.25;
    CHECK(lp_norm(ones, 1.0) == doctest::Approx(m * hn).epsilon(1e-14));
    CHECK(lp_norm(ones, 3.0) == doctest::Approx(std::pow(m * hn, 1.0 / 3)).epsilon(1e-14));
    CHECK(lp_norm(ones, std::numeric_limits<double>::infinity()) == 1.0);

    std::mt19937 rng(7);
    std::uniform_real_distribution<double> unif(-1, 1);
    GridField rnd(spec);
    for (double& v : rnd.data) v = unif(rng);
    GridField scaled = rnd;
    for (double& v : scaled.data) v *= -3.5;
    for (double p : {1.0, 2.0, 7.0})
        CHECK(lp_norm(scaled, p) == doctest::Approx(3.5 * lp_norm(rnd, p)).epsilon(1e-14));
    CHECK_THROWS(lp_norm(rnd, 0.5));
}

TEST_CASE("binary round trip is bit exact") {
    GridSpec spec = make_grid_spec(3, 9, 0.125, {-0.5, -0.5, -0.5});
    GridField f(spec);
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> unif(-1e9, 1e9);
    for (double& v : f.data) v = unif(rng);
    const char* path = "test_field_roundtrip.nlgf";
    write_field(f, path);
    GridField g = read_field(path);
    REQUIRE(g.spec == f.spec);
    for (std::size_t i = 0; i < f.data.size(); ++i) {
        REQUIRE(std::memcmp(&f.data[i], &g.data[i], sizeof(double)) == 0);
    }
    std::remove(path);
}

TEST_CASE("vector field round trip") {
    GridSpec spec = make_grid_spec(2, 12, 0.5, {0, 0, 0});
    GridVectorField v(spec);
    for (int d = 0; d < 2; ++d)
        for (std::size_t i = 0; i < spec.size(); ++i)
            v.components[d].data[i] = d + 0.25 * static_cast<double>(i);
    write_vector_field(v, "test_vec");
    GridVectorField w = read_vector_field("test_vec", 2);
    CHECK(w.components[0].data == v.components[0].data);
    CHECK(w.components[1].data == v.components[1].data);
    std::remove("test_vec.c0");
    std::remove("test_vec.c1");
}

TEST_CASE("magic mismatch is its own failure kind") {
    const char* path = "test_field_badmagic.nlgf";
    {
        std::ofstream out(path, std::ios::binary);
        out << "XXXXsome junk that is long enough to not be a short read";
    }
    try {
        read_field(path);
        FAIL("expected io_error");
    } catch (const io_error& e) {
        CHECK(e.what_kind == io_error::kind::bad_magic);
    }
    std::remove(path);
}

TEST_CASE("truncated payload is detected") {
    GridSpec spec = make_grid_spec(1, 32, 0.25, {0, 0, 0});
    GridField f(spec);
    const char* path = "test_field_trunc.nlgf";
    write_field(f, path);
    // chop the last 16 bytes off
    std::ifstream in(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), {});
    in.close();
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 16));
    }
    try {
        read_field(path);
        FAIL("expected io_error");
    } catch (const io_error& e) {
        CHECK(e.what_kind == io_error::kind::truncated);
    }
    std::remove(path);
}

TEST_CASE("grid spec guards") {
    CHECK_THROWS(make_grid_spec(1, 4, 0.1, {0, 0, 0}));        // too few points
    CHECK_THROWS(make_grid_spec(2, 10000, 0.1, {0, 0, 0}));    // exceeds 2^26 guard
    CHECK_THROWS(make_grid_spec(1, 16, -0.1, {0, 0, 0}));
}

TEST_CASE("csv slice export writes a header and one row per point") {
    GridSpec spec = make_grid_spec(1, 8, 0.5, {0, 0, 0});
    GridField f(spec);
    for (std::size_t i = 0; i < 8; ++i) f.data[i] = static_cast<double>(i);
    const char* path = "test_field_slice.csv";
    write_csv_slice(f, path);
    std::ifstream in(path);
    std::string line;
    int rows = 0;
    bool header = false;
    while (std::getline(in, line)) {
        if (rows == 0) header = (line == "x,u");
        ++rows;
    }
    CHECK(header);
    CHECK(rows == 9);
    std::remove(path);
}
