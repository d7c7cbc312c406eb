#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>
#include <string>

#include "latnkm/data_io.hpp"

using namespace latnkm;

namespace {

/// Writes `content` to a throwaway file and removes it when leaving scope.
struct TempCsv {
    std::string path;
    explicit TempCsv(const std::string& content, const std::string& name = "latnkm_test.csv") {
        path = std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp") + "/" + name;
        std::ofstream out(path);
        out << content;
    }
    ~TempCsv() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("load_csv: basic file with named target") {
    TempCsv f("a,b,y\n1,2,3\n4,5,6\n7,8,9\n");
    const Dataset ds = load_csv(f.path, "y");
    REQUIRE(ds.X.rows() == 3);
    REQUIRE(ds.X.cols() == 2);
    CHECK(ds.X(0, 0) == doctest::Approx(1.0));
    CHECK(ds.X(2, 1) == doctest::Approx(8.0));
    CHECK(ds.y[1] == doctest::Approx(6.0));
}

TEST_CASE("load_csv: last column is the default target") {
    TempCsv f("a,b,c\n0.5,-1,2\n1.5,0,4\n");
    const Dataset ds = load_csv(f.path);
    CHECK(ds.X.cols() == 2);
    CHECK(ds.y[0] == doctest::Approx(2.0));
    CHECK(ds.y[1] == doctest::Approx(4.0));
}

TEST_CASE("load_csv: target can be a middle column") {
    TempCsv f("a,y,b\n1,10,2\n3,20,4\n");
    const Dataset ds = load_csv(f.path, "y");
    CHECK(ds.y[1] == doctest::Approx(20.0));
    CHECK(ds.X(1, 0) == doctest::Approx(3.0));
    CHECK(ds.X(1, 1) == doctest::Approx(4.0));
}

TEST_CASE("load_csv: error cases") {
    CHECK_THROWS_AS((void)load_csv("/nonexistent/file.csv"), FormatError);

    TempCsv missing("a,b\n1,2\n", "latnkm_missing.csv");
    CHECK_THROWS_AS((void)load_csv(missing.path, "y"), FormatError);

    TempCsv nan_cell("a,y\n1,2\nnan,4\n", "latnkm_nan.csv");
    try {
        (void)load_csv(nan_cell.path, "y");
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        const std::string msg = e.what();
        // The message locates the offending cell.
        CHECK(msg.find("row 3") != std::string::npos);
        CHECK(msg.find("column 1") != std::string::npos);
    }

    TempCsv bad_token("a,y\n1,2\n3,oops\n", "latnkm_bad.csv");
    CHECK_THROWS_AS((void)load_csv(bad_token.path, "y"), FormatError);

    TempCsv ragged("a,b,y\n1,2,3\n4,5\n", "latnkm_ragged.csv");
    CHECK_THROWS_AS((void)load_csv(ragged.path, "y"), FormatError);
}

TEST_CASE("split: sizes, determinism, and seed sensitivity") {
    Dataset ds;
    ds.X.resize(10, 2);
    ds.y.resize(10);
    for (Index i = 0; i < 10; ++i) {
        ds.X(i, 0) = static_cast<double>(i);
        ds.X(i, 1) = static_cast<double>(i * i);
        ds.y[i] = 3.0 * i;
    }
    auto [tr, te] = split(ds, 0.9, 7);
    CHECK(tr.X.rows() == 9);
    CHECK(te.X.rows() == 1);

    auto [tr2, te2] = split(ds, 0.9, 7);
    CHECK(tr.X.isApprox(tr2.X));
    CHECK(te.y.isApprox(te2.y));

    // Larger dataset: distinct seeds give distinct permutations.
    Dataset big;
    big.X.resize(40, 1);
    big.y.resize(40);
    for (Index i = 0; i < 40; ++i) {
        big.X(i, 0) = static_cast<double>(i) + 0.5 * ((i * 7) % 3);
        big.y[i] = static_cast<double>(i);
    }
    auto [a, a_te] = split(big, 0.5, 1, /*standardize=*/false);
    auto [b, b_te] = split(big, 0.5, 2, /*standardize=*/false);
    CHECK_FALSE(a.y.isApprox(b.y));

    CHECK_THROWS_AS(split(ds, 0.0, 1), ConfigError);
    CHECK_THROWS_AS(split(ds, 1.0, 1), ConfigError);
    Dataset tiny;
    tiny.X.resize(1, 1);
    tiny.y.resize(1);
    tiny.X(0, 0) = 1.0;
    tiny.y[0] = 2.0;
    CHECK_THROWS_AS(split(tiny, 0.5, 1), InvalidData);
}

TEST_CASE("split: train-fitted standardizer") {
    Dataset ds;
    ds.X.resize(30, 2);
    ds.y.resize(30);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> gauss(2.0, 5.0);
    for (Index i = 0; i < 30; ++i) {
        ds.X(i, 0) = gauss(rng);
        ds.X(i, 1) = gauss(rng) - 10.0;
        ds.y[i] = gauss(rng) * 2.0;
    }
    auto [tr, te] = split(ds, 0.8, 3);
    REQUIRE(tr.standardizer.has_value());
    for (Index c = 0; c < 2; ++c) {
        CHECK(std::abs(tr.X.col(c).mean()) < 1e-10);
        const double sd = std::sqrt(
            (tr.X.col(c).array() - tr.X.col(c).mean()).square().sum() / tr.X.rows());
        CHECK(sd == doctest::Approx(1.0).epsilon(1e-10));
    }
    CHECK(std::abs(tr.y.mean()) < 1e-10);
    // Test rows use the train statistics, so they are generally off-center.
    CHECK(te.standardizer.has_value());

    // Round trip through the fitted transform.
    const Standardizer& st = *tr.standardizer;
    Vector probe(4);
    probe << -3.0, 0.0, 1.5, 12.0;
    CHECK(st.untransform_y(st.transform_y(probe)).isApprox(probe, 1e-12));
}

TEST_CASE("split: constant columns") {
    Dataset ds;
    ds.X.resize(10, 2);
    ds.y.resize(10);
    for (Index i = 0; i < 10; ++i) {
        ds.X(i, 0) = static_cast<double>(i);
        ds.X(i, 1) = 4.0;  // constant
        ds.y[i] = static_cast<double>(i);
    }
    CHECK_THROWS_AS(split(ds, 0.8, 1), InvalidData);
    auto [tr, te] = split(ds, 0.8, 1, /*standardize=*/true, /*drop_constant=*/true);
    CHECK(tr.X.cols() == 1);
    CHECK(te.X.cols() == 1);
}

TEST_CASE("gen_cubic: protocol") {
    auto [tr, te] = gen_cubic(11);
    CHECK(tr.X.rows() == 20);
    CHECK(tr.X.cols() == 1);
    CHECK(te.X.rows() == 100);
    CHECK(tr.X.minCoeff() >= -4.0);
    CHECK(tr.X.maxCoeff() <= 4.0);
    CHECK(te.X.minCoeff() >= -5.0);
    CHECK(te.X.maxCoeff() <= 5.0);
    CHECK_FALSE(tr.standardizer.has_value());

    auto [tr2, te2] = gen_cubic(11);
    CHECK(tr.X.isApprox(tr2.X));
    CHECK(tr.y.isApprox(tr2.y));
    CHECK(te.y.isApprox(te2.y));

    auto [ntr, nte] = gen_cubic(11, /*noiseless=*/true);
    CHECK(ntr.X.isApprox(tr.X));  // same inputs, noise removed
    for (Index i = 0; i < 20; ++i)
        CHECK(ntr.y[i] == doctest::Approx(std::pow(ntr.X(i, 0), 3)).epsilon(1e-12));
    for (Index i = 0; i < 100; ++i)
        CHECK(nte.y[i] == doctest::Approx(std::pow(nte.X(i, 0), 3)).epsilon(1e-12));
}
