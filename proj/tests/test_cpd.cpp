#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "latnkm/cpd.hpp"

using namespace latnkm;

TEST_CASE("feature rows are normalized monomials") {
    FeatureMapSpec spec{3};
    Vector row = feature_row(0.0, spec);
    CHECK(row.isApprox(Vector{{1.0, 0.0, 0.0}}, 1e-15));

    row = feature_row(1.0, spec);
    CHECK(row.isApprox(Vector::Ones(3) / std::sqrt(3.0), 1e-14));

    row = feature_row(2.0, FeatureMapSpec{2});
    CHECK(row.isApprox(Vector{{1.0, 2.0}} / std::sqrt(5.0), 1e-14));
}

TEST_CASE("build_features rejects non-finite input and produces unit rows") {
    Matrix x(2, 2);
    x << 0.5, -1.25, 3.0, 0.0;
    const FeatureSet fs = build_features(x, FeatureMapSpec{4});
    REQUIRE(fs.dims() == 2);
    for (const Matrix& phi : fs.phi)
        for (Index n = 0; n < phi.rows(); ++n) CHECK(phi.row(n).norm() == doctest::Approx(1.0).epsilon(1e-12));

    x(1, 0) = std::nan("");
    CHECK_THROWS_AS(build_features(x, FeatureMapSpec{4}), InvalidData);
}

TEST_CASE("model response, scalar case") {
    CpdModel model;
    model.spec.local_dim = 1;
    model.cores = {Matrix::Constant(1, 1, 3.0), Matrix::Constant(1, 1, -2.0)};
    FeatureSet fs;
    fs.phi = {Matrix::Ones(1, 1), Matrix::Ones(1, 1)};
    const Vector f = model_response(model, fs);
    CHECK(f[0] == doctest::Approx(-6.0));
}

TEST_CASE("model response vanishes when any core is zero") {
    std::mt19937_64 rng(7);
    CpdModel model = test_helpers::random_model(3, 2, 2, rng);
    model.cores[1].setZero();
    const Matrix x = test_helpers::random_inputs(5, 3, rng);
    const FeatureSet fs = build_features(x, model.spec);
    CHECK(model_response(model, fs).norm() == doctest::Approx(0.0));
}

TEST_CASE("model response matches the dense weight expansion") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const CpdModel model = test_helpers::random_model(3, 2, 2, rng);
        const Matrix x = test_helpers::random_inputs(6, 3, rng);
        const FeatureSet fs = build_features(x, model.spec);
        const Vector f = model_response(model, fs);
        const Vector w = dense_weights(model);
        for (Index n = 0; n < x.rows(); ++n) {
            const Vector phi = dense_features(x.row(n).transpose(), model.spec);
            CHECK(f[n] == doctest::Approx(phi.dot(w)).epsilon(1e-10));
        }
    }
}

TEST_CASE("partial_response: empty Hadamard product convention for D=1") {
    std::mt19937_64 rng(3);
    const CpdModel model = test_helpers::random_model(1, 3, 2, rng);
    const Matrix x = test_helpers::random_inputs(4, 1, rng);
    const FeatureSet fs = build_features(x, model.spec);
    const auto [z, a] = partial_response(model, fs, 0);
    CHECK(z.isApprox(Matrix::Ones(4, 2)));
    CHECK((a * Eigen::Map<const Vector>(model.cores[0].data(), model.cores[0].size()))
              .isApprox(model_response(model, fs), 1e-12));
}

TEST_CASE("response triple identity: A^(d) v^(d) = Z 1 = Phi w") {
    std::mt19937_64 rng(21);
    std::uniform_int_distribution<int> d_dist(1, 4), i_dist(1, 3), r_dist(1, 3), n_dist(1, 20);
    for (int trial = 0; trial < 40; ++trial) {
        const int D = d_dist(rng), I = i_dist(rng), R = r_dist(rng), N = n_dist(rng);
        const CpdModel model = test_helpers::random_model(D, I, R, rng);
        const Matrix x = test_helpers::random_inputs(N, D, rng);
        const FeatureSet fs = build_features(x, model.spec);
        const Vector f = model_response(model, fs);

        const Vector w = dense_weights(model);
        for (Index n = 0; n < N; ++n) {
            const double dense = dense_features(x.row(n).transpose(), model.spec).dot(w);
            CHECK(std::abs(f[n] - dense) <= 1e-10);
        }
        for (int d = 0; d < D; ++d) {
            const Matrix a = design_matrix(model, fs, d);
            const Vector v = Eigen::Map<const Vector>(model.cores[d].data(), model.cores[d].size());
            CHECK((a * v - f).cwiseAbs().maxCoeff() <= 1e-10);
        }
    }
}

TEST_CASE("response is linear in each core separately") {
    std::mt19937_64 rng(33);
    CpdModel model = test_helpers::random_model(3, 2, 2, rng);
    const Matrix x = test_helpers::random_inputs(5, 3, rng);
    const FeatureSet fs = build_features(x, model.spec);
    const Vector f = model_response(model, fs);
    for (int d = 0; d < 3; ++d) {
        CpdModel scaled = model;
        scaled.cores[d] *= 2.5;
        CHECK(model_response(scaled, fs).isApprox(2.5 * f, 1e-12));
    }
}

TEST_CASE("dense_weights: single Kronecker term and index order") {
    CpdModel model;
    model.spec.local_dim = 2;
    Matrix v1(2, 1), v2(2, 1);
    v1 << 1, 0;
    v2 << 0, 1;
    model.cores = {v1, v2};
    const Vector w = dense_weights(model);
    CHECK(w.isApprox(Vector{{0.0, 0.0, 1.0, 0.0}}));

    model.cores[0].setZero();
    CHECK(dense_weights(model).norm() == doctest::Approx(0.0));
}

TEST_CASE("dense_weights enforces the size cap") {
    std::mt19937_64 rng(5);
    const CpdModel model = test_helpers::random_model(4, 3, 1, rng);
    CHECK_THROWS_AS(dense_weights(model, 10), TooLarge);
}

TEST_CASE("shape errors") {
    std::mt19937_64 rng(9);
    const CpdModel model = test_helpers::random_model(2, 2, 2, rng);
    const Matrix x = test_helpers::random_inputs(3, 3, rng);
    const FeatureSet fs = build_features(x, model.spec);
    CHECK_THROWS_AS(model_response(model, fs), ShapeError);
    const FeatureSet ok = build_features(test_helpers::random_inputs(3, 2, rng), model.spec);
    CHECK_THROWS_AS(partial_response(model, ok, 2), ShapeError);
}
