#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "mjls/core.hpp"

using namespace mjls;

namespace {

Model va_model() {
    Model m;
    m.n_modes = 2;
    m.ns = 2;
    m.na = 1;
    m.ny = 1;
    Matrix A1(2, 2), A2(2, 2), B(2, 1), C(1, 2);
    A1 << 0.45, 0, 0, 0.4;
    A2 << 0.25, -0.2, 0.04, 0.4;
    B << 0.3, 0.4;
    C << 2, 1;
    m.A = {A1, A2};
    m.B = {B, B};
    m.C = {C, C};
    Matrix P(2, 2);
    P << 0.5, 0.5, 0.5, 0.5;
    m.P = P;
    m.validate();
    return m;
}

Model random_model(int n_modes, int ns, int na, int ny, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> gauss;
    auto rnd = [&](int r, int c) {
        Matrix M(r, c);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) M(i, j) = gauss(rng);
        return M;
    };
    Model m;
    m.n_modes = n_modes;
    m.ns = ns;
    m.na = na;
    m.ny = ny;
    for (int i = 0; i < n_modes; ++i) {
        m.A.push_back(rnd(ns, ns));
        m.B.push_back(rnd(ns, na));
        m.C.push_back(rnd(ny, ns));
    }
    m.validate();
    return m;
}

}  // namespace

TEST_CASE("obs_matrix blocks match the product definition") {
    Model m = va_model();
    SUBCASE("first block is C of the first mode") {
        Matrix O = obs_matrix(m, {0, 1});
        CHECK(O.rows() == 2);
        CHECK((O.row(0) - m.C[0]).norm() == doctest::Approx(0.0));
        CHECK((O.row(1) - m.C[1] * m.A[0]).norm() == doctest::Approx(0.0));
    }
    SUBCASE("three-step path") {
        Matrix O = obs_matrix(m, {1, 0, 1});
        CHECK((O.row(2) - m.C[1] * m.A[0] * m.A[1]).norm() ==
              doctest::Approx(0.0));
    }
    SUBCASE("identity dynamics collapse all blocks") {
        Model id = m;
        id.A = {Matrix::Identity(2, 2), Matrix::Identity(2, 2)};
        Matrix O = obs_matrix(id, {0, 1, 0});
        for (int k = 0; k < 3; ++k)
            CHECK((O.row(k) - id.C[0]).norm() == doctest::Approx(0.0));
    }
}

TEST_CASE("input_effect structure") {
    Model m = va_model();
    SUBCASE("single-measurement window has zero columns") {
        Matrix G = input_effect(m, {0});
        CHECK(G.rows() == 1);
        CHECK(G.cols() == 0);
    }
    SUBCASE("strictly lower block-triangular") {
        Matrix G = input_effect(m, {0, 1, 0});
        CHECK(G.rows() == 3);
        CHECK(G.cols() == 2);
        CHECK(G(0, 0) == 0.0);
        CHECK(G(0, 1) == 0.0);
        CHECK(G(1, 1) == 0.0);
        CHECK(G(1, 0) == doctest::Approx((m.C[1] * m.B[0])(0, 0)));
        CHECK(G(2, 0) == doctest::Approx((m.C[0] * m.A[1] * m.B[0])(0, 0)));
        CHECK(G(2, 1) == doctest::Approx((m.C[0] * m.B[1])(0, 0)));
    }
}

TEST_CASE("predict_outputs equals forward simulation") {
    for (unsigned seed = 0; seed < 20; ++seed) {
        Model m = random_model(3, 3, 2, 2, 100 + seed);
        std::mt19937 rng(seed);
        std::normal_distribution<double> gauss;
        Path path = {(int)(rng() % 3), (int)(rng() % 3), (int)(rng() % 3),
                     (int)(rng() % 3)};
        Vector x0(3), u(3 * 2);
        for (int i = 0; i < 3; ++i) x0(i) = gauss(rng);
        for (int i = 0; i < 6; ++i) u(i) = gauss(rng);
        Vector y = predict_outputs(m, path, x0, u);
        Vector x = x0;
        for (int k = 0; k < 4; ++k) {
            Vector yk = m.C[path[k]] * x;
            CHECK((y.segment(2 * k, 2) - yk).norm() < 1e-10);
            if (k < 3) x = m.A[path[k]] * x + m.B[path[k]] * u.segment(2 * k, 2);
        }
    }
}

TEST_CASE("PathAlgebra incremental extension matches fresh build") {
    Model m = random_model(2, 3, 2, 2, 7);
    PathAlgebra pa = PathAlgebra::start(m, 1);
    Path path = {1};
    std::mt19937 rng(3);
    for (int k = 0; k < 5; ++k) {
        int mode = (int)(rng() % 2);
        pa = pa.extended(mode);
        path.push_back(mode);
        PathAlgebra fresh = PathAlgebra::build(m, path);
        CHECK((pa.O - fresh.O).norm() < 1e-12);
        CHECK((pa.G - fresh.G).norm() < 1e-12);
    }
}

TEST_CASE("sample_chain") {
    SUBCASE("identity P is absorbing") {
        auto seq = sample_chain(Matrix::Identity(3, 3), 2, 50, 42);
        for (int v : seq) CHECK(v == 2);
    }
    SUBCASE("deterministic under seed") {
        Matrix P(2, 2);
        P << 0.5, 0.5, 0.5, 0.5;
        auto a = sample_chain(P, 0, 100, 9);
        auto b = sample_chain(P, 0, 100, 9);
        CHECK(a == b);
    }
    SUBCASE("uniform chain visits both modes") {
        Matrix P(2, 2);
        P << 0.5, 0.5, 0.5, 0.5;
        auto seq = sample_chain(P, 0, 200, 1);
        int ones = 0;
        for (int v : seq) ones += v;
        CHECK(ones > 50);
        CHECK(ones < 150);
    }
}

TEST_CASE("stochastic and ergodic predicates") {
    Matrix P(2, 2);
    P << 0.5, 0.5, 0.5, 0.5;
    CHECK(is_stochastic(P));
    CHECK(is_ergodic(P));
    CHECK_FALSE(is_ergodic(Matrix::Identity(2, 2)));
    Matrix bad(2, 2);
    bad << 0.5, 0.6, 0.5, 0.5;
    CHECK_FALSE(is_stochastic(bad));
}

TEST_CASE("JSON round trip and validation") {
    Model m = va_model();
    Model back = parse_model(model_to_json(m));
    CHECK(back.n_modes == 2);
    CHECK((back.A[1] - m.A[1]).norm() == doctest::Approx(0.0));
    CHECK((back.P.value() - m.P.value()).norm() == doctest::Approx(0.0));
    CHECK_THROWS_AS(parse_model("{"), std::invalid_argument);
    CHECK_THROWS_AS(parse_model("{\"n_modes\": 1}"), std::invalid_argument);
    // wrong shape
    std::string j = model_to_json(m);
    auto pos = j.find("0.45");
    j.replace(pos, 4, "\"x\"");
    CHECK_THROWS_AS(parse_model(j), std::invalid_argument);
}

TEST_CASE("shipped model files load") {
    // run from build dir; configure_file copies models/ there
    Model va = load_model("models/va.json");
    CHECK(va.ny == 1);
    Model vb = load_model("models/vb.json");
    CHECK(vb.na == 2);
    CHECK(vb.A[0](1, 1) == doctest::Approx(1.1));
}
