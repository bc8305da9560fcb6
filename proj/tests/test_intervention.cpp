#include <dirsteer/error.hpp>
#include <dirsteer/intervention.hpp>
#include <gtest/gtest.h>

#include <cstring>
#include <fstream>
#include <random>

#include "oracles.hpp"

using namespace dirsteer;

namespace {

Vector vec(std::initializer_list<double> xs) {
    Vector v(static_cast<Eigen::Index>(xs.size()));
    std::copy(xs.begin(), xs.end(), v.data());
    return v;
}

DirectionVector dir(const Vector& v, ContrastKind kind) {
    DirectionVector d;
    d.values = v;
    d.mask.assign(static_cast<std::size_t>(v.size()), 1);
    d.retained_count = d.mask.size();
    d.kind = kind;
    return d;
}

InterventionConfig config(const Vector& v, const Vector& u, double alpha, double beta, Order order = Order::kStandard) {
    return {0, alpha, beta, order, dir(v, ContrastKind::kRefusal), dir(u, ContrastKind::kHarm)};
}

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCode::kUsage;
}

bool same_bits(const Vector& a, const Vector& b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

struct Case {
    Vector h, v, u;
    double alpha, beta;
};

Case random_case(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> dim(1, 64);
    std::uniform_real_distribution<double> coef(0.0, 3.0);
    std::uniform_real_distribution<double> scale(0.01, 100.0);
    const int d = dim(rng);
    return {oracle::random_matrix(rng, d, 1) * scale(rng), oracle::random_unit(rng, d), oracle::random_unit(rng, d),
            coef(rng), coef(rng)};
}

}  // namespace

TEST(ProjectOut, Examples) {
    EXPECT_EQ(project_out(vec({3, 4}), vec({1, 0}), 1.0), vec({0, 4}));
    EXPECT_EQ(project_out(vec({3, 4}), vec({1, 0}), 0.0), vec({3, 4}));
    EXPECT_EQ(project_out(vec({3, 4}), vec({1, 0}), 2.0), vec({-3, 4}));
}

TEST(ProjectOut, RejectsNonUnit) {
    EXPECT_EQ(code_of([] { project_out(vec({1, 1}), vec({1, 1}), 1.0); }), ErrorCode::kInvalidDirection);
    EXPECT_EQ(code_of([] { project_out(vec({1, 1}), vec({0, 0}), 1.0); }), ErrorCode::kInvalidDirection);
    EXPECT_EQ(code_of([] { project_out(vec({1, 1, 1}), vec({1, 0}), 1.0); }), ErrorCode::kShapeMismatch);
}

TEST(Steer, Examples) {
    EXPECT_EQ(steer(vec({2, 3}), vec({0, 1}), 0.5), vec({2, 2.5}));
    EXPECT_EQ(steer(vec({2, 3}), vec({0, 1}), 0.0), vec({2, 3}));
    EXPECT_EQ(steer(vec({0, 0}), vec({1, 0}), 1.0), vec({-1, 0}));
    EXPECT_EQ(code_of([] { steer(vec({0, 0}), vec({2, 0}), 1.0); }), ErrorCode::kInvalidDirection);
}

TEST(Dbdi, Examples) {
    const Vector e1 = vec({1, 0, 0});
    const Vector e2 = vec({0, 1, 0});
    EXPECT_EQ(dbdi_transform(vec({2, 3, 4}), config(e1, e2, 1.0, 0.5)), vec({0, 2.5, 4}));

    const Vector a = vec({1, 0});
    const Vector std_out = dbdi_transform(vec({2, 0}), config(a, a, 1.0, 1.0));
    const Vector rev_out = dbdi_transform(vec({2, 0}), config(a, a, 1.0, 1.0, Order::kReversed));
    EXPECT_EQ(std_out, vec({-1, 0}));
    EXPECT_EQ(rev_out, vec({0, 0}));
    EXPECT_EQ(rev_out - std_out, vec({1, 0}));
}

TEST(Dbdi, ConfigValidation) {
    const Vector e1 = vec({1, 0});
    auto cfg = config(e1, e1, 1.0, 1.0);
    EXPECT_EQ(code_of([&] { dbdi_transform(vec({1, 2, 3}), cfg); }), ErrorCode::kShapeMismatch);
    cfg.alpha = -0.1;
    EXPECT_EQ(code_of([&] { dbdi_transform(vec({1, 2}), cfg); }), ErrorCode::kOutOfRange);
    cfg = config(e1, e1, 1.0, -1.0);
    EXPECT_EQ(code_of([&] { dbdi_transform(vec({1, 2}), cfg); }), ErrorCode::kOutOfRange);
    cfg = config(e1, e1, 1.0, 1.0);
    cfg.harm.kind = ContrastKind::kRefusal;
    EXPECT_EQ(code_of([&] { dbdi_transform(vec({1, 2}), cfg); }), ErrorCode::kValidation);
    cfg = config(e1, vec({1, 0, 0}), 1.0, 1.0);
    EXPECT_EQ(code_of([&] { validate_config(cfg); }), ErrorCode::kShapeMismatch);
    cfg = config(e1, vec({0.6, 0.8001}), 1.0, 1.0);
    EXPECT_EQ(code_of([&] { validate_config(cfg); }), ErrorCode::kInvalidDirection);
}

TEST(Dbdi, OrthogonalDirectionsCommute) {
    std::mt19937_64 rng(100);
    for (int t = 0; t < 100; ++t) {
        const int d = 2 + t % 40;
        Vector v = oracle::random_unit(rng, d);
        Vector u = oracle::random_unit(rng, d);
        u -= u.dot(v) * v;
        u.normalize();
        const Vector h = oracle::random_matrix(rng, d, 1);
        const double a = 0.1 * (t % 20);
        const double b = 0.05 * (t % 30);
        const Vector s = dbdi_transform(h, config(v, u, a, b));
        const Vector r = dbdi_transform(h, config(v, u, a, b, Order::kReversed));
        EXPECT_LE((s - r).cwiseAbs().maxCoeff(), 1e-6);
    }
}

// 1000 seeded cases for each algebraic identity.
TEST(DbdiProperty, NullificationAtAlphaOne) {
    std::mt19937_64 rng(1);
    for (int t = 0; t < 1000; ++t) {
        const auto c = random_case(rng);
        const Vector step1 = project_out(c.h, c.v, 1.0);
        ASSERT_LE(std::abs(step1.dot(c.v)), 1e-6 * c.h.norm()) << t;
    }
}

TEST(DbdiProperty, IdempotentAtAlphaOne) {
    std::mt19937_64 rng(2);
    for (int t = 0; t < 1000; ++t) {
        const auto c = random_case(rng);
        const Vector once = project_out(c.h, c.v, 1.0);
        const Vector twice = project_out(once, c.v, 1.0);
        ASSERT_LE((twice - once).cwiseAbs().maxCoeff(), 1e-6) << t;
    }
}

TEST(DbdiProperty, SequentialStepsEqualSingleFormulaBitForBit) {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 1000; ++t) {
        const auto c = random_case(rng);
        const auto cfg = config(c.v, c.u, c.alpha, c.beta);
        const Vector two_step = steer(project_out(c.h, c.v, c.alpha), c.u, c.beta);
        // h - alpha (h.v) v - beta u, evaluated left to right.
        double hv = 0.0;
        for (Eigen::Index i = 0; i < c.h.size(); ++i) hv += c.h[i] * c.v[i];
        Vector formula(c.h.size());
        for (Eigen::Index i = 0; i < c.h.size(); ++i) formula[i] = c.h[i] - c.alpha * hv * c.v[i] - c.beta * c.u[i];
        const Vector fused = dbdi_transform(c.h, cfg);
        ASSERT_TRUE(same_bits(two_step, fused)) << t;
        ASSERT_TRUE(same_bits(formula, fused)) << t;
    }
}

TEST(DbdiProperty, ReversedMinusStandard) {
    std::mt19937_64 rng(4);
    for (int t = 0; t < 1000; ++t) {
        const auto c = random_case(rng);
        const Vector s = dbdi_transform(c.h, config(c.v, c.u, c.alpha, c.beta));
        const Vector r = dbdi_transform(c.h, config(c.v, c.u, c.alpha, c.beta, Order::kReversed));
        const Vector expected = c.alpha * c.beta * c.u.dot(c.v) * c.v;
        ASSERT_LE(((r - s) - expected).cwiseAbs().maxCoeff(), 1e-6) << t;
    }
}

// T(h) = P h - beta u with P = I - alpha v v^T, so
// T(a h1 + b h2) = a T(h1) + b T(h2) + (a + b - 1) beta u.
TEST(DbdiProperty, AffineInH) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    for (int t = 0; t < 1000; ++t) {
        const auto c = random_case(rng);
        const Vector h2 = oracle::random_matrix(rng, c.h.size(), 1);
        const double a = coef(rng);
        const double b = coef(rng);
        const auto cfg = config(c.v, c.u, c.alpha, c.beta);
        const Eigen::Index d = c.h.size();
        const Matrix p = Matrix::Identity(d, d) - c.alpha * c.v * c.v.transpose();
        const Vector affine = p * c.h - c.beta * c.u;
        const Vector t1 = dbdi_transform(c.h, cfg);
        const Vector t2 = dbdi_transform(h2, cfg);
        const Vector lhs = dbdi_transform(a * c.h + b * h2, cfg);
        const Vector rhs = a * t1 + b * t2 + (a + b - 1.0) * c.beta * c.u;
        const double tol = 1e-9 * (1.0 + c.h.norm() + h2.norm() + c.beta);
        ASSERT_LE((t1 - affine).cwiseAbs().maxCoeff(), tol) << t;
        ASSERT_LE((lhs - rhs).cwiseAbs().maxCoeff(), tol * 4) << t;
    }
}

TEST(DbdiRows, MatchesPerVectorBitForBit) {
    std::mt19937_64 rng(6);
    for (auto order : {Order::kStandard, Order::kReversed}) {
        const Vector v = oracle::random_unit(rng, 32);
        const Vector u = oracle::random_unit(rng, 32);
        const auto cfg = config(v, u, 0.75, 2.1, order);
        Matrix rows = oracle::random_matrix(rng, 50, 32);
        const Matrix orig = rows;
        dbdi_transform_rows(rows, cfg);
        for (Eigen::Index i = 0; i < rows.rows(); ++i) {
            ASSERT_TRUE(same_bits(rows.row(i).transpose(), dbdi_transform(orig.row(i).transpose(), cfg))) << i;
        }
    }
}

TEST(InterventionConfigFile, RoundTripWithRelativePaths) {
    TempDir tmp("cfg");
    std::filesystem::create_directories(tmp / "dirs");
    const auto cfg = config(vec({0.6, 0.8}), vec({0, 1}), 0.75, 1.5, Order::kReversed);
    write_direction(cfg.refusal, tmp / "dirs/v.json");
    write_direction(cfg.harm, tmp / "dirs/u.json");
    write_intervention_config(cfg, tmp / "cfg.json", "dirs/v.json", "dirs/u.json");
    const auto back = read_intervention_config(tmp / "cfg.json");
    EXPECT_EQ(back.layer, cfg.layer);
    EXPECT_EQ(back.alpha, 0.75);
    EXPECT_EQ(back.beta, 1.5);
    EXPECT_EQ(back.order, Order::kReversed);
    EXPECT_TRUE(back.refusal.values.isApprox(cfg.refusal.values, 1e-15));
    EXPECT_EQ(back.harm.kind, ContrastKind::kHarm);

    {
        std::ofstream out(tmp / "swapped.json");
        out << R"({"layer": 0, "alpha": 1, "beta": 1, "refusal": "dirs/u.json", "harm": "dirs/v.json"})";
    }
    EXPECT_EQ(code_of([&] { read_intervention_config(tmp / "swapped.json"); }), ErrorCode::kValidation);
    {
        std::ofstream out(tmp / "negative.json");
        out << R"({"layer": 0, "alpha": -1, "beta": 1, "refusal": "dirs/v.json", "harm": "dirs/u.json"})";
    }
    EXPECT_EQ(code_of([&] { read_intervention_config(tmp / "negative.json"); }), ErrorCode::kOutOfRange);
    EXPECT_EQ(code_of([&] { read_intervention_config(tmp / "none.json"); }), ErrorCode::kMissingFile);
}

TEST(OrderText, Parse) {
    EXPECT_EQ(parse_order("standard"), Order::kStandard);
    EXPECT_EQ(parse_order("reversed"), Order::kReversed);
    EXPECT_EQ(to_string(Order::kReversed), "reversed");
    EXPECT_EQ(code_of([] { parse_order("sideways"); }), ErrorCode::kValidation);
}
