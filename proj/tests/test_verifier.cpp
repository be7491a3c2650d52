#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <random>

#include "hypcert/verifier.hpp"
#include "test_support.hpp"

using namespace hypcert;
using hypcert::testing::b1_spec;
using hypcert::testing::b2_spec;
using hypcert::testing::form1_rich;
using hypcert::testing::form2_rich;

namespace {

Region coarse(int n = 9)
{
    Region r;
    r.t_count = r.x_count = r.xi_count = n;
    return r;
}

PolySymbol x(int j) { return PolySymbol::x(2, j); }
PolySymbol xi(int j) { return PolySymbol::xi(2, j); }
PolySymbol t2() { return PolySymbol::t(2); }

/// Form1, d = 2, p = 1: q1 = qb xi2^2, q2 = xi2^2, r1 = 1/2, phi = x2, psi = 0.
NormalFormSpec p1_model(const Rational& qb)
{
    NormalFormSpec s;
    s.variant = NormalFormVariant::Form1;
    s.d = 2;
    s.p = 1;
    s.q = {xi(2).pow(2) * qb, xi(2).pow(2)};
    s.r = {PolySymbol::constant(2, Rational(1, 2))};
    s.phi = x(2);
    s.psi = PolySymbol(2);
    return s;
}

struct ThreadsGuard {
    explicit ThreadsGuard(const char* v) { setenv("HYPCERT_THREADS", v, 1); }
    ~ThreadsGuard() { unsetenv("HYPCERT_THREADS"); }
};

} // namespace

// ---------------------------------------------------------------------------
// Grid plumbing

TEST(Region, Validation)
{
    Region r;
    EXPECT_NO_THROW(r.validate());
    r.t_count = 2;
    EXPECT_THROW(r.validate(), InvariantViolation);
    r = Region{};
    r.t_max = 0;
    EXPECT_THROW(r.validate(), InvariantViolation);
    r = Region{};
    r.eta_den = -1;
    EXPECT_THROW(r.validate(), InvariantViolation);
    EXPECT_DOUBLE_EQ(Region{}.eta(), 1e-12);
}

TEST(PhaseGrid, RefinementContainsOriginalPoints)
{
    Region r = coarse(9);
    auto g = PhaseGrid::make(2, r), f = PhaseGrid::make(2, r.refined());
    for (std::size_t v = 0; v < g.values.size(); ++v)
        for (std::size_t k = 0; k < g.values[v].size(); ++k) EXPECT_EQ(g.values[v][k], f.values[v][2 * k]) << v << " " << k;
    auto m = PhaseGrid::make(2, r, true), mf = PhaseGrid::make(2, r.refined(), true);
    for (std::size_t k = 0; k < m.values[0].size(); ++k) EXPECT_EQ(m.values[0][k], mf.values[0][2 * k + 1]);
    EXPECT_EQ(m.values[0].size(), 8u);
    EXPECT_LT(m.values[0].front(), 0);
}

TEST(PhaseGrid, GridPolyMatchesDirectEvaluation)
{
    std::mt19937_64 rng(4);
    auto g = PhaseGrid::make(2, coarse(5));
    for (int k = 0; k < 20; ++k) {
        PolySymbol f = hypcert::testing::random_poly(rng, 2, 4, 6);
        GridPoly gp(f, g);
        for (int s = 0; s < 10; ++s) {
            std::uint64_t flat = rng() % g.size();
            std::vector<int> idx;
            g.decode(flat, idx);
            auto pt = g.point(idx);
            double direct = f.evaluate(std::span<const double>(pt));
            EXPECT_NEAR(gp(idx), direct, 1e-13 * (1 + std::abs(direct)));
        }
    }
}

TEST(Parallel, ChunksRunOnceEach)
{
    std::vector<int> hits(1000, 0);
    for_each_chunk(hits.size(), [&](std::size_t i) { ++hits[i]; }, 4);
    for (int h : hits) EXPECT_EQ(h, 1);
    ThreadsGuard g("3");
    EXPECT_EQ(worker_count(), 3);
}

// ---------------------------------------------------------------------------
// Nonnegativity

TEST(Nonnegativity, B1IsOneSided)
{
    PolySymbol a = build_normal_form(b1_spec());
    auto r = verify_nonnegativity(a, coarse(17));
    EXPECT_TRUE(r.pass);
    EXPECT_GE(r.min_value, 0);
    EXPECT_TRUE(r.negative_for_negative_t);
    ASSERT_EQ(r.mirrored_witness.size(), 6u);
    EXPECT_LT(r.mirrored_witness[0], 0);
    EXPECT_LT(r.mirrored_min, 0);
    // The documented witness lies on the mirrored 33-point grid and is negative.
    auto m = PhaseGrid::make(2, Region{}, true);
    EXPECT_NE(std::find(m.values[0].begin(), m.values[0].end(), -0.05), m.values[0].end());
    std::vector<Rational> w{Rational(-1, 20), Rational(-1, 20), 0, 0, 0, 1};
    EXPECT_EQ(a.evaluate(std::span<const Rational>(w)), Rational(-1, 8000));
}

TEST(Nonnegativity, SimpleCases)
{
    auto r = verify_nonnegativity(xi(1).pow(2), coarse());
    EXPECT_TRUE(r.pass);
    EXPECT_FALSE(r.negative_for_negative_t);
    r = verify_nonnegativity(-t2().pow(2), coarse());
    EXPECT_FALSE(r.pass);
    EXPECT_GT(r.witness[0], 0);
    EXPECT_EQ(r.points, 9u * 81 * 81);
}

// ---------------------------------------------------------------------------
// c and kappa

TEST(EstimateC, Examples)
{
    PolySymbol a2 = build_normal_form(b2_spec());
    EXPECT_GE(estimate_c(a2, x(1), coarse(17)).value, 0.9);

    PolySymbol iso = t2().pow(2) * (xi(1).pow(2) + xi(2).pow(2));
    auto e = estimate_c(iso, PolySymbol(2), coarse());
    EXPECT_NEAR(e.value, 1.0, 1e-12);
    EXPECT_EQ(e.evaluated + e.excluded, e.points);
    EXPECT_EQ(e.excluded, 81u * 81); // exactly the t = 0 slice

    e = estimate_c((t2() - x(1)).pow(2) * xi(2).pow(2), PolySymbol(2), coarse(17));
    EXPECT_LT(e.value, 1e-6);
    EXPECT_GT(e.witness[0], 0);
    EXPECT_NEAR(e.witness[0], e.witness[1], 1e-12);
}

TEST(EstimateKappa, Examples)
{
    auto k2 = estimate_kappa(build_normal_form(b2_spec()), x(1), coarse(17));
    EXPECT_GT(k2.value, 0.4);
    EXPECT_LE(k2.value, 0.5 + 1e-6);
    EXPECT_EQ(estimate_kappa(build_normal_form(b1_spec()), x(1), coarse()).value, 0.0);
    auto k = estimate_kappa(xi(1).pow(2), x(1), coarse());
    EXPECT_NEAR(k.value, 1.0, 1e-12);
    EXPECT_EQ(k.evaluated + k.excluded, k.points);
    EXPECT_THROW(estimate_kappa(PolySymbol(2), x(1), coarse()), AllPointsDegenerate);
    EXPECT_THROW(estimate_c(PolySymbol(2), t2(), coarse()), AllPointsDegenerate);
}

TEST(GridCertificate, FusedPassMatchesSeparateOps)
{
    PolySymbol a = build_normal_form(b2_spec());
    auto cert = certify_grid(a, x(1), coarse());
    EXPECT_EQ(cert.c->value, estimate_c(a, x(1), coarse()).value);
    EXPECT_EQ(cert.kappa->value, estimate_kappa(a, x(1), coarse()).value);
    EXPECT_EQ(cert.nonneg.min_value, verify_nonnegativity(a, coarse()).min_value);
}

TEST(GridCertificate, RefinementIsMonotone)
{
    for (const auto& s : {b1_spec(), b2_spec(), form1_rich(), form2_rich()}) {
        PolySymbol a = build_normal_form(s);
        PolySymbol phi = construct_time_function(s).phi;
        Region r = coarse(5);
        if (s.d == 3) r.x_count = r.xi_count = 3;
        auto lo = certify_grid(a, phi, r), hi = certify_grid(a, phi, r.refined());
        EXPECT_LE(hi.c->value, lo.c->value);
        EXPECT_GE(hi.kappa->value, lo.kappa->value);
        EXPECT_LE(hi.nonneg.min_value, lo.nonneg.min_value);
    }
}

TEST(GridCertificate, IndependentOfWorkerCount)
{
    PolySymbol a = build_normal_form(b2_spec());
    GridCertificate one, eight;
    {
        ThreadsGuard g("1");
        one = certify_grid(a, x(1), coarse(11));
    }
    {
        ThreadsGuard g("8");
        eight = certify_grid(a, x(1), coarse(11));
    }
    EXPECT_EQ(one.c->value, eight.c->value);
    EXPECT_EQ(one.c->witness, eight.c->witness);
    EXPECT_EQ(one.kappa->value, eight.kappa->value);
    EXPECT_EQ(one.kappa->witness, eight.kappa->witness);
    EXPECT_EQ(one.nonneg.mirrored_witness, eight.nonneg.mirrored_witness);
}

TEST(GridCertificate, ShrinkingRegionApproachesTarget)
{
    for (const auto& s : {b1_spec(), b2_spec()}) {
        PolySymbol a = build_normal_form(s);
        auto tf = construct_time_function(s);
        const double target = to_double(tf.kappa_target);
        Region r = coarse(9);
        auto full = certify_grid(a, tf.phi, r), half = certify_grid(a, tf.phi, r.halved());
        EXPECT_LT(half.kappa->value, 1);
        EXPECT_LE(half.kappa->value, 1.25 * target);
        EXPECT_LE(std::abs(half.kappa->value - target), std::abs(full.kappa->value - target) + 1e-12);
        EXPECT_GT(half.c->value, 0);
    }
}

// ---------------------------------------------------------------------------
// Glaeser

TEST(Glaeser, Examples)
{
    RationalPoly s2({0, 0, 1}), s4({0, 0, 0, 0, 1}), s1({0, 1});
    auto r = glaeser_check(s2, -1, 1, 0);
    EXPECT_TRUE(r.pass);
    EXPECT_NEAR(r.worst_ratio, 1.0, 1e-12);
    r = glaeser_check(s4, -1, 1, 0);
    EXPECT_TRUE(r.pass);
    EXPECT_LE(r.worst_ratio, 16.0 / 24.0 + 1e-12);
    r = glaeser_check(s1, 0, 1, 0);
    EXPECT_FALSE(r.pass);
    EXPECT_THROW(glaeser_check(s1, -1, 1, 0), NegativeInput);
}

TEST(Glaeser, RandomNonnegativeQuarticsPass)
{
    // f = (s - u)^2 (s - v)^2 + c >= 0 everywhere; Glaeser holds with sup over R, and on a
    // sufficiently enlarged interval.
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-0.5, 0.5), c(0.0, 0.2);
    for (int k = 0; k < 30; ++k) {
        Rational a(u(rng)), b(u(rng)), cc(c(rng));
        RationalPoly f = RationalPoly({-a, 1}) * RationalPoly({-a, 1}) * RationalPoly({-b, 1}) * RationalPoly({-b, 1}) + RationalPoly({cc});
        auto r = glaeser_check(f, -0.5, 0.5, 10.0);
        EXPECT_TRUE(r.pass) << r.worst_ratio;
    }
}

// ---------------------------------------------------------------------------
// minimize_Q

TEST(MinimizeQ, ClosedFormP1)
{
    for (Rational qb : {Rational(1, 2), Rational(1), Rational(2)}) {
        ExtendedQ q = build_extended_Q(p1_model(qb), build_cutoff(0.5));
        std::vector<double> theta(q.theta_dim(), 0.0);
        auto r = minimize_Q(q, theta, std::vector<double>{3.0, -2.0});
        const double qd = to_double(qb);
        EXPECT_NEAR(r.m, qd / (1 + qd), 1e-8);
        EXPECT_NEAR(r.w_bar[0], -1 / (1 + qd), 1e-8);
        EXPECT_NEAR(r.w_bar[1], 0, 1e-8);
        EXPECT_LE(r.grad_norm, 1e-10 * (1 + r.m));
        EXPECT_GT(r.hessian_cond, 1);
    }
}

TEST(MinimizeQ, ConstantInTheta)
{
    // Only t, x2 and eps vary: every coefficient ratio stays constant.
    ExtendedQ q = build_extended_Q(p1_model(1), build_cutoff(0.5));
    std::vector<double> zero(q.theta_dim(), 0.0);
    const double m0 = minimize_Q(q, zero).m;
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-0.05, 0.05);
    for (int k = 0; k < 20; ++k) {
        std::vector<double> th = zero;
        th[0] = std::abs(u(rng));
        th[1] = u(rng);
        th.back() = u(rng);
        EXPECT_NEAR(minimize_Q(q, th).m, m0, 1e-12);
    }
}

TEST(MinimizeQ, MinimalityAgainstRandomProbes)
{
    std::mt19937_64 rng(12);
    for (const auto& s : {form1_rich(), form2_rich()}) {
        ExtendedQ q = build_extended_Q(s, build_cutoff(0.5));
        for (int k = 0; k < 5; ++k) {
            auto th = hypcert::testing::random_point(rng, q.theta_dim(), 0.05);
            auto r = minimize_Q(q, th);
            for (int j = 0; j < 1000; ++j) {
                auto w = hypcert::testing::random_point(rng, q.w_dim(), 3.0);
                for (int i = 0; i < q.w_dim(); ++i) w[i] += r.w_bar[i];
                EXPECT_LE(r.m, q(w, th) + 1e-14);
            }
        }
    }
}

TEST(MinimizeQ, EnvelopeGradientMatchesFiniteDifferences)
{
    std::mt19937_64 rng(21);
    for (const auto& s : {form1_rich(), form2_rich()}) {
        ExtendedQ q = build_extended_Q(s, build_cutoff(0.5));
        for (int k = 0; k < 10; ++k) {
            auto th = hypcert::testing::random_point(rng, q.theta_dim(), 0.05);
            auto r = minimize_Q(q, th);
            auto grad = envelope_gradient(q, th, r.w_bar);
            const double h = 1e-5;
            for (int i = 0; i < q.theta_dim(); ++i) {
                auto tp = th, tm = th;
                tp[i] += h;
                tm[i] -= h;
                double fd = (minimize_Q(q, tp, r.w_bar).m - minimize_Q(q, tm, r.w_bar).m) / (2 * h);
                EXPECT_LE(std::abs(fd - grad[i]), 1e-4 * std::max(1.0, std::abs(grad[i]))) << "axis " << i;
            }
        }
    }
}

TEST(MinimizeQ, PathMatchesColdStarts)
{
    ExtendedQ q = build_extended_Q(form2_rich(), build_cutoff(0.5));
    std::mt19937_64 rng(1);
    std::vector<std::vector<double>> ths;
    for (int k = 0; k < 15; ++k) ths.push_back(hypcert::testing::random_point(rng, q.theta_dim(), 0.05));
    auto path = minimize_Q_path(q, ths);
    for (std::size_t i = 0; i < ths.size(); ++i) EXPECT_NEAR(path[i].m, minimize_Q(q, ths[i]).m, 1e-12);
    EXPECT_THROW(minimize_Q(q, std::vector<double>(2, 0.0)), DimensionMismatch);
}

// ---------------------------------------------------------------------------
// Structural chain

namespace {
const StructuralCheck& find(const std::vector<StructuralCheck>& v, const std::string& name)
{
    for (const auto& c : v)
        if (c.name == name) return c;
    throw std::runtime_error("missing check " + name);
}
} // namespace

TEST(Structural, B1)
{
    auto s = b1_spec();
    auto checks = check_structural(s, construct_time_function(s), Region{});
    for (const auto& c : checks) EXPECT_TRUE(c.pass) << c.name << ": " << c.note;
    EXPECT_GE(find(checks, "branch_c1").measured, 0.98);
    EXPECT_GE(find(checks, "branch_c_prime").measured, 0.98);
    EXPECT_GE(find(checks, "reconstruction_bound").worst_margin, -1e-12);
    EXPECT_EQ(find(checks, "glaeser").measured, 0.0);
}

TEST(Structural, B2)
{
    auto s = b2_spec();
    auto checks = check_structural(s, construct_time_function(s), Region{});
    for (const auto& c : checks) EXPECT_TRUE(c.pass) << c.name << ": " << c.note;
    // Boundary case: g(0, z) = 0 at x_p = 0 forces a zero margin.
    EXPECT_EQ(find(checks, "t_phi_lower").worst_margin, 0.0);
    EXPECT_GT(find(checks, "branch_c1").measured, 0.9);
    EXPECT_GT(find(checks, "branch_c_prime").measured, 0.9);
    EXPECT_LE(find(checks, "glaeser").measured, 1 + 1e-9);
    EXPECT_GT(find(checks, "reconstruction_bound").samples, 0u);
}

TEST(Structural, RichSpecs)
{
    for (const auto& s : {form1_rich(), form2_rich()}) {
        Region r;
        r.t_max = r.x_half = r.xi_half = 0.05;
        StructuralOptions opt;
        opt.count = 3;
        auto checks = check_structural(s, construct_time_function(s), r, opt);
        EXPECT_TRUE(find(checks, "reconstruction_bound").pass);
        EXPECT_GT(find(checks, "reconstruction_bound").measured, 0);
    }
}
