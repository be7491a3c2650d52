#include <gtest/gtest.h>

#include <random>

#include "hypcert/symbolic_core.hpp"
#include "test_support.hpp"

using namespace hypcert;
using hypcert::testing::random_poly;

namespace {

PolySymbol X(int d, int j) { return PolySymbol::x(d, j); }
PolySymbol XI(int d, int j) { return PolySymbol::xi(d, j); }
PolySymbol T(int d) { return PolySymbol::t(d); }
PolySymbol C(int d, Rational c) { return PolySymbol::constant(d, c); }

} // namespace

TEST(PolySymbol, ArithmeticIsExactAndDropsZeros)
{
    const int d = 2;
    PolySymbol a = X(d, 1) * Rational(1, 3) + XI(d, 2);
    PolySymbol b = a - XI(d, 2);
    EXPECT_EQ(b.size(), 1u);
    EXPECT_EQ(b.coefficient(Exponent{0, 1, 0, 0, 0, 0}), Rational(1, 3));
    EXPECT_TRUE((a - a).is_zero());
    // (t - x1)^2 expands to three terms
    EXPECT_EQ((T(d) - X(d, 1)).pow(2).size(), 3u);
}

TEST(PolySymbol, RejectsMismatchedDimensions)
{
    EXPECT_THROW(X(2, 1) + X(3, 1), DimensionMismatch);
    EXPECT_THROW(poisson_bracket(X(2, 1), X(3, 1)), DimensionMismatch);
}

TEST(PolySymbol, LayoutNamesRoundTrip)
{
    Layout lay{3};
    for (int i = 0; i < lay.nvars(); ++i) EXPECT_EQ(lay.index_of(lay.name(i)), i);
    EXPECT_EQ(lay.index_of("x4"), -1);
    EXPECT_EQ(lay.index_of("xi0"), -1);
    EXPECT_EQ(lay.index_of("y1"), -1);
}

TEST(PolySymbol, ToStringLeadingTermFirst)
{
    const int d = 2;
    PolySymbol p = (T(d) - X(d, 1)).pow(2) * XI(d, 2).pow(2) + XI(d, 1).pow(2) * Rational(1, 2);
    EXPECT_EQ(p.to_string(), "t^2*xi2^2 - 2*t*x1*xi2^2 + x1^2*xi2^2 + 1/2*xi1^2");
}

// ---------------------------------------------------------------------------

TEST(PoissonBracket, CanonicalPairsArePlusOne)
{
    EXPECT_EQ(poisson_bracket(XI(3, 1), X(3, 1)), C(3, 1));
    EXPECT_EQ(poisson_bracket(PolySymbol::tau(3), T(3)), C(3, 1));
    EXPECT_TRUE(poisson_bracket(XI(3, 1), X(3, 2)).is_zero());
}

TEST(PoissonBracket, MixedMonomialMatchesHandExpansion)
{
    const int d = 2;
    PolySymbol f = X(d, 1).pow(2) * XI(d, 2);
    PolySymbol got = poisson_bracket(f, XI(d, 1));
    EXPECT_EQ(got, X(d, 1) * XI(d, 2) * Rational(-2));

    std::mt19937_64 rng(11);
    for (int k = 0; k < 5; ++k) {
        auto pt = hypcert::testing::random_point(rng, Layout{d}.nvars());
        EXPECT_NEAR(got.evaluate(std::span<const double>(pt)), hypcert::testing::fd_bracket(f, XI(d, 1), pt), 1e-7);
    }
}

TEST(PoissonBracket, AgreesWithFiniteDifferenceOracleOnRandomPolys)
{
    std::mt19937_64 rng(5);
    for (int k = 0; k < 30; ++k) {
        PolySymbol f = random_poly(rng, 2), g = random_poly(rng, 2);
        auto pt = hypcert::testing::random_point(rng, Layout{2}.nvars());
        double exact = poisson_bracket(f, g).evaluate(std::span<const double>(pt));
        EXPECT_NEAR(exact, hypcert::testing::fd_bracket(f, g, pt), 1e-6 * (1 + std::abs(exact)));
    }
}

TEST(PoissonBracket, AntisymmetryLeibnizJacobi)
{
    std::mt19937_64 rng(2024);
    for (int k = 0; k < 100; ++k) {
        PolySymbol f = random_poly(rng, 3), g = random_poly(rng, 3), h = random_poly(rng, 3);
        EXPECT_EQ(poisson_bracket(f, g), -poisson_bracket(g, f));
        EXPECT_EQ(poisson_bracket(f, g * h), g * poisson_bracket(f, h) + h * poisson_bracket(f, g));
        PolySymbol jac = poisson_bracket(f, poisson_bracket(g, h)) + poisson_bracket(g, poisson_bracket(h, f)) +
                         poisson_bracket(h, poisson_bracket(f, g));
        EXPECT_TRUE(jac.is_zero()) << jac.to_string();
    }
}

// ---------------------------------------------------------------------------

TEST(HamiltonField, TimeFunctionField)
{
    const int d = 2;
    PhasePoint pt{Rational(1, 7), {2, -3}, 5, {Rational(1, 2), 1}};
    auto h = hamilton_field(T(d) - X(d, 1), pt);
    EXPECT_EQ(h, (std::vector<Rational>{0, 0, 0, -1, 1, 0}));
}

TEST(HamiltonField, ConstantHasZeroField)
{
    auto h = hamilton_field(C(2, 4), PhasePoint::base(2));
    for (const auto& v : h) EXPECT_EQ(v, 0);
}

TEST(HamiltonField, MatchesFiniteDifferenceDerivative)
{
    const int d = 2;
    PhasePoint pt{0, {0, 0}, 0, {3, 1}};
    PolySymbol f = XI(d, 1).pow(2);
    auto h = hamilton_field(f, pt);
    EXPECT_EQ(h, (std::vector<Rational>{0, 6, 0, 0, 0, 0}));
    std::vector<double> at{0, 0, 0, 0, 3, 1};
    EXPECT_NEAR(hypcert::testing::fd_partial(f, at, Layout{d}.xi(1)), to_double(h[1]), 1e-8);
}

TEST(HamiltonField, BracketIsDirectionalDerivative)
{
    std::mt19937_64 rng(77);
    const int d = 2;
    for (int k = 0; k < 40; ++k) {
        PolySymbol f = random_poly(rng, d), g = random_poly(rng, d);
        std::vector<Rational> c;
        for (int i = 0; i < Layout{d}.nvars(); ++i) c.push_back(hypcert::testing::random_rational(rng));
        PhasePoint pt = PhasePoint::from_coords(d, c);
        auto h = hamilton_field(f, pt);
        Rational dir = 0;
        for (int i = 0; i < Layout{d}.nvars(); ++i) dir += h[i] * g.derivative(i).evaluate(pt);
        EXPECT_EQ(dir, poisson_bracket(f, g).evaluate(pt));
    }
}

// ---------------------------------------------------------------------------

TEST(Homogeneity, Examples)
{
    const int d = 2;
    EXPECT_TRUE(homogeneity_check((T(d) - X(d, 1)).pow(2) * XI(d, 2).pow(2), 2).homogeneous);
    EXPECT_TRUE(homogeneity_check(X(d, 1), 0).homogeneous);
    auto r = homogeneity_check(XI(d, 1) + XI(d, 2).pow(2), 1);
    EXPECT_FALSE(r.homogeneous);
    EXPECT_EQ(r.residual, XI(d, 2).pow(2));
}

TEST(Homogeneity, BracketDegreeAddsMinusOne)
{
    std::mt19937_64 rng(99);
    for (int k = 0; k < 60; ++k) {
        int m1 = k % 3, m2 = (k / 3) % 3;
        PolySymbol f = random_poly(rng, 2, 4, 4, m1), g = random_poly(rng, 2, 4, 4, m2);
        ASSERT_TRUE(homogeneity_check(f, m1).homogeneous);
        ASSERT_TRUE(homogeneity_check(g, m2).homogeneous);
        EXPECT_TRUE(homogeneity_check(poisson_bracket(f, g), m1 + m2 - 1).homogeneous);
    }
}

// ---------------------------------------------------------------------------

TEST(QuadraticJet, DropsCubicTerms)
{
    const int d = 2;
    PolySymbol a = ((T(d) - X(d, 1)).pow(2) + X(d, 1).pow(3)) * XI(d, 2).pow(2);
    PolySymbol p = a - PolySymbol::tau(d).pow(2);
    QuadraticJet jet = quadratic_jet(p, PhasePoint::base(d));
    EXPECT_EQ(jet.as_polynomial(), (T(d) - X(d, 1)).pow(2) - PolySymbol::tau(d).pow(2));
}

TEST(QuadraticJet, TwoSidedModel)
{
    const int d = 3;
    PolySymbol xi2 = XI(d, 1).pow(2) + XI(d, 2).pow(2) + XI(d, 3).pow(2);
    PolySymbol p = T(d).pow(2) * xi2 - PolySymbol::tau(d).pow(2);
    QuadraticJet jet = quadratic_jet(p, PhasePoint::base(d));
    EXPECT_EQ(jet.as_polynomial(), T(d).pow(2) - PolySymbol::tau(d).pow(2));
}

TEST(QuadraticJet, NonSingularPointReportsDerivative)
{
    const int d = 2;
    PolySymbol p = T(d) * XI(d, 2).pow(2) - PolySymbol::tau(d).pow(2);
    try {
        quadratic_jet(p, PhasePoint::base(d));
        FAIL() << "expected NotSingular";
    } catch (const NotSingular& e) {
        EXPECT_EQ(e.variable, "t");
        EXPECT_EQ(e.value, "1");
    }
    EXPECT_THROW(quadratic_jet(C(d, 1), PhasePoint::base(d)), NotSingular);
}

TEST(QuadraticJet, FromQuadraticRoundTrip)
{
    std::mt19937_64 rng(3);
    for (int k = 0; k < 20; ++k) {
        PolySymbol q = random_poly(rng, 2, 2, 6, -1);
        PolySymbol quad(2);
        for (const auto& [e, c] : q.terms())
            if (std::accumulate(e.begin(), e.end(), 0) == 2) quad.add_term(e, c);
        EXPECT_EQ(QuadraticJet::from_quadratic(quad).as_polynomial(), quad);
    }
}

// ---------------------------------------------------------------------------

TEST(CheckFrame, IdentityFramePasses)
{
    const int d = 3;
    CandidateFrame f{1, {}, PhasePoint::base(d)};
    for (int j = 1; j <= d; ++j) f.pairs.push_back({X(d, j), XI(d, j)});
    auto rep = check_frame(f);
    EXPECT_TRUE(rep.ok) << (rep.failures.empty() ? "" : rep.failures.front());
}

TEST(CheckFrame, ShiftedDualCoordinate)
{
    // Xi_1 = xi_1 - x1*xi2, X_1 = x1, completed by X_2 = x2 + x1^2/2, Xi_2 = xi2.
    const int d = 2;
    CandidateFrame f{1, {}, PhasePoint::base(d)};
    f.pairs.push_back({X(d, 1), XI(d, 1) - X(d, 1) * XI(d, 2)});
    f.pairs.push_back({X(d, 2) + X(d, 1).pow(2) * Rational(1, 2), XI(d, 2)});
    EXPECT_EQ(poisson_bracket(f.pairs[0].Xi, f.pairs[0].X), C(d, 1));
    auto rep = check_frame(f);
    EXPECT_TRUE(rep.ok) << (rep.failures.empty() ? "" : rep.failures.front());
}

TEST(CheckFrame, DuplicatePositionFails)
{
    const int d = 2;
    CandidateFrame f{1, {}, PhasePoint::base(d)};
    f.pairs.push_back({X(d, 1), XI(d, 1)});
    f.pairs.push_back({X(d, 1), XI(d, 2)});
    auto rep = check_frame(f);
    EXPECT_FALSE(rep.ok);
    bool saw = false;
    for (const auto& m : rep.failures) saw |= m.find("{Xi_1, X_2} = 1") != std::string::npos;
    EXPECT_TRUE(saw);
}

TEST(CheckFrame, PointConditions)
{
    const int d = 2;
    CandidateFrame f{1, {}, PhasePoint::base(d)};
    f.pairs.push_back({X(d, 1) + C(d, 1), XI(d, 1)});
    f.pairs.push_back({X(d, 2), XI(d, 2) - XI(d, 2)}); // Xi_2 = 0 at base
    auto rep = check_frame(f);
    EXPECT_FALSE(rep.ok);
    EXPECT_GE(rep.failures.size(), 2u);
}
