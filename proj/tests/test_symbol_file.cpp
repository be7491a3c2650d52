#include <gtest/gtest.h>

#include <string>

#include "hypcert/symbol_file.hpp"
#include "test_support.hpp"

using namespace hypcert;

namespace {

std::string fixture(const std::string& name) { return std::string(HYPCERT_FIXTURE_DIR) + "/" + name; }

const char* kHeader = R"("schema_version": 1, "dim": 2, "base_point": {"t": "0", "x": ["0", "0"], "tau": "0", "xi": ["0", "1"]})";

std::string with_symbol(const std::string& symbol, const std::string& extra = "")
{
    return std::string("{") + kHeader + ", \"symbol\": " + symbol + extra + "}";
}

template <class E, class Fn>
E expect_throw(Fn&& fn)
{
    try {
        fn();
    } catch (const E& e) {
        return e;
    }
    ADD_FAILURE() << "expected exception";
    throw std::runtime_error("unreachable");
}

} // namespace

TEST(SymbolFile, B2FixtureHasFiveCanonicalTerms)
{
    SymbolFile f = parse_symbol_file(fixture("b2.json"));
    EXPECT_EQ(f.dim, 2);
    EXPECT_EQ(f.symbol.size(), 5u);
    // Hand expansion of (t - x1)^2 xi2^2 + (1/2) xi1^2 + (1/2) x1^3 xi2^2.
    const int d = 2;
    PolySymbol t = PolySymbol::t(d), x1 = PolySymbol::x(d, 1), xi1 = PolySymbol::xi(d, 1), xi2 = PolySymbol::xi(d, 2);
    PolySymbol want = t.pow(2) * xi2.pow(2) - t * x1 * xi2.pow(2) * Rational(2) + x1.pow(2) * xi2.pow(2) + xi1.pow(2) * Rational(1, 2) +
                      x1.pow(3) * xi2.pow(2) * Rational(1, 2);
    EXPECT_EQ(f.symbol, want);
    ASSERT_TRUE(f.normal_form.has_value());
    EXPECT_EQ(f.normal_form->variant, NormalFormVariant::Form2);
    EXPECT_EQ(build_normal_form(*f.normal_form), f.symbol);
    EXPECT_EQ(f.base_point, PhasePoint::base(2));
    EXPECT_EQ(f.options.slack, Rational(1, 100));
    EXPECT_EQ(f.region.t_count, 33);
}

TEST(SymbolFile, FixturesMatchTestSpecs)
{
    EXPECT_EQ(parse_symbol_file(fixture("b1.json")).symbol, build_normal_form(hypcert::testing::b1_spec()));
    EXPECT_EQ(parse_symbol_file(fixture("b2_bbis.json")).symbol, build_normal_form(hypcert::testing::b2_spec(Rational(2))));
}

TEST(SymbolFile, CanonicalRoundTripIsByteIdentical)
{
    for (const char* name : {"b1.json", "b2.json", "b2_bbis.json", "nonsingular.json", "two_sided.json", "marginal.json"}) {
        const std::string text = read_file(fixture(name));
        SymbolFile f = parse_symbol_text(text);
        EXPECT_EQ(serialize(f), text) << name;
        SymbolFile g = parse_symbol_text(serialize(f));
        EXPECT_EQ(g.symbol, f.symbol) << name;
        EXPECT_EQ(serialize(g), serialize(f)) << name;
    }
}

TEST(SymbolFile, NonCanonicalInputCanonicalizes)
{
    // Terms out of order, decimal coefficient, defaults omitted.
    SymbolFile f = parse_symbol_text(with_symbol(R"([{"coeff": "0.5", "exp": {"xi1": 2}}, {"coeff": "1", "exp": {"t": 2, "xi2": 2}}])"));
    std::string canon = serialize(f);
    EXPECT_EQ(serialize(parse_symbol_text(canon)), canon);
    EXPECT_NE(canon.find("\"1/2\""), std::string::npos);
}

TEST(SymbolFile, RationalCoefficientsAreExact)
{
    SymbolFile f = parse_symbol_text(with_symbol(R"([{"coeff": "1/3", "exp": {"t": 2}}])"));
    Exponent e(6, 0);
    e[0] = 2;
    EXPECT_EQ(f.symbol.coefficient(e), Rational(1, 3));
    EXPECT_NE(serialize(f).find("\"1/3\""), std::string::npos);
}

TEST(SymbolFile, EmptyTermListIsSchemaError)
{
    auto e = expect_throw<SchemaError>([] { parse_symbol_text(with_symbol("[]")); });
    EXPECT_EQ(e.path, "$.symbol");
}

TEST(SymbolFile, UnknownKeysRejected)
{
    auto top = expect_throw<SchemaError>([] { parse_symbol_text(with_symbol(R"([{"coeff": "1", "exp": {"t": 2}}])", R"(, "colour": 1)")); });
    EXPECT_EQ(top.path, "$.colour");
    auto term = expect_throw<SchemaError>([] { parse_symbol_text(with_symbol(R"([{"coeff": "1", "exp": {"t": 2}, "note": "x"}])")); });
    EXPECT_EQ(term.path, "$.symbol[0].note");
    auto var = expect_throw<SchemaError>([] { parse_symbol_text(with_symbol(R"([{"coeff": "1", "exp": {"y1": 2}}])")); });
    EXPECT_EQ(var.path, "$.symbol[0].exp.y1");
    auto opt = expect_throw<SchemaError>(
        [] { parse_symbol_text(with_symbol(R"([{"coeff": "1", "exp": {"t": 2}}])", R"(, "options": {"slak": "1/100"})")); });
    EXPECT_EQ(opt.path, "$.options.slak");
    auto nf = expect_throw<SchemaError>([] {
        parse_symbol_text(with_symbol(R"([{"coeff": "1", "exp": {"t": 2}}])",
                                      R"(, "normal_form": {"variant": "form2", "p": 1, "q": [], "r": [], "g": [], "phi": []})"));
    });
    EXPECT_EQ(nf.path, "$.normal_form.phi");
}

TEST(SymbolFile, MalformedValuesAreSchemaErrors)
{
    EXPECT_THROW(parse_symbol_text(with_symbol(R"([{"coeff": 1, "exp": {"t": 2}}])")), SchemaError);
    EXPECT_THROW(parse_symbol_text(with_symbol(R"([{"coeff": "1/0", "exp": {"t": 2}}])")), SchemaError);
    EXPECT_THROW(parse_symbol_text(with_symbol(R"([{"coeff": "0", "exp": {"t": 2}}])")), SchemaError);
    EXPECT_THROW(parse_symbol_text(with_symbol(R"([{"coeff": "1", "exp": {"t": 2}}, {"coeff": "2", "exp": {"t": 2}}])")), SchemaError);
    EXPECT_THROW(parse_symbol_text(with_symbol(R"([{"coeff": "1", "exp": {"t": 0}}])")), SchemaError);
    EXPECT_THROW(parse_symbol_text(with_symbol(R"([{"coeff": "1", "exp": {"t": 1.5}}])")), SchemaError);
    EXPECT_THROW(parse_symbol_text(with_symbol(R"([{"coeff": "1", "exp": {"t": 2}}])", R"(, "region": {"xi_half": 1.5})")), SchemaError);
    EXPECT_THROW(parse_symbol_text(with_symbol(R"([{"coeff": "1", "exp": {"t": 2}}])", R"(, "options": {"slack": "-1"})")), SchemaError);
    EXPECT_THROW(parse_symbol_text(with_symbol(R"([{"coeff": "1", "exp": {"t": 2}}])", R"(, "options": {"grid": {"t": 2}})")), SchemaError);
    EXPECT_THROW(parse_symbol_text("[1, 2]"), SchemaError);
    std::string v2 = with_symbol(R"([{"coeff": "1", "exp": {"t": 2}}])");
    v2.replace(v2.find("\"schema_version\": 1"), 19, "\"schema_version\": 2");
    EXPECT_THROW(parse_symbol_text(v2), SchemaError);
}

TEST(SymbolFile, DimensionErrors)
{
    EXPECT_THROW(parse_symbol_text(with_symbol(R"([{"coeff": "1", "exp": {"x3": 2}}])")), DimensionError);
    EXPECT_THROW(parse_symbol_text(with_symbol(R"([{"coeff": "1", "exp": {"xi3": 2}}])")), DimensionError);
    std::string bad = with_symbol(R"([{"coeff": "1", "exp": {"t": 2}}])");
    bad.replace(bad.find("\"x\": [\"0\", \"0\"]"), 15, "\"x\": [\"0\"]");
    EXPECT_THROW(parse_symbol_text(bad), DimensionError);
}

TEST(SymbolFile, SyntaxErrorsCarryLineAndColumn)
{
    const std::string text = "{\n  \"dim\": 2,\n  \"symbol\": [,]\n}\n";
    auto e = expect_throw<ParseError>([&] { parse_symbol_text(text); });
    EXPECT_EQ(e.line, 3);
    EXPECT_EQ(e.column, 14);
    auto eof = expect_throw<ParseError>([] { parse_symbol_text("{\"dim\": 2"); });
    EXPECT_EQ(eof.line, 1);
    EXPECT_GE(eof.column, 9);
}

TEST(SymbolFile, LineColumnOracle)
{
    const std::string text = "ab\ncd\n\nefg";
    EXPECT_EQ(detail::line_column(text, 0), std::make_pair(1, 1));
    EXPECT_EQ(detail::line_column(text, 4), std::make_pair(2, 2));
    EXPECT_EQ(detail::line_column(text, 7), std::make_pair(4, 1));
}

TEST(SymbolFile, FrameFiles)
{
    CandidateFrame ok = parse_frame_text(read_file(fixture("frame_ok.json")));
    EXPECT_EQ(ok.pairs.size(), 2u);
    EXPECT_TRUE(check_frame(ok).ok);
    CandidateFrame bad = parse_frame_text(read_file(fixture("frame_bad.json")));
    FrameReport rep = check_frame(bad);
    EXPECT_FALSE(rep.ok);
    ASSERT_EQ(rep.failures.size(), 1u);
    EXPECT_NE(rep.failures[0].find("{Xi_1, X_1} = 2"), std::string::npos);

    std::string wrong = read_file(fixture("frame_ok.json"));
    wrong.replace(wrong.find("\"first_index\": 1"), 16, "\"first_index\": 2");
    EXPECT_THROW(parse_frame_text(wrong), DimensionError);
}

TEST(Fnv1a, ReferenceVectors)
{
    EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
    EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
    EXPECT_EQ(fnv1a_hex("foobar"), "85944171f73967e8");
}
