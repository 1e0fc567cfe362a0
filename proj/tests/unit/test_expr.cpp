#include <gtest/gtest.h>

#include <map>

#include "tamex/error.hpp"
#include "tamex/expr.hpp"

using namespace tamex;

namespace {

std::int64_t eval(const std::string& text, const std::map<std::string, std::int64_t>& env = {}) {
    return evaluate(parse_expr(text), [&env](std::string_view n) { return env.at(std::string(n)); });
}

}  // namespace

TEST(Expr, ParsesLiteralsAndSymbols) {
    EXPECT_EQ(parse_expr("42"), Expr::literal(42));
    EXPECT_EQ(parse_expr("pE"), Expr::symbol("pE"));
    EXPECT_EQ(parse_expr("count_a + 1"),
              Expr::binary(Expr::Kind::Add, Expr::symbol("count_a"), Expr::literal(1)));
}

TEST(Expr, ArithmeticPrecedence) {
    EXPECT_EQ(eval("1 + 2 * 3"), 7);
    EXPECT_EQ(eval("(1 + 2) * 3"), 9);
    EXPECT_EQ(eval("10 - 4 - 3"), 3);
    EXPECT_EQ(eval("-3 + 5"), 2);
    EXPECT_EQ(eval("pE + s", {{"pE", 5}, {"s", 50}}), 55);
}

TEST(Expr, ComparisonRoundTrip) {
    for (const char* text : {"pc >= pE + s", "pc >= pE", "count_m == 3", "a < b", "a <= 2", "a > b - 1"}) {
        const auto c = parse_comparison(text);
        EXPECT_EQ(to_string(c), text);
        EXPECT_EQ(parse_comparison(to_string(c)), c);
    }
}

TEST(Expr, UnicodeNotation) {
    EXPECT_EQ(to_string(parse_comparison("pc >= pE + s"), Notation::Unicode), "pc ≥ pE + s");
    EXPECT_EQ(to_string(Relation::LessEqual, Notation::Unicode), "≤");
    EXPECT_EQ(to_string(Relation::GreaterEqual), ">=");
}

TEST(Expr, RelationsHold) {
    EXPECT_TRUE(holds(Relation::Less, 1, 2));
    EXPECT_FALSE(holds(Relation::Less, 2, 2));
    EXPECT_TRUE(holds(Relation::LessEqual, 2, 2));
    EXPECT_TRUE(holds(Relation::Equal, 3, 3));
    EXPECT_TRUE(holds(Relation::GreaterEqual, 3, 3));
    EXPECT_FALSE(holds(Relation::Greater, 3, 3));
}

TEST(Expr, EvaluatesComparisons) {
    const auto c = parse_comparison("pc >= pE + s");
    auto env = [](std::map<std::string, std::int64_t> m) {
        return [m](std::string_view n) { return m.at(std::string(n)); };
    };
    EXPECT_TRUE(evaluate(c, env({{"pc", 100}, {"pE", 5}, {"s", 50}})));
    EXPECT_FALSE(evaluate(c, env({{"pc", 54}, {"pE", 5}, {"s", 50}})));
}

TEST(Expr, CollectsSymbols) {
    std::set<std::string> out;
    collect_symbols(parse_comparison("pc >= pE + s"), out);
    EXPECT_EQ(out, (std::set<std::string>{"pE", "pc", "s"}));
}

TEST(Expr, RejectsMalformedInput) {
    EXPECT_THROW(parse_expr("1 +"), SyntaxError);
    EXPECT_THROW(parse_expr("(a"), SyntaxError);
    EXPECT_THROW(parse_comparison("a + b"), SyntaxError);
    EXPECT_THROW(parse_relation("=>"), SyntaxError);
}
