#pragma once

#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace tamex {

enum class Relation { Less, LessEqual, Equal, GreaterEqual, Greater };

// How atoms are printed. Ascii is the canonical model-format spelling and is
// what annotation patterns are matched against; Unicode is for explanations.
enum class Notation { Ascii, Unicode };

// Integer expression over variables, constants and literals.
struct Expr {
    enum class Kind { Literal, Symbol, Add, Sub, Mul, Neg };

    Kind kind = Kind::Literal;
    std::int64_t value = 0;
    std::string name;
    std::vector<Expr> operands;

    static Expr literal(std::int64_t v);
    static Expr symbol(std::string n);
    static Expr binary(Kind k, Expr lhs, Expr rhs);
    static Expr negate(Expr e);

    bool is_literal() const noexcept { return kind == Kind::Literal; }
    bool is_symbol() const noexcept { return kind == Kind::Symbol; }

    bool operator==(const Expr&) const = default;
};

struct Comparison {
    Expr lhs;
    Relation rel = Relation::Equal;
    Expr rhs;

    bool operator==(const Comparison&) const = default;
};

// Both parsers throw SyntaxError with line 0; callers that know the
// document position rethrow with the proper line.
Expr parse_expr(std::string_view text);
Comparison parse_comparison(std::string_view text);
Relation parse_relation(std::string_view text);

std::string to_string(Relation rel, Notation notation = Notation::Ascii);
std::string to_string(const Expr& e, Notation notation = Notation::Ascii);
std::string to_string(const Comparison& c, Notation notation = Notation::Ascii);

using Resolver = std::function<std::int64_t(std::string_view)>;

std::int64_t evaluate(const Expr& e, const Resolver& resolve);
bool holds(Relation rel, std::int64_t lhs, std::int64_t rhs) noexcept;
bool evaluate(const Comparison& c, const Resolver& resolve);

void collect_symbols(const Expr& e, std::set<std::string>& out);
void collect_symbols(const Comparison& c, std::set<std::string>& out);

}  // namespace tamex
