#include "tamex/expr.hpp"

#include <cctype>
#include <optional>

#include "tamex/error.hpp"

namespace tamex {

Expr Expr::literal(std::int64_t v) {
    Expr e;
    e.kind = Kind::Literal;
    e.value = v;
    return e;
}

Expr Expr::symbol(std::string n) {
    Expr e;
    e.kind = Kind::Symbol;
    e.name = std::move(n);
    return e;
}

Expr Expr::binary(Kind k, Expr lhs, Expr rhs) {
    Expr e;
    e.kind = k;
    e.operands.push_back(std::move(lhs));
    e.operands.push_back(std::move(rhs));
    return e;
}

Expr Expr::negate(Expr inner) {
    Expr e;
    e.kind = Kind::Neg;
    e.operands.push_back(std::move(inner));
    return e;
}

namespace {

struct Token {
    enum class Type { Int, Ident, Op, Rel, LParen, RParen, End };
    Type type = Type::End;
    std::string text;
    std::int64_t value = 0;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    Token next() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        Token t;
        if (pos_ >= src_.size()) return t;
        const char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            t.type = Token::Type::Int;
            t.text = std::string(src_.substr(start, pos_ - start));
            try {
                t.value = std::stoll(t.text);
            } catch (const std::out_of_range&) {
                fail("integer literal out of range: " + t.text);
            }
            return t;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                ++pos_;
            t.type = Token::Type::Ident;
            t.text = std::string(src_.substr(start, pos_ - start));
            return t;
        }
        // UTF-8 spellings of <= and >=
        if (src_.substr(pos_, 3) == "≤" || src_.substr(pos_, 3) == "≥") {
            t.type = Token::Type::Rel;
            t.text = src_.substr(pos_, 3) == "≤" ? "<=" : ">=";
            pos_ += 3;
            return t;
        }
        switch (c) {
            case '+':
            case '-':
            case '*':
                t.type = Token::Type::Op;
                t.text = std::string(1, c);
                ++pos_;
                return t;
            case '(':
                t.type = Token::Type::LParen;
                ++pos_;
                return t;
            case ')':
                t.type = Token::Type::RParen;
                ++pos_;
                return t;
            case '<':
            case '>':
            case '=': {
                t.type = Token::Type::Rel;
                t.text = std::string(1, c);
                ++pos_;
                if (pos_ < src_.size() && src_[pos_] == '=') {
                    t.text += '=';
                    ++pos_;
                }
                return t;
            }
            default:
                fail(std::string("unexpected character '") + c + "'");
        }
        return t;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw SyntaxError(0, msg + " in expression \"" + std::string(src_) + "\"");
    }

private:
    std::string_view src_;
    std::size_t pos_ = 0;
};

class Parser {
public:
    explicit Parser(std::string_view src) : lex_(src) { advance(); }

    Expr expression() {
        Expr lhs = term();
        while (cur_.type == Token::Type::Op && (cur_.text == "+" || cur_.text == "-")) {
            const auto kind = cur_.text == "+" ? Expr::Kind::Add : Expr::Kind::Sub;
            advance();
            lhs = Expr::binary(kind, std::move(lhs), term());
        }
        return lhs;
    }

    Relation relation() {
        if (cur_.type != Token::Type::Rel) lex_.fail("expected a relation");
        Relation r = parse_relation(cur_.text);
        advance();
        return r;
    }

    void expect_end() {
        if (cur_.type != Token::Type::End) lex_.fail("trailing input");
    }

private:
    Expr term() {
        Expr lhs = factor();
        while (cur_.type == Token::Type::Op && cur_.text == "*") {
            advance();
            lhs = Expr::binary(Expr::Kind::Mul, std::move(lhs), factor());
        }
        return lhs;
    }

    Expr factor() {
        switch (cur_.type) {
            case Token::Type::Int: {
                auto v = cur_.value;
                advance();
                return Expr::literal(v);
            }
            case Token::Type::Ident: {
                auto n = cur_.text;
                advance();
                return Expr::symbol(std::move(n));
            }
            case Token::Type::LParen: {
                advance();
                Expr inner = expression();
                if (cur_.type != Token::Type::RParen) lex_.fail("expected ')'");
                advance();
                return inner;
            }
            case Token::Type::Op:
                if (cur_.text == "-") {
                    advance();
                    Expr inner = factor();
                    // Keep negative literals as literals so printing round-trips.
                    if (inner.is_literal()) return Expr::literal(-inner.value);
                    return Expr::negate(std::move(inner));
                }
                break;
            default:
                break;
        }
        lex_.fail("expected an operand");
    }

    void advance() { cur_ = lex_.next(); }

    Lexer lex_;
    Token cur_;
};

int precedence(Expr::Kind k) {
    switch (k) {
        case Expr::Kind::Add:
        case Expr::Kind::Sub:
            return 1;
        case Expr::Kind::Mul:
            return 2;
        case Expr::Kind::Neg:
            return 3;
        default:
            return 4;
    }
}

void print(const Expr& e, std::string& out) {
    auto child = [&out](const Expr& c, bool parens) {
        if (parens) out += '(';
        print(c, out);
        if (parens) out += ')';
    };
    switch (e.kind) {
        case Expr::Kind::Literal:
            out += std::to_string(e.value);
            return;
        case Expr::Kind::Symbol:
            out += e.name;
            return;
        case Expr::Kind::Neg:
            out += '-';
            child(e.operands[0], precedence(e.operands[0].kind) < precedence(Expr::Kind::Neg) ||
                                     (e.operands[0].is_literal() && e.operands[0].value < 0));
            return;
        default: {
            const int p = precedence(e.kind);
            child(e.operands[0], precedence(e.operands[0].kind) < p);
            out += e.kind == Expr::Kind::Add ? " + " : e.kind == Expr::Kind::Sub ? " - " : " * ";
            child(e.operands[1], precedence(e.operands[1].kind) <= p);
            return;
        }
    }
}

}  // namespace

Expr parse_expr(std::string_view text) {
    Parser p(text);
    Expr e = p.expression();
    p.expect_end();
    return e;
}

Comparison parse_comparison(std::string_view text) {
    Parser p(text);
    Comparison c;
    c.lhs = p.expression();
    c.rel = p.relation();
    c.rhs = p.expression();
    p.expect_end();
    return c;
}

Relation parse_relation(std::string_view text) {
    if (text == "<") return Relation::Less;
    if (text == "<=" || text == "≤") return Relation::LessEqual;
    if (text == "=" || text == "==") return Relation::Equal;
    if (text == ">=" || text == "≥") return Relation::GreaterEqual;
    if (text == ">") return Relation::Greater;
    throw SyntaxError(0, "unknown relation '" + std::string(text) + "'");
}

std::string to_string(Relation rel, Notation notation) {
    const bool u = notation == Notation::Unicode;
    switch (rel) {
        case Relation::Less:
            return "<";
        case Relation::LessEqual:
            return u ? "≤" : "<=";
        case Relation::Equal:
            return u ? "=" : "==";
        case Relation::GreaterEqual:
            return u ? "≥" : ">=";
        case Relation::Greater:
            return ">";
    }
    return "?";
}

std::string to_string(const Expr& e, Notation) {
    std::string out;
    print(e, out);
    return out;
}

std::string to_string(const Comparison& c, Notation notation) {
    return to_string(c.lhs, notation) + " " + to_string(c.rel, notation) + " " +
           to_string(c.rhs, notation);
}

std::int64_t evaluate(const Expr& e, const Resolver& resolve) {
    switch (e.kind) {
        case Expr::Kind::Literal:
            return e.value;
        case Expr::Kind::Symbol:
            return resolve(e.name);
        case Expr::Kind::Neg:
            return -evaluate(e.operands[0], resolve);
        case Expr::Kind::Add:
            return evaluate(e.operands[0], resolve) + evaluate(e.operands[1], resolve);
        case Expr::Kind::Sub:
            return evaluate(e.operands[0], resolve) - evaluate(e.operands[1], resolve);
        case Expr::Kind::Mul:
            return evaluate(e.operands[0], resolve) * evaluate(e.operands[1], resolve);
    }
    return 0;
}

bool holds(Relation rel, std::int64_t lhs, std::int64_t rhs) noexcept {
    switch (rel) {
        case Relation::Less:
            return lhs < rhs;
        case Relation::LessEqual:
            return lhs <= rhs;
        case Relation::Equal:
            return lhs == rhs;
        case Relation::GreaterEqual:
            return lhs >= rhs;
        case Relation::Greater:
            return lhs > rhs;
    }
    return false;
}

bool evaluate(const Comparison& c, const Resolver& resolve) {
    return holds(c.rel, evaluate(c.lhs, resolve), evaluate(c.rhs, resolve));
}

void collect_symbols(const Expr& e, std::set<std::string>& out) {
    if (e.is_symbol()) out.insert(e.name);
    for (const auto& op : e.operands) collect_symbols(op, out);
}

void collect_symbols(const Comparison& c, std::set<std::string>& out) {
    collect_symbols(c.lhs, out);
    collect_symbols(c.rhs, out);
}

}  // namespace tamex
