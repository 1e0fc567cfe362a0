#pragma once

#include <stdexcept>
#include <string>

namespace tamex {

// Non-fatal finding returned next to a result, e.g. EmptySliceWarning.
struct Warning {
    std::string code;
    std::string message;

    bool operator==(const Warning&) const = default;
};

// Base for every error raised by the toolchain. Warnings are never thrown;
// they are returned alongside results.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SyntaxError : public Error {
public:
    SyntaxError(int line, const std::string& message)
        : Error("line " + std::to_string(line) + ": " + message), line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

class UndeclaredSymbol : public Error {
public:
    UndeclaredSymbol(std::string symbol, std::string site)
        : Error("undeclared symbol '" + symbol + "' in " + site),
          symbol_(std::move(symbol)), site_(std::move(site)) {}
    const std::string& symbol() const noexcept { return symbol_; }
    const std::string& site() const noexcept { return site_; }

private:
    std::string symbol_;
    std::string site_;
};

class DuplicateId : public Error {
public:
    explicit DuplicateId(std::string id) : Error("duplicate id '" + id + "'"), id_(std::move(id)) {}
    const std::string& id() const noexcept { return id_; }

private:
    std::string id_;
};

class MissingInitialLocation : public Error {
public:
    MissingInitialLocation() : Error("initial location is missing or undeclared") {}
};

class StageMismatch : public Error {
public:
    using Error::Error;
};

class DuplicateSelector : public Error {
public:
    using Error::Error;
};

class ProvenanceMismatch : public Error {
public:
    using Error::Error;
};

class TimestampRegression : public Error {
public:
    using Error::Error;
};

class InvalidEvent : public Error {
public:
    using Error::Error;
};

class NotObserved : public Error {
public:
    using Error::Error;
};

class HiddenForExplainee : public Error {
public:
    using Error::Error;
};

class NovelSituationFrozen : public Error {
public:
    NovelSituationFrozen() : Error("belief is frozen after a novel situation") {}
};

class UnknownNode : public Error {
public:
    using Error::Error;
};

class NothingMoreToReveal : public Error {
public:
    using Error::Error;
};

}  // namespace tamex
