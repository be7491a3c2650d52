#pragma once

#include <stdexcept>
#include <string>

namespace hypcert {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

/// The base point is not a double characteristic: value or some first derivative is nonzero.
struct NotSingular : Error {
    NotSingular(std::string variable, std::string value)
        : Error(variable.empty() ? "symbol does not vanish at base point (value " + value + ")"
                                 : "first derivative d/d" + variable + " = " + value + " is nonzero at base point"),
          variable(std::move(variable)), value(std::move(value))
    {}
    std::string variable; // empty when the value itself is nonzero
    std::string value;
};

struct NoConvergence : Error {
    using Error::Error;
};
struct HessianDegenerate : Error {
    using Error::Error;
};
struct CrossTermsPresent : Error {
    using Error::Error;
};
struct NonPositiveInput : Error {
    using Error::Error;
};
struct InvariantViolation : Error {
    InvariantViolation(std::string field, const std::string& what)
        : Error("invariant violated (" + field + "): " + what), field(std::move(field))
    {}
    std::string field;
};
struct BbisViolated : Error {
    using Error::Error;
};
struct SlackTooLarge : Error {
    using Error::Error;
};
struct WeightsNotNormalized : Error {
    using Error::Error;
};
struct AllPointsDegenerate : Error {
    using Error::Error;
};
struct NegativeInput : Error {
    using Error::Error;
};

struct ParseError : Error {
    explicit ParseError(const std::string& what, int line = 0, int column = 0)
        : Error(line > 0 ? "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what : what),
          line(line), column(column)
    {}
    int line;
    int column;
};
struct SchemaError : Error {
    SchemaError(std::string path, const std::string& what)
        : Error(path + ": " + what), path(std::move(path))
    {}
    std::string path;
};
struct DimensionError : Error {
    using Error::Error;
};

} // namespace hypcert
