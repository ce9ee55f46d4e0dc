#pragma once

#include <stdexcept>
#include <string>

namespace heegner {

// All library failures carry a module tag and a short machine-readable code.
// what() is formatted as "E:<module>:<code>:<detail>" so front ends can emit
// it verbatim.
class Error : public std::runtime_error {
public:
    Error(std::string module, std::string code, const std::string& detail)
        : std::runtime_error("E:" + module + ":" + code + ":" + detail),
          module_(std::move(module)),
          code_(std::move(code)) {}

    const std::string& module() const noexcept { return module_; }
    const std::string& code() const noexcept { return code_; }

private:
    std::string module_;
    std::string code_;
};

// Input violates a documented precondition.
class PreconditionError : public Error {
public:
    using Error::Error;
};

// Malformed external data (files, CLI arguments).
class ParseError : public Error {
public:
    using Error::Error;
};

// A numeric routine could not reach the requested accuracy.  Carries the
// best radius it did achieve.
class ToleranceError : public Error {
public:
    ToleranceError(std::string module, const std::string& detail, double achieved)
        : Error(std::move(module), "tolerance", detail), achieved_(achieved) {}

    double achieved_radius() const noexcept { return achieved_; }

private:
    double achieved_;
};

}  // namespace heegner
