#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace bec {

// Input outside the domain where a formula or constructor is defined.
class domain_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class precondition_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Iterative solver failure; carries the energy trace collected so far.
class solver_error : public std::runtime_error {
public:
    solver_error(const std::string& what, std::vector<double> trace)
        : std::runtime_error(what), trace_(std::move(trace)) {}
    const std::vector<double>& trace() const noexcept { return trace_; }

private:
    std::vector<double> trace_;
};

class usage_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

} // namespace bec
