#pragma once

#include <stdexcept>
#include <string>

namespace cnplab {

// Precondition or input validation failure (CLI exit code 2).
class validation_error : public std::invalid_argument {
public:
    explicit validation_error(const std::string& what) : std::invalid_argument(what) {}
};

// Request exceeds a configured degree cap (CLI exit code 3).
class degree_cap_error : public std::runtime_error {
public:
    explicit degree_cap_error(const std::string& what) : std::runtime_error(what) {}
};

// Operator fixture violates the commutativity tolerance (CLI exit code 4).
class noncommuting_error : public std::runtime_error {
public:
    explicit noncommuting_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace cnplab
