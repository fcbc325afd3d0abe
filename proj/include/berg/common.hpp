#pragma once
#include <complex>
#include <stdexcept>
#include <string>

namespace berg {

using cplx = std::complex<double>;

inline constexpr double PI = 3.14159265358979323846264338327950288;

// Base class for all structured failures raised by the library.
// Subclasses carry enough state for the caller to decide on a fallback.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace berg
