#pragma once
#include <functional>
#include <utility>
#include <vector>

#include "berg/common.hpp"

// Log-domain adaptive integration. Radial integrands like r^{2p+1} a(r)^m with
// m up to a few thousand underflow native doubles; every value here travels as
// (log magnitude, unit phase) and only ratios ever leave the log domain.

namespace berg {

// A real or complex value stored as phase * exp(log_mag).
// log_mag = -inf encodes exact zero (phase arbitrary, kept at 1).
struct LogScalar {
    double log_mag;
    cplx phase;  // unit modulus whenever log_mag is finite

    LogScalar() : log_mag(-std::numeric_limits<double>::infinity()), phase(1.0, 0.0) {}
    LogScalar(double lm, cplx ph) : log_mag(lm), phase(ph) {}

    static LogScalar zero() { return LogScalar(); }
    static LogScalar from(double x);
    static LogScalar from(cplx x);
    static LogScalar from_log(double lm, cplx ph = cplx(1.0, 0.0));

    bool is_zero() const { return !(log_mag > -std::numeric_limits<double>::infinity()); }
    // Leaves the log domain; overflows/underflows exactly when exp(log_mag) does.
    cplx value() const;
    double real_value() const { return value().real(); }

    LogScalar operator*(const LogScalar& o) const;
    LogScalar operator/(const LogScalar& o) const;
    LogScalar operator+(const LogScalar& o) const;  // stable log-sum-exp
    LogScalar operator-() const { return LogScalar(log_mag, -phase); }
    LogScalar scaled(double c) const;  // multiply by a plain real
};

// Compensated sum of many log-domain terms. Terms are sorted by magnitude and
// accumulated with Kahan correction under a common exponent shift, so any
// permutation of the input gives the same result to ~1e-13 relative.
LogScalar log_sum(std::vector<LogScalar> terms);

struct QuadSpec {
    double rel_tol = 1e-10;
    double abs_tol_log = -745.0;  // results below exp() of this count as zero
    int max_subdivisions = 60;    // panel bisections before giving up
    int angular_nodes = 256;      // power of two

    // Node count for a weight with the given angular bandwidth.
    static int angular_nodes_for(int bandwidth);
    void validate() const;  // throws Error on a malformed spec
};

// Raised when the adaptive subdivision budget is exhausted above tolerance.
// Carries the partial result so the caller can accept a widened tolerance.
struct NonConvergence : Error {
    LogScalar partial;
    double rel_err;
    NonConvergence(const std::string& what, LogScalar p, double e)
        : Error(what), partial(p), rel_err(e) {}
};

// Raised when the top decade of requested angular modes still carries more
// than rel_tol of the total mode energy (grid too coarse for the integrand).
struct AliasingSuspected : Error {
    using Error::Error;
};

struct IntegralResult {
    LogScalar value;
    double rel_err;
    int panels;
};

using LogIntegrand = std::function<LogScalar(double)>;

// Adaptive Gauss-Kronrod 7-15 on [0, R] in the log domain. Initial panels are
// placed geometrically around the integrand's peak (located by coarse search)
// unless explicit breakpoints are supplied. Integrable endpoint behaviour no
// worse than r^{-1+eps} is fine: nodes are open (endpoints never evaluated).
IntegralResult integrate_radial(const LogIntegrand& f, double R, const QuadSpec& spec,
                                const std::vector<double>& breakpoints = {});

// Modes c_k = int_0^{2pi} f(theta) e^{-ik theta} dtheta for k = 0..n_modes,
// by the equispaced rule (spectrally accurate for analytic f).
std::vector<LogScalar> angular_modes(const std::function<LogScalar(double)>& f,
                                     int n_modes, const QuadSpec& spec);

// Tensor product of the radial rule with the equispaced angular rule.
IntegralResult integrate_disc(const std::function<LogScalar(cplx)>& f, double R,
                              const QuadSpec& spec,
                              const std::vector<double>& breakpoints = {});

// Gauss-Legendre nodes/weights on [-1, 1], cached per order.
const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(int n);

// Fixed-order Gauss-Legendre for smooth plain-double integrands.
double gl_integrate(const std::function<double(double)>& f, double a, double b, int n);

}  // namespace berg
