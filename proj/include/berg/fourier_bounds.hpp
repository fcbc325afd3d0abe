#pragma once
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "berg/common.hpp"
#include "berg/quadrature.hpp"

// Angular Fourier profiles h(r) = int_0^{2pi} f(r e^{i t}) cos(kt) dt of disc
// functions vanishing to a prescribed order at 0, the second-order radial ODE
// those profiles satisfy, and sup checks of |h| against the r^2 / r^4
// envelopes. The resonant harmonics (k = 2 against r^2, k in {2,4} against
// r^4) carry an extra |log r| factor; r^2 log(r) cos(2t) attains it.

namespace berg {

class MetricModel;

// ode_residual: the finite-difference truncation floor exceeds what one
// Richardson pass can repair, so the residual would measure the step, not the
// ODE.
struct StepTooCoarse : Error {
    using Error::Error;
};

/* Disc function handed to the profile machinery. jet_order is the order of
   the jet known to vanish at the origin: 1 (value and gradient) selects the
   r^2 envelope, 3 selects r^4. k2 bounds |dd-bar f| when jet_order is 1 and
   |(dd-bar)^2 f| when it is 3. Factories below call validate(); hand-rolled
   instances used for property probes may skip it. */
struct TestFunction {
    std::function<double(cplx)> f;
    int jet_order = 1;
    double k1 = 0.0;      // sup |f| over the disc of the given radius
    double k2 = 0.0;      // derivative bound matching jet_order
    double radius = 1.0;  // domain disc radius
    double probe_r = 0.0; // jet-decay probe radius; 0 = 1e-3 * radius
    std::string name;

    // Checks |f(0)| <= 1e-10, the decay exponent on two probe circles
    // against jet_order, and the declared bounds on a polar sample grid
    // (finite differences for the derivative bound). Throws Error.
    void validate() const;
};

// Canonical profiles. All live on the unit disc.
TestFunction tf_abs_sq();       // |z|^2: radial, k=0 profile 2 pi r^2
TestFunction tf_re_z_sq();      // Re z^2: harmonic, k=2 profile pi r^2
TestFunction tf_r2_log_cos2();  // r^2 log(r) cos(2t): attains the k=2 log factor
TestFunction tf_r4_log_cos4();  // r^4 log(r) cos(4t): attains the k=4 log factor
TestFunction tf_cubic_k1();     // |z|^2 + x^3 eta(r): k=1 content, no log needed

// Model-induced profiles; the model must outlive the TestFunction.
// weight gap: log a - log a(0) + 2 pi g(0) |z|^2, the deviation of the weight
// from its osculating Gaussian. metric gap: g/g(0) - 1. Both vanish to first
// order at 0, so the r^2 envelope applies. Declared bounds are measured on
// the validation grid with a 10% margin.
TestFunction model_weight_gap(const MetricModel& model);
TestFunction model_metric_gap(const MetricModel& model);

// h(r) per entry of r_list, via the equispaced angular rule.
// pre: k >= 0, every r in (0, radius].
std::vector<double> fourier_profile(const TestFunction& tf, int k,
                                    const std::vector<double>& r_list,
                                    const QuadSpec& spec = {});

struct OdeRow {
    double r;
    double lhs;       // h'' + h'/r - k^2 h / r^2, centred FD + one Richardson pass
    double rhs;       // int Delta f cos(kt) dt, Delta f by five-point stencil
    double residual;  // lhs - rhs
    double err_est;   // Richardson corrections + roundoff amplification
};

// Residual of the profile ODE at each r. Step 1e-3 * r, central differences,
// one Richardson refinement. pre: r * (1 + 1.2e-3) <= radius so the stencil
// stays inside the domain. Throws StepTooCoarse when err_est > 1e-4 anywhere,
// one hundred times the residual scale the step choice is meant to certify.
std::vector<OdeRow> ode_residual(const TestFunction& tf, int k,
                                 const std::vector<double>& r_list,
                                 const QuadSpec& spec = {});

struct BoundRow {
    double r;
    double h;
    double denom;  // envelope: r^2 or r^4, times |log r| at the resonant k
    double ratio;  // |h| / denom
};

struct BoundReport {
    std::string tf_name;
    int k = 0;
    int jet_order = 1;
    double sup = 0.0;   // max ratio over the grid
    double at_r = 0.0;  // grid point attaining it
    std::vector<BoundRow> rows;
};

// Sup of |h| / envelope over a geometric grid from r_max down to
// r_max * r_floor. The grid point with log r == 0 is skipped when the
// envelope carries the log factor.
BoundReport check_bound(const TestFunction& tf, int k, double r_max,
                        const QuadSpec& spec = {}, int grid = 96,
                        double r_floor = 1e-4);

// Columns: r, h, bound_denominator, ratio.
void write_bound_csv(const BoundReport& report, std::ostream& os);

}  // namespace berg
