#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "berg/metric_models.hpp"
#include "berg/quadrature.hpp"

// Concentration integrals of the monomials z^p against a^m. Everything here
// is local to the chart: the mass of z^p inside a shrinking disc, the
// curvature correction it carries, and the normalized overlap between two
// different exponents. No global sections are constructed.

namespace berg {

/* Exponent p and tensor power m, plus the radius of the disc carrying the
   mass. The default radius log(m)/sqrt(m) keeps a tail smaller than any
   power of 1/m while shrinking in chart units. */
struct PeakSpec {
    int p = 0;
    int m = 8;
    double cutoff = 0.0;  // 0 resolves to log(m)/sqrt(m)

    double radius() const;
    void validate(const MetricModel& model) const;
};

// kappa = 2 pi g(0), the |z|^2 coefficient of -log a at the chart center.
// The mass of z^p concentrates on the scale 1/sqrt(kappa m); residuals below
// rescale by mu^2 = pi/kappa so every model reports in the same frame.
double peak_curvature_scale(const MetricModel& model);

// lambda_p^{-2} = int_{|z| <= cutoff} |z|^{2p} a^m dV.
LogScalar lambda_inv_sq(const MetricModel& model, const PeakSpec& peak,
                        const QuadSpec& quad = {});

struct PeakMassRow {
    int m;
    double lambda_log;  // log of lambda_p^{-2}
    double residual;    // m * |mu^{-2p} m^{1+p} lambda^{-2} / p! - pi^{-p}|
};

/* Residual sweep for one exponent. "bounded" means the residuals stay in a
   band: spread below spread_max and log-log trend slope at most
   trend_slope_max. A sweep that has already converged to zero (every row
   under degenerate_floor) counts as bounded with spread 1. */
struct PeakMassTable {
    std::string model;
    int p;
    std::vector<PeakMassRow> rows;
    double spread;       // max residual / min residual, floored rows clamped
    double trend_slope;  // least-squares slope of log residual vs log m
    bool degenerate;
    bool bounded;

    static constexpr double degenerate_floor = 1e-6;
    static constexpr double spread_max = 10.0;
    static constexpr double trend_slope_max = 0.25;
};

PeakMassTable peak_mass_residuals(const MetricModel& model, int p,
                                  const std::vector<int>& m_list,
                                  const QuadSpec& quad = {});

/* Normalized overlap lambda_p lambda_q int_{|z| <= cutoff} z^p zbar^q a^m dV
   with the default cutoff of both exponents' specs. Invariant under chart
   rescaling z -> c z, so no frame factor appears. Swapping (p, q) returns
   the exact complex conjugate: the integral is evaluated once in the
   (min, max) order and conjugated as needed. */
LogScalar peak_overlap(const MetricModel& model, int m, int p, int p_prime,
                       const QuadSpec& quad = {});

// Columns: m, p, lambda_inv_sq_log, residual, overlap_next_re/im. The
// overlap columns hold peak_overlap(p, p+1) when supplied (one per row),
// otherwise stay empty.
void write_peak_csv(const PeakMassTable& table, const std::vector<cplx>& overlap_next,
                    std::ostream& os);

}  // namespace berg
