#pragma once

#include <iosfwd>
#include <utility>
#include <vector>

#include "berg/section_space.hpp"

namespace berg {

/* Value and derivatives of the density metric g_m at one chart point.
   value is real positive and d2zzb real by construction. */
struct BergmanJet {
    int m = 0;
    cplx point;
    double value = 0.0;
    cplx gradient;
    cplx d2z;
    double d2zzb = 0.0;
};

struct RateRow {
    int m = 0;
    double sup_err = 0.0;
    double grad_err = 0.0;
    double c1alpha_mod = 0.0;
    double w2q_norm = 0.0;
};

/* Convergence sweep against the model metric.  Slopes come from an
   unweighted least-squares fit of log(err) against log(m); when every error
   sits at the quadrature floor the fit is meaningless and slopes_valid is
   false (slopes then hold NaN). */
struct RateReport {
    std::string model;
    double alpha = 0.5;
    double q = 2.0;
    std::vector<RateRow> rows;
    double sup_slope = 0.0;
    double grad_slope = 0.0;
    double sup_fit_rms = 0.0;
    double grad_fit_rms = 0.0;
    bool slopes_valid = false;
};

/* g_m and its derivatives at the jet basepoint, in the triangular gauge.
   The mixed products of the f_0 jets cancel identically there, so these
   depend only on the gauge-free content of the jets. */
double metric_at(const OrthonormalJets& J);
cplx gradient_at(const OrthonormalJets& J);
// (d2/dz2, d2/dz dzbar)
std::pair<cplx, double> hessian_at(const OrthonormalJets& J);

/* Annulus grid keeping clear of both the basepoint (radial symmetry kills
   gradients there) and the cutoff ring of the perturbed models. */
std::vector<cplx> annular_grid(int n_r = 5, int n_th = 8, double r_min = 0.05,
                               double r_max = 0.5, double angle_offset = 0.1);

/* One BergmanJet per grid point.  Rotation-invariant models take a direct
   path through the diagonal Gram (log-sum evaluation of the section sums)
   and are cross-checked against the recentring path at three grid points;
   everything else evaluates the full section fields. */
std::vector<BergmanJet> metric_field(const MetricModel& model, int m,
                                     const std::vector<cplx>& grid,
                                     const QuadSpec& spec = {});

RateReport rate_report(const MetricModel& model, const std::vector<int>& m_list,
                       const std::vector<cplx>& grid, double alpha = 0.5,
                       double q = 2.0, const QuadSpec& spec = {});

// sup over pairs of |grad(x) - grad(y)| / (|x-y| |log|x-y||)
double grad_modulus(const std::vector<cplx>& points, const std::vector<cplx>& grads,
                    const std::vector<std::pair<int, int>>& pairs);

// columns m,sup_err,grad_err,c1alpha_mod,w2q_norm
void write_rate_csv(const RateReport& report, std::ostream& os);

}  // namespace berg
