#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "berg/metric_models.hpp"
#include "berg/quadrature.hpp"

// Example drivers built on the Gram/jet machinery: moment asymptotics and the
// two-path gradient constant of the perturbed round model, the symmetric-point
// gap of the pinch family, a degenerating cone-cap family, and the
// oscillating-weight demos (L1 separation, curvature compensation, Hessian
// convergence in L1).

namespace berg {

/* Chart-disc moments of the frame density a^m against dV = 2g dA:
     even k-moment  int_{|z|<=1} |z|^{2k} a^m dV
     odd  k-moment  int_{|z|<=1} |z|^{2k} z a^m dV
   The odd moment is real for weights symmetric under conjugation (every
   registry model); its residual imaginary part is dropped after a sanity
   check.  Truncation at the unit circle is below 1e-10 relative for the
   round-based weights once m >= 50. */
LogScalar disc_moment_even(const MetricModel& model, int m, int k,
                           const QuadSpec& spec = {});
LogScalar disc_moment_odd(const MetricModel& model, int m, int k,
                          const QuadSpec& spec = {});

struct MomentRow {
    int m = 0;
    double integral = 0.0;  // the computed moment
    double leading = 0.0;   // reference leading term (see table builders)
    double ratio = 0.0;     // integral / leading
};

/* Odd moments against the reference law
     (4k+1)/800 * sqrt(pi) (2k+3)!! / (2^{k+3} m^{k+5/2}),
   k in {0,1,2,3}.  On the unperturbed round weight the moment itself
   vanishes (angular symmetry); the ratio column is then noise over a tiny
   denominator and only the integral column is meaningful. */
std::vector<MomentRow> overlap_moment_table(const MetricModel& model,
                                            const std::vector<int>& m_list, int k,
                                            const QuadSpec& spec = {});

/* Even moments against k!/m^{k+1}.  On the round weight the exact value is
   the Beta number k!(m-k)!/(m+1)!. */
std::vector<MomentRow> norm_moment_table(const MetricModel& model,
                                         const std::vector<int>& m_list, int k,
                                         const QuadSpec& spec = {});

struct PathDisagreement : Error {
    double gap;     // |chain - direct| at the offending row
    double budget;  // combined error estimate that was exceeded
    PathDisagreement(const std::string& what, double gap_, double budget_)
        : Error(what), gap(gap_), budget(budget_) {}
};

struct SharpRow {
    int m = 0;
    double odd0 = 0.0, odd1 = 0.0, odd2 = 0.0;  // odd moments, k = 0,1,2
    double m_beta01 = 0.0;     // m * odd_0 / sqrt(even_0 even_1)
    double m_beta12 = 0.0;     // m * odd_1 / sqrt(even_1 even_2)
    double grad_chain = 0.0;   // sqrt(m) * d(g_m)/dz(0) via the moment chain
    double grad_direct = 0.0;  // sqrt(m) * d(g_m)/dz(0) via Gram -> jets
};

struct ExtrapolatedConstant {
    double value = 0.0;
    double error_bar = 0.0;  // |last diagonal - previous diagonal| of the table
};

/* Limits of the scaled columns by a Richardson table in powers of m^{-1/2}
   (the expansion parameter of the chain quantities; the table eliminates
   m^{-1/2}, m^{-1}, ... in turn, so it converges even when the half-power
   coefficient happens to be small).  Requires a geometric m_list. */
struct SharpReport {
    std::vector<SharpRow> rows;  // sorted by m
    ExtrapolatedConstant c_beta01, c_beta12, c_grad_chain, c_grad_direct;
    double extrap_residual = 0.0;  // largest error bar among the four
    double max_path_gap = 0.0;     // max_m |grad_chain - grad_direct|
    double path_budget = 0.0;      // combined error estimate at that m
};

/* Both gradient paths per m plus the extrapolated constants.  The chain path
   assembles the basepoint jets from the five moments exactly as the two-term
   gradient formula consumes them; the direct path goes through the full Gram
   and the orthonormal jets.  Throws PathDisagreement when the two disagree
   beyond their combined finite-m error estimates at some row. */
SharpReport sharp_constants(const MetricModel& model, const std::vector<int>& m_list,
                            const QuadSpec& spec = {});

/* Fills max_path_gap / path_budget and throws PathDisagreement when some row
   has |grad_chain - grad_direct| above the combined finite-m error estimates
   (distance of each path from its own extrapolated limit plus the
   extrapolation bars).  Called by sharp_constants; exposed for report tests. */
void verify_path_agreement(SharpReport& report);

/* Limiting chain arithmetic: given c01 = lim m*beta01 and c12 = lim m*beta12,
   the scaled gradient limit is c01/pi - c12/(pi sqrt 2). */
double chain_gradient_constant(double c01, double c12);

/* Richardson table in powers of ratio^{-1/2} for values on a geometric grid;
   exposed for the report tests. */
ExtrapolatedConstant richardson_half_power(const std::vector<int>& m_list,
                                           const std::vector<double>& values);

/* Symmetric-point diagnostics of the pinch family at degree m (odd): the
   diagonal Gram G_jj turns the density metric at z = 1 into the index
   variance of the softmax weights b_j = 1/G_jj,
       g_m(1) = variance / (2 pi m),
   which is bounded below by 1/(4 pi (m+1)^2) because the variance of a
   half-integer-mean integer distribution is at least 1/4. */
struct PinchGap {
    int k = 0, m = 0;
    double bergman_value = 0.0;    // g_m at the symmetric point
    double metric_value = 0.0;     // model metric there
    double lower_bound = 0.0;      // 1/(4 pi (m+1)^2)
    double index_mean = 0.0;       // softmax mean, m/2 by symmetry
    double index_variance = 0.0;
    double symmetry_defect = 0.0;  // max_j |log G_jj - log G_{m-j,m-j}|
};

PinchGap pinch_gap(int k, int m, const QuadSpec& spec = {});

/* Degenerating cone-cap family on the sphere chart: the density carries a
   power singularity r^{-2(1-theta)} at the origin, capped to a smooth bump
   below radius e^{-n} and glued to the round density across [1/2, 1] by the
   plateau cutoff.  Unit volume.  As n grows the center density blows up
   like e^{2n(1-theta)} while the diagonal Gram and the density metric of the
   section basis stay uniformly bounded against the round metric. */
std::unique_ptr<MetricModel> cusp_family(int n, double theta = 0.5);

struct CuspMemberRow {
    int n = 0;
    // range over j of log(G_jj / G_jj round): uniform in n although both
    // diagonals individually span an m log 2 range
    double gram_log_min = 0.0, gram_log_max = 0.0;
    double center_ratio = 0.0;          // model density / round density at 0
    double bergman_center_ratio = 0.0;  // g_m / round density at 0
    double bergman_fs_sup = 0.0;        // sup over grid of g_m / round density
    double gap_sup = 0.0;               // sup over grid of |g_m - g| / round density
};

struct CuspReport {
    int m = 0;
    double theta = 0.0;
    std::vector<CuspMemberRow> rows;
};

CuspReport cusp_demo(const std::vector<int>& n_list, int m,
                     const QuadSpec& spec = {});

/* L1 distance over the unit disc between the scaled oscillation profile
   k^4 phi_k (bounded, frequency k) and a fixed reference function, on a
   128 x 256 Gauss-by-angle product grid. */
struct OscL1Row {
    int k = 0;
    double l1 = 0.0;
};

std::vector<OscL1Row> oscillation_l1(const std::vector<int>& k_list,
                                     const std::function<double(cplx)>& f_ref);

/* The four reference choices used by the reports: zero, the successor
   member's profile (cyclic), half the k_list mean profile, and the running
   mean of the earlier profiles (zero for the first k). */
struct OscL1Battery {
    std::vector<OscL1Row> vs_zero, vs_cross, vs_half_mean, vs_running_mean;
    double min_zero = 0.0, min_cross = 0.0, min_half_mean = 0.0,
           min_running_mean = 0.0;
};

OscL1Battery oscillation_l1_battery(const std::vector<int>& k_list);

/* Area-weighted L1 over the unit disc of the second-derivative gap between
   the degree-m density metric of the oscillation member k and the member's
   own metric: |d2z difference| + |d2zzb difference| on a 24 x 48 grid. */
struct HessianGapRow {
    int m = 0, k = 0;
    double l1 = 0.0;
};

std::vector<HessianGapRow> hessian_gap_l1(const std::vector<int>& m_list,
                                          const std::vector<int>& k_list,
                                          const QuadSpec& spec = {});

/* Sup of |R_k - R_round + c * k^4 phi_k| for the two compensator constants:
   the stated reference value c = +64/pi under test, and the calibrated value
   c = -2/pi.  R is the displayed-formula curvature of the member and of the
   round model.  The sup runs over a 32 x 192 grid on the plateau disc
   r <= 1/2, where the member's log-weight relative to the round one is
   exactly the oscillation; the taper annulus only adds cutoff-derivative
   transients that say nothing about either compensator. */
struct CurvatureResidualRow {
    int k = 0;
    double sup_ref = 0.0;  // compensator +64/pi
    double sup_fit = 0.0;  // compensator -2/pi
};

std::vector<CurvatureResidualRow> curvature_residuals(
    const std::vector<int>& k_list);

// csv writers; column orders are frozen in docs/csv_schema.md
void write_moment_csv(const std::vector<MomentRow>& rows, std::ostream& os);
void write_sharp_csv(const SharpReport& report, std::ostream& os);
void write_pinch_csv(const std::vector<PinchGap>& rows, std::ostream& os);
void write_cusp_csv(const CuspReport& report, std::ostream& os);
void write_osc_l1_csv(const OscL1Battery& battery, const std::vector<int>& k_list,
                      std::ostream& os);
void write_hessian_gap_csv(const std::vector<HessianGapRow>& rows, std::ostream& os);
void write_curvature_residual_csv(const std::vector<CurvatureResidualRow>& rows,
                                  std::ostream& os);

}  // namespace berg
