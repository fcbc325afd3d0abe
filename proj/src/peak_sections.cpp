#include "berg/peak_sections.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace berg {

namespace {

double lsq_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/* Panel seeds: the mass of r^{2q+1} e^{-kappa m r^2} sits at
   r0 = sqrt((q + 1/2) / (kappa m)); a decade around it plus the model's own
   branch radii keeps the first Gauss-Kronrod pass honest. */
std::vector<double> peak_breakpoints(const MetricModel& model, double q_eff, int m,
                                     double kappa, double cutoff) {
    std::vector<double> bk;
    double r0 = std::sqrt((q_eff + 0.5) / (kappa * m));
    for (double r : {0.25 * r0, r0, 4.0 * r0})
        if (r > 0.0 && r < cutoff) bk.push_back(r);
    for (double r : model.radial_breakpoints())
        if (r > 0.0 && r < cutoff) bk.push_back(r);
    std::sort(bk.begin(), bk.end());
    return bk;
}

// int_{|z| <= cutoff} z^lo zbar^hi a^m dV for 0 <= lo <= hi.
LogScalar monomial_mass(const MetricModel& model, int lo, int hi, int m, double cutoff,
                        double kappa, const QuadSpec& quad) {
    auto bk = peak_breakpoints(model, 0.5 * (lo + hi), m, kappa, cutoff);
    if (model.symmetry() == Symmetry::radial && lo == hi) {
        auto f = [&](double r) {
            if (!(r > 0.0)) return LogScalar::zero();
            MetricJets mj = model.metric(cplx(r, 0.0));
            double lm = (2.0 * lo + 1.0) * std::log(r) + m * model.log_weight(cplx(r, 0.0)) +
                        std::log(4.0 * PI * mj.g);
            return LogScalar::from_log(lm);
        };
        return integrate_radial(f, cutoff, quad, bk).value;
    }
    int k = hi - lo;
    auto f = [&](cplx z) {
        double r = std::abs(z);
        if (!(r > 0.0)) return LogScalar::zero();
        MetricJets mj = model.metric(z);
        double lm = m * model.log_weight(z) + std::log(2.0 * mj.g);
        if (lo + hi > 0) lm += (lo + hi) * std::log(r);
        cplx ph = k == 0 ? cplx(1.0, 0.0) : std::polar(1.0, -k * std::arg(z));
        return LogScalar::from_log(lm, ph);
    };
    return integrate_disc(f, cutoff, quad, bk).value;
}

}  // namespace

double PeakSpec::radius() const {
    if (cutoff > 0.0) return cutoff;
    return std::log(static_cast<double>(m)) / std::sqrt(static_cast<double>(m));
}

void PeakSpec::validate(const MetricModel& model) const {
    if (p < 0) throw Error("PeakSpec: exponent must be nonnegative");
    if (m < 8) throw Error("PeakSpec: tensor power below 8 leaves no room for the cutoff");
    double r = radius();
    if (!(r > 0.0)) throw Error("PeakSpec: cutoff must be positive");
    if (r > model.chart_radius())
        throw Error("PeakSpec: cutoff exceeds the chart of " + model.name());
}

double peak_curvature_scale(const MetricModel& model) {
    double g0 = model.metric(cplx(0.0, 0.0)).g;
    if (!(g0 > 0.0)) throw Error(model.name() + ": metric not positive at the chart center");
    return 2.0 * PI * g0;
}

LogScalar lambda_inv_sq(const MetricModel& model, const PeakSpec& peak,
                        const QuadSpec& quad) {
    peak.validate(model);
    quad.validate();
    double kappa = peak_curvature_scale(model);
    return monomial_mass(model, peak.p, peak.p, peak.m, peak.radius(), kappa, quad);
}

PeakMassTable peak_mass_residuals(const MetricModel& model, int p,
                                  const std::vector<int>& m_list, const QuadSpec& quad) {
    if (m_list.empty()) throw Error("peak_mass_residuals: empty sweep");
    PeakMassTable t;
    t.model = model.name();
    t.p = p;
    double kappa = peak_curvature_scale(model);
    double log_mu2 = std::log(PI / kappa);
    for (int m : m_list) {
        PeakSpec pk{p, m, 0.0};
        LogScalar lam = lambda_inv_sq(model, pk, quad);
        double lt = -p * log_mu2 + (1.0 + p) * std::log(static_cast<double>(m)) +
                    lam.log_mag - std::lgamma(p + 1.0);
        double resid = m * std::abs(std::exp(lt) - std::pow(PI, -p));
        t.rows.push_back({m, lam.log_mag, resid});
    }

    double mx = 0.0;
    for (const PeakMassRow& r : t.rows) mx = std::max(mx, r.residual);
    t.degenerate = mx < PeakMassTable::degenerate_floor;
    if (t.degenerate) {
        t.spread = 1.0;
        t.trend_slope = 0.0;
        t.bounded = true;
        return t;
    }
    double mn = mx;
    std::vector<double> lx, ly;
    for (const PeakMassRow& r : t.rows) {
        double clamped = std::max(r.residual, PeakMassTable::degenerate_floor);
        mn = std::min(mn, clamped);
        lx.push_back(std::log(static_cast<double>(r.m)));
        ly.push_back(std::log(clamped));
    }
    t.spread = mx / mn;
    t.trend_slope = lsq_slope(lx, ly);
    t.bounded = t.spread < PeakMassTable::spread_max &&
                t.trend_slope <= PeakMassTable::trend_slope_max;
    return t;
}

LogScalar peak_overlap(const MetricModel& model, int m, int p, int p_prime,
                       const QuadSpec& quad) {
    if (p == p_prime) throw Error("peak_overlap: exponents must differ");
    int lo = std::min(p, p_prime), hi = std::max(p, p_prime);
    PeakSpec pk_lo{lo, m, 0.0}, pk_hi{hi, m, 0.0};
    pk_lo.validate(model);
    pk_hi.validate(model);
    quad.validate();
    double kappa = peak_curvature_scale(model);

    LogScalar lam_lo = lambda_inv_sq(model, pk_lo, quad);
    LogScalar lam_hi = lambda_inv_sq(model, pk_hi, quad);
    LogScalar cross;
    try {
        cross = monomial_mass(model, lo, hi, m, pk_lo.radius(), kappa, quad);
    } catch (const NonConvergence& nc) {
        /* A high-harmonic overlap can sit many digits below the positive
           mass it is extracted from; once the remaining error estimate is
           under 1e-12 of the normalization scale the subdivision is fighting
           double-precision cancellation noise, not quadrature error. */
        double scale = 0.5 * (lam_lo.log_mag + lam_hi.log_mag);
        double err_log = nc.partial.log_mag + std::log(nc.rel_err);
        if (!(err_log <= scale + std::log(1e-12))) throw;
        cross = nc.partial;
    }
    LogScalar out = LogScalar::from_log(
        cross.log_mag - 0.5 * lam_lo.log_mag - 0.5 * lam_hi.log_mag, cross.phase);
    if (p > p_prime) out.phase = std::conj(out.phase);
    return out;
}

void write_peak_csv(const PeakMassTable& table, const std::vector<cplx>& overlap_next,
                    std::ostream& os) {
    if (!overlap_next.empty() && overlap_next.size() != table.rows.size())
        throw Error("write_peak_csv: overlap column length mismatch");
    os << "m,p,lambda_inv_sq_log,residual,overlap_next_re,overlap_next_im\n";
    char buf[160];
    for (size_t i = 0; i < table.rows.size(); ++i) {
        const PeakMassRow& r = table.rows[i];
        std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g", r.m, table.p, r.lambda_log,
                      r.residual);
        os << buf;
        if (!overlap_next.empty()) {
            std::snprintf(buf, sizeof buf, ",%.17g,%.17g", overlap_next[i].real(),
                          overlap_next[i].imag());
            os << buf;
        } else {
            os << ",,";
        }
        os << "\n";
    }
}

}  // namespace berg
