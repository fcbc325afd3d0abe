#include "berg/examples_suite.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "berg/bergman_engine.hpp"
#include "berg/peak_sections.hpp"
#include "berg/section_space.hpp"

namespace berg {

namespace {

constexpr double NEG_INF = -std::numeric_limits<double>::infinity();

// Panel seeds around the r^{2k+1} a^m peak near 1/sqrt(kappa m), plus the
// model's own branch radii, clipped to the chart disc.
std::vector<double> moment_breakpoints(const MetricModel& model, int m, double R) {
    double kappa = peak_curvature_scale(model);
    double r0 = std::sqrt(1.0 / (kappa * std::max(m, 1)));
    std::vector<double> bk;
    for (double b : {0.25 * r0, r0, 4.0 * r0})
        if (b < R) bk.push_back(b);
    for (double b : model.radial_breakpoints())
        if (b > 0.0 && b < R) bk.push_back(b);
    std::sort(bk.begin(), bk.end());
    return bk;
}

double moment_radius(const MetricModel& model) {
    return std::min(1.0, model.chart_radius());
}

// Area-weighted product grid on the disc of radius R: Gauss radii times
// equispaced angles, weight = w_r r (2 pi / n_th).
struct DiscGrid {
    std::vector<cplx> points;
    std::vector<double> weights;

    DiscGrid(int n_r, int n_th, double R = 1.0) {
        const auto& gl = gauss_legendre(n_r);
        points.reserve(static_cast<size_t>(n_r) * n_th);
        weights.reserve(points.capacity());
        for (int i = 0; i < n_r; ++i) {
            double r = 0.5 * R * (gl.first[i] + 1.0);
            double wr = 0.5 * R * gl.second[i] * r * (2.0 * PI / n_th);
            for (int j = 0; j < n_th; ++j) {
                points.push_back(std::polar(r, 2.0 * PI * j / n_th));
                weights.push_back(wr);
            }
        }
    }
};

double softmax_variance(const Eigen::VectorXd& neg_log_w, double* mean_out) {
    const int n = static_cast<int>(neg_log_w.size());
    double mx = NEG_INF;
    for (int j = 0; j < n; ++j) mx = std::max(mx, -neg_log_w[j]);
    double tot = 0.0, s1 = 0.0;
    std::vector<double> p(n);
    for (int j = 0; j < n; ++j) {
        p[j] = std::exp(-neg_log_w[j] - mx);
        tot += p[j];
        s1 += j * p[j];
    }
    double mean = s1 / tot, var = 0.0;
    for (int j = 0; j < n; ++j) var += (j - mean) * (j - mean) * p[j];
    if (mean_out) *mean_out = mean;
    return var / tot;
}

}  // namespace

LogScalar disc_moment_even(const MetricModel& model, int m, int k,
                           const QuadSpec& spec) {
    if (m < 1 || k < 0) throw Error("disc_moment_even: need m >= 1, k >= 0");
    spec.validate();
    double R = moment_radius(model);
    auto bk = moment_breakpoints(model, m, R);
    if (model.symmetry() == Symmetry::radial) {
        auto f = [&](double r) {
            if (!(r > 0.0)) return LogScalar::zero();
            MetricJets mj = model.metric(cplx(r, 0.0));
            double lm = (2.0 * k + 1.0) * std::log(r) +
                        m * model.log_weight(cplx(r, 0.0)) + std::log(4.0 * PI * mj.g);
            return LogScalar::from_log(lm);
        };
        return integrate_radial(f, R, spec, bk).value;
    }
    auto f = [&](cplx z) {
        double r = std::abs(z);
        if (!(r > 0.0)) return LogScalar::zero();
        MetricJets mj = model.metric(z);
        double lm = 2.0 * k * std::log(r) + m * model.log_weight(z) +
                    std::log(2.0 * mj.g);
        return LogScalar::from_log(lm);
    };
    return integrate_disc(f, R, spec, bk).value;
}

LogScalar disc_moment_odd(const MetricModel& model, int m, int k,
                          const QuadSpec& spec) {
    if (m < 1 || k < 0) throw Error("disc_moment_odd: need m >= 1, k >= 0");
    spec.validate();
    double R = moment_radius(model);
    auto bk = moment_breakpoints(model, m, R);
    auto f = [&](cplx z) {
        double r = std::abs(z);
        if (!(r > 0.0)) return LogScalar::zero();
        MetricJets mj = model.metric(z);
        double lm = (2.0 * k + 1.0) * std::log(r) + m * model.log_weight(z) +
                    std::log(2.0 * mj.g);
        return LogScalar::from_log(lm, std::polar(1.0, std::arg(z)));
    };
    LogScalar v;
    try {
        v = integrate_disc(f, R, spec, bk).value;
    } catch (const NonConvergence& nc) {
        // The integrand changes sign near r ~ 2/sqrt(m) and cancels about two
        // decades; accept the partial result when the leftover error is
        // invisible at the scale of the adjacent even moments, which set the
        // denominators every consumer divides by.
        double lref = 0.5 * (disc_moment_even(model, m, k, spec).log_mag +
                             disc_moment_even(model, m, k + 1, spec).log_mag);
        double err_log = nc.partial.is_zero()
                             ? NEG_INF
                             : nc.partial.log_mag + std::log(nc.rel_err + 1e-300);
        if (err_log <= lref + std::log(1e-12))
            v = nc.partial;
        else
            throw;
    }
    if (v.is_zero()) return v;
    // conjugation symmetry of the registry weights makes the moment real; the
    // symmetric angular rule keeps the imaginary part at roundoff, so project
    double re = v.phase.real();
    if (re == 0.0) return LogScalar::zero();
    return LogScalar::from_log(v.log_mag + std::log(std::abs(re)),
                               cplx(re > 0.0 ? 1.0 : -1.0, 0.0));
}

std::vector<MomentRow> overlap_moment_table(const MetricModel& model,
                                            const std::vector<int>& m_list, int k,
                                            const QuadSpec& spec) {
    if (k < 0 || k > 3) throw Error("overlap_moment_table: reference law covers k = 0..3");
    // (2k+3)!! = (2k+4)! / (2^{k+2} (k+2)!)
    double log_dfact = std::lgamma(2.0 * k + 5.0) - (k + 2.0) * std::log(2.0) -
                       std::lgamma(k + 3.0);
    double log_pref = std::log((4.0 * k + 1.0) / 800.0) + 0.5 * std::log(PI) +
                      log_dfact - (k + 3.0) * std::log(2.0);
    std::vector<MomentRow> rows;
    for (int m : m_list) {
        LogScalar v = disc_moment_odd(model, m, k, spec);
        double log_lead = log_pref - (k + 2.5) * std::log(static_cast<double>(m));
        MomentRow r;
        r.m = m;
        r.integral = v.real_value();
        r.leading = std::exp(log_lead);
        r.ratio = v.is_zero() ? 0.0
                              : v.phase.real() * std::exp(v.log_mag - log_lead);
        rows.push_back(r);
    }
    return rows;
}

std::vector<MomentRow> norm_moment_table(const MetricModel& model,
                                         const std::vector<int>& m_list, int k,
                                         const QuadSpec& spec) {
    if (k < 0) throw Error("norm_moment_table: k must be nonnegative");
    std::vector<MomentRow> rows;
    for (int m : m_list) {
        LogScalar v = disc_moment_even(model, m, k, spec);
        double log_lead = std::lgamma(k + 1.0) - (k + 1.0) * std::log(static_cast<double>(m));
        MomentRow r;
        r.m = m;
        r.integral = v.real_value();
        r.leading = std::exp(log_lead);
        r.ratio = std::exp(v.log_mag - log_lead);
        rows.push_back(r);
    }
    return rows;
}

double chain_gradient_constant(double c01, double c12) {
    return c01 / PI - c12 / (PI * std::sqrt(2.0));
}

ExtrapolatedConstant richardson_half_power(const std::vector<int>& m_list,
                                           const std::vector<double>& values) {
    const size_t n = m_list.size();
    if (n < 2 || values.size() != n)
        throw Error("richardson_half_power: need matching lists of length >= 2");
    double rho = static_cast<double>(m_list[1]) / m_list[0];
    if (!(rho > 1.0)) throw Error("richardson_half_power: grid must be increasing");
    for (size_t i = 2; i < n; ++i) {
        double r = static_cast<double>(m_list[i]) / m_list[i - 1];
        if (std::abs(r - rho) > 1e-9 * rho)
            throw Error("richardson_half_power: grid must be geometric");
    }
    std::vector<double> T = values;
    double prev = values[n - 1], last = values[n - 1];
    for (size_t lvl = 1; lvl < n; ++lvl) {
        double q = std::pow(rho, 0.5 * lvl);
        for (size_t i = n - 1; i >= lvl; --i) T[i] = (q * T[i] - T[i - 1]) / (q - 1.0);
        prev = last;
        last = T[n - 1];
    }
    ExtrapolatedConstant c;
    c.value = last;
    c.error_bar = std::abs(last - prev) + 1e-15 * (1.0 + std::abs(last));
    return c;
}

void verify_path_agreement(SharpReport& report) {
    report.max_path_gap = 0.0;
    report.path_budget = 0.0;
    for (const SharpRow& row : report.rows) {
        double gap = std::abs(row.grad_chain - row.grad_direct);
        double est_c = std::abs(row.grad_chain - report.c_grad_chain.value) +
                       report.c_grad_chain.error_bar;
        double est_d = std::abs(row.grad_direct - report.c_grad_direct.value) +
                       report.c_grad_direct.error_bar;
        double budget = est_c + est_d + 1e-9;
        if (gap >= report.max_path_gap) {
            report.max_path_gap = gap;
            report.path_budget = budget;
        }
        if (gap > budget)
            throw PathDisagreement("sharp_constants: gradient paths disagree at m = " +
                                       std::to_string(row.m),
                                   gap, budget);
    }
}

SharpReport sharp_constants(const MetricModel& model, const std::vector<int>& m_list,
                            const QuadSpec& spec) {
    if (m_list.size() < 2) throw Error("sharp_constants: need at least two degrees");
    for (size_t i = 0; i < m_list.size(); ++i) {
        if (m_list[i] < 8) throw Error("sharp_constants: degrees must be >= 8");
        if (i > 0 && m_list[i] <= m_list[i - 1])
            throw Error("sharp_constants: degrees must increase");
    }

    SharpReport rep;
    std::vector<double> v01, v12, vch, vdr;
    for (int m : m_list) {
        double lN0 = disc_moment_even(model, m, 0, spec).log_mag;
        double lN1 = disc_moment_even(model, m, 1, spec).log_mag;
        double lN2 = disc_moment_even(model, m, 2, spec).log_mag;
        LogScalar O0 = disc_moment_odd(model, m, 0, spec);
        LogScalar O1 = disc_moment_odd(model, m, 1, spec);
        LogScalar O2 = disc_moment_odd(model, m, 2, spec);

        auto signed_exp = [](const LogScalar& v, double shift) {
            return v.is_zero() ? 0.0 : v.phase.real() * std::exp(v.log_mag + shift);
        };
        double b01 = signed_exp(O0, -0.5 * (lN0 + lN1));
        double b12 = signed_exp(O1, -0.5 * (lN1 + lN2));

        SharpRow row;
        row.m = m;
        row.odd0 = O0.real_value();
        row.odd1 = O1.real_value();
        row.odd2 = O2.real_value();
        row.m_beta01 = m * b01;
        row.m_beta12 = m * b12;

        /* Basepoint jets of the first two orthonormal sections in terms of
           the moments: f_0(0) = N_0^{-1/2}, f_0'(0) = -b01 N_1^{-1/2},
           f_1'(0) = N_1^{-1/2}, f_1''(0) = -2 b12 N_2^{-1/2}; feeding them
           to the two-term gradient formula collapses to two products. */
        double t1 = -b12 / (PI * m) * std::exp(lN0 - 0.5 * (lN1 + lN2));
        double t2 = b01 / (PI * m) * std::exp(1.5 * (lN0 - lN1));
        row.grad_chain = std::sqrt(static_cast<double>(m)) * (t1 + t2);

        OrthonormalJets J = jets_at(model, m, cplx(0.0, 0.0), spec);
        row.grad_direct = std::sqrt(static_cast<double>(m)) * gradient_at(J).real();

        rep.rows.push_back(row);
        v01.push_back(row.m_beta01);
        v12.push_back(row.m_beta12);
        vch.push_back(row.grad_chain);
        vdr.push_back(row.grad_direct);
    }

    rep.c_beta01 = richardson_half_power(m_list, v01);
    rep.c_beta12 = richardson_half_power(m_list, v12);
    rep.c_grad_chain = richardson_half_power(m_list, vch);
    rep.c_grad_direct = richardson_half_power(m_list, vdr);
    rep.extrap_residual = std::max({rep.c_beta01.error_bar, rep.c_beta12.error_bar,
                                    rep.c_grad_chain.error_bar,
                                    rep.c_grad_direct.error_bar});
    verify_path_agreement(rep);
    return rep;
}

PinchGap pinch_gap(int k, int m, const QuadSpec& spec) {
    if (m < 1 || m % 2 == 0)
        throw Error("pinch_gap: the symmetric point needs an odd degree");
    PinchModel model(k);
    if (m > model.degree_cap()) throw Error("pinch_gap: degree above the model cap");

    GramMatrix G = gram(model, m, spec);  // radial path: log_scale = log G_jj
    PinchGap r;
    r.k = k;
    r.m = m;
    r.index_variance = softmax_variance(G.log_scale, &r.index_mean);
    r.bergman_value = r.index_variance / (2.0 * PI * m);
    r.metric_value = model.metric(cplx(1.0, 0.0)).g;
    r.lower_bound = 1.0 / (4.0 * PI * (m + 1.0) * (m + 1.0));
    for (int j = 0; j <= m; ++j)
        r.symmetry_defect = std::max(
            r.symmetry_defect, std::abs(G.log_scale[j] - G.log_scale[m - j]));
    return r;
}

namespace {

/* Cone-cap member: radial density rho = e^{2v} with
       v = eta v_in + (1 - eta) v_round,    v_round = -log(1 + r^2),
       v_in = (1-theta) L,   L = -log r for r >= rc = e^{-n},
                             L = n + (1 - (r/rc)^2)/2 below rc,
   so the density runs like r^{-2(1-theta)} between the cap and the plateau
   edge and is exactly round past r = 1.  The metric is g = c rho / (2 pi)
   with c fixed by unit volume, and the weight is recovered from the radial
   Poisson equation u'(r) = -(4 c / r) int_0^r rho t dt, which integrates in
   closed form past r = 1.  Below 1 the weight is evaluated from cached
   anchors with per-query Gauss refinement, so it is quadrature-exact. */
class CuspModel final : public MetricModel {
public:
    CuspModel(int n, double theta) : n_(n), theta_(theta), rc_(std::exp(-double(n))) {
        if (n < 1 || n > 8) throw Error("cusp_family: cap index must be in 1..8");
        if (!(theta > 0.0) || !(theta < 1.0))
            throw Error("cusp_family: cone angle must lie in (0, 1)");
        build_tables();
    }

    std::string name() const override { return "cusp_family_" + std::to_string(n_); }
    double chart_radius() const override {
        return std::numeric_limits<double>::infinity();
    }
    Symmetry symmetry() const override { return Symmetry::radial; }
    int degree_cap() const override { return 256; }

    double log_weight(cplx z) const override {
        double r = std::abs(z);
        if (r >= 1.0)
            return u1_ - 2.0 * std::log(r) +
                   2.0 * c_ * (std::log(r / std::sqrt(1.0 + r * r)) +
                               0.5 * std::log(2.0));
        if (!(r > 0.0)) return 0.0;
        if (r <= knots_[0])
            return gl_integrate([&](double t) { return -4.0 * c_ * cap_mass(t) / t; },
                                0.0, r, 24);
        size_t i = anchor_below(r);
        double base_mass = mass_[i], a = knots_[i];
        auto du = [&](double t) {
            double M = base_mass + gl_integrate([&](double s) { return rho(s) * s; },
                                                a, t, 24);
            return -4.0 * c_ * M / t;
        };
        return u_[i] + gl_integrate(du, a, r, 24);
    }

    MetricJets metric(cplx z) const override {
        double r = std::abs(z);
        double v, v1, v2;
        v_jets(r, v, v1, v2);
        double G = c_ * std::exp(2.0 * v) / (2.0 * PI);
        double Gp = G * 2.0 * v1;
        double Gpp = G * (4.0 * v1 * v1 + 2.0 * v2);
        MetricJets mj;
        mj.g = G;
        if (r < 1e-12) {
            mj.gz = 0.0;
            mj.gzz = 0.0;
            mj.gzzb = 0.5 * Gpp;
            return mj;
        }
        cplx zb = std::conj(z);
        mj.gz = Gp * zb / (2.0 * r);
        mj.gzz = (zb * zb) / (4.0 * r * r) * (Gpp - Gp / r);
        mj.gzzb = 0.25 * (Gpp + Gp / r);
        return mj;
    }

    std::vector<double> radial_breakpoints() const override {
        std::vector<double> bk{0.5 * rc_, rc_};
        for (double s : eta_.breakpoints()) bk.push_back(s);
        return bk;
    }

private:
    // cap branch is a Gaussian in r/rc, so its cumulative mass is closed-form
    double cap_mass(double r) const {
        double s = (1.0 - theta_);
        double amp = std::exp(s * (2.0 * n_ + 1.0));
        double x = r / rc_;
        return amp * rc_ * rc_ / (2.0 * s) * (1.0 - std::exp(-s * x * x));
    }

    void v_jets(double r, double& v, double& v1, double& v2) const {
        double s = 1.0 - theta_;
        double Li, L1, L2;
        if (r < rc_) {
            double x = r / rc_;
            Li = n_ + 0.5 * (1.0 - x * x);
            L1 = -r / (rc_ * rc_);
            L2 = -1.0 / (rc_ * rc_);
        } else {
            Li = -std::log(r);
            L1 = -1.0 / r;
            L2 = 1.0 / (r * r);
        }
        double vin = s * Li, vin1 = s * L1, vin2 = s * L2;
        double q = 1.0 + r * r;
        double vfs = -std::log(q);
        double vfs1 = -2.0 * r / q;
        double vfs2 = -2.0 * (1.0 - r * r) / (q * q);
        CutoffJets e = eta_.jets(r);
        v = e.v * vin + (1.0 - e.v) * vfs;
        v1 = e.d1 * (vin - vfs) + e.v * vin1 + (1.0 - e.v) * vfs1;
        v2 = e.d2 * (vin - vfs) + 2.0 * e.d1 * (vin1 - vfs1) + e.v * vin2 +
             (1.0 - e.v) * vfs2;
    }

    double rho(double r) const {
        double v, v1, v2;
        v_jets(r, v, v1, v2);
        return std::exp(2.0 * v);
    }

    size_t anchor_below(double r) const {
        auto it = std::upper_bound(knots_.begin(), knots_.end(), r);
        return static_cast<size_t>(it - knots_.begin()) - 1;
    }

    void build_tables() {
        // knots: geometric through the cap and cone zones, arithmetic across
        // the glue, always containing the branch seams
        std::vector<double> k{0.125 * rc_, 0.25 * rc_, 0.5 * rc_, rc_};
        for (double r = rc_ * std::sqrt(2.0); r < 0.5; r *= std::sqrt(2.0))
            k.push_back(r);
        for (int i = 0; i <= 32; ++i) k.push_back(0.5 + i / 64.0);
        std::sort(k.begin(), k.end());
        k.erase(std::unique(k.begin(), k.end(),
                            [](double a, double b) { return std::abs(a - b) < 1e-14; }),
                k.end());
        knots_ = k;

        // raw mass below each knot, then the unit-volume scale
        mass_.assign(knots_.size(), 0.0);
        mass_[0] = cap_mass(knots_[0]);
        for (size_t i = 1; i < knots_.size(); ++i)
            mass_[i] = mass_[i - 1] +
                       gl_integrate([&](double s) { return rho(s) * s; }, knots_[i - 1],
                                    knots_[i], 40);
        double m_tot = mass_.back() + 0.25;  // round tail past r = 1
        c_ = 1.0 / (2.0 * m_tot);

        // weight anchors u(knot), with u(0) = 0
        u_.assign(knots_.size(), 0.0);
        auto du_cap = [&](double t) { return -4.0 * c_ * cap_mass(t) / t; };
        u_[0] = gl_integrate(du_cap, 0.0, knots_[0], 40);
        for (size_t i = 1; i < knots_.size(); ++i) {
            double a = knots_[i - 1], base = mass_[i - 1];
            auto du = [&](double t) {
                double M = base + gl_integrate([&](double s) { return rho(s) * s; },
                                               a, t, 40);
                return -4.0 * c_ * M / t;
            };
            u_[i] = u_[i - 1] + gl_integrate(du, a, knots_[i], 40);
        }
        u1_ = u_.back();
    }

    int n_;
    double theta_, rc_, c_ = 0.0, u1_ = 0.0;
    CutoffProfile eta_;
    std::vector<double> knots_, mass_, u_;
};

}  // namespace

std::unique_ptr<MetricModel> cusp_family(int n, double theta) {
    return std::make_unique<CuspModel>(n, theta);
}

CuspReport cusp_demo(const std::vector<int>& n_list, int m, const QuadSpec& spec) {
    if (m < 2) throw Error("cusp_demo: degree too small");
    CuspReport rep;
    rep.m = m;
    rep.theta = 0.5;

    std::unique_ptr<MetricModel> fs = fubini_study();
    GramMatrix G_fs = gram(*fs, m, spec);

    std::vector<cplx> grid{cplx(1e-3, 0.0)};
    for (int i = 1; i <= 20; ++i) grid.push_back(cplx(0.05 * i, 0.0));
    for (double r : {1.25, 1.5, 2.0}) grid.push_back(cplx(r, 0.0));
    auto q_fs = [](double r) {
        double q = 1.0 + r * r;
        return 1.0 / (2.0 * PI * q * q);
    };

    for (int n : n_list) {
        auto model = cusp_family(n, rep.theta);
        GramMatrix G = gram(*model, m, spec);
        CuspMemberRow row;
        row.n = n;
        row.gram_log_min = std::numeric_limits<double>::infinity();
        row.gram_log_max = -row.gram_log_min;
        for (int j = 0; j <= m; ++j) {
            double d = G.log_scale[j] - G_fs.log_scale[j];
            row.gram_log_min = std::min(row.gram_log_min, d);
            row.gram_log_max = std::max(row.gram_log_max, d);
        }
        row.center_ratio = model->metric(cplx(0.0, 0.0)).g / q_fs(0.0);

        std::vector<BergmanJet> field = metric_field(*model, m, grid, spec);
        row.bergman_center_ratio = field.front().value / q_fs(std::abs(grid.front()));
        for (size_t i = 0; i < grid.size(); ++i) {
            double r = std::abs(grid[i]);
            double ref = q_fs(r);
            row.bergman_fs_sup = std::max(row.bergman_fs_sup, field[i].value / ref);
            double gap = std::abs(field[i].value - model->metric(grid[i]).g);
            row.gap_sup = std::max(row.gap_sup, gap / ref);
        }
        rep.rows.push_back(row);
    }
    return rep;
}

std::vector<OscL1Row> oscillation_l1(const std::vector<int>& k_list,
                                     const std::function<double(cplx)>& f_ref) {
    DiscGrid grid(128, 256);
    std::vector<OscL1Row> rows;
    for (int k : k_list) {
        auto model = oscillation_family(k);
        double s = std::pow(static_cast<double>(k), 4);
        double l1 = 0.0;
        for (size_t i = 0; i < grid.points.size(); ++i) {
            double prof = s * model->fs_log_perturbation(grid.points[i]);
            l1 += grid.weights[i] * std::abs(prof - f_ref(grid.points[i]));
        }
        rows.push_back({k, l1});
    }
    return rows;
}

OscL1Battery oscillation_l1_battery(const std::vector<int>& k_list) {
    if (k_list.empty()) throw Error("oscillation_l1_battery: empty family");
    DiscGrid grid(128, 256);
    const size_t np = grid.points.size(), nk = k_list.size();

    std::vector<std::vector<double>> prof(nk, std::vector<double>(np));
    for (size_t a = 0; a < nk; ++a) {
        auto model = oscillation_family(k_list[a]);
        double s = std::pow(static_cast<double>(k_list[a]), 4);
        for (size_t i = 0; i < np; ++i)
            prof[a][i] = s * model->fs_log_perturbation(grid.points[i]);
    }

    std::vector<double> mean(np, 0.0);
    for (size_t a = 0; a < nk; ++a)
        for (size_t i = 0; i < np; ++i) mean[i] += prof[a][i] / nk;

    auto l1_against = [&](size_t a, const std::vector<double>* ref, double scale) {
        double l1 = 0.0;
        for (size_t i = 0; i < np; ++i) {
            double r = ref ? scale * (*ref)[i] : 0.0;
            l1 += grid.weights[i] * std::abs(prof[a][i] - r);
        }
        return l1;
    };

    OscL1Battery b;
    std::vector<double> run(np, 0.0);
    for (size_t a = 0; a < nk; ++a) {
        b.vs_zero.push_back({k_list[a], l1_against(a, nullptr, 0.0)});
        b.vs_cross.push_back({k_list[a], l1_against(a, &prof[(a + 1) % nk], 1.0)});
        b.vs_half_mean.push_back({k_list[a], l1_against(a, &mean, 0.5)});
        b.vs_running_mean.push_back({k_list[a], l1_against(a, &run, 1.0)});
        for (size_t i = 0; i < np; ++i)
            run[i] = (run[i] * a + prof[a][i]) / (a + 1.0);
    }

    auto col_min = [](const std::vector<OscL1Row>& col) {
        double mn = std::numeric_limits<double>::infinity();
        for (const OscL1Row& r : col) mn = std::min(mn, r.l1);
        return mn;
    };
    b.min_zero = col_min(b.vs_zero);
    b.min_cross = col_min(b.vs_cross);
    b.min_half_mean = col_min(b.vs_half_mean);
    b.min_running_mean = col_min(b.vs_running_mean);
    return b;
}

std::vector<HessianGapRow> hessian_gap_l1(const std::vector<int>& m_list,
                                          const std::vector<int>& k_list,
                                          const QuadSpec& spec) {
    DiscGrid grid(24, 48);
    std::vector<HessianGapRow> rows;
    for (int m : m_list) {
        for (int k : k_list) {
            auto model = oscillation_family(k);
            std::vector<BergmanJet> field = metric_field(*model, m, grid.points, spec);
            double l1 = 0.0;
            for (size_t i = 0; i < grid.points.size(); ++i) {
                MetricJets mj = model->metric(grid.points[i]);
                l1 += grid.weights[i] * (std::abs(field[i].d2z - mj.gzz) +
                                         std::abs(field[i].d2zzb - mj.gzzb));
            }
            rows.push_back({m, k, l1});
        }
    }
    return rows;
}

std::vector<CurvatureResidualRow> curvature_residuals(const std::vector<int>& k_list) {
    DiscGrid grid(32, 192, 0.5);
    std::unique_ptr<MetricModel> fs = fubini_study();
    std::vector<CurvatureResidualRow> rows;
    for (int k : k_list) {
        auto model = oscillation_family(k);
        double s = std::pow(static_cast<double>(k), 4);
        CurvatureResidualRow row;
        row.k = k;
        for (const cplx& z : grid.points) {
            double dR = curvature_at(*model, z) - curvature_at(*fs, z);
            double phi = s * model->fs_log_perturbation(z);
            row.sup_ref = std::max(row.sup_ref, std::abs(dR + 64.0 / PI * phi));
            row.sup_fit = std::max(row.sup_fit, std::abs(dR - 2.0 / PI * phi));
        }
        rows.push_back(row);
    }
    return rows;
}

void write_moment_csv(const std::vector<MomentRow>& rows, std::ostream& os) {
    os << "m,integral,leading,ratio\n";
    char line[160];
    for (const MomentRow& r : rows) {
        std::snprintf(line, sizeof line, "%d,%.12g,%.12g,%.12g\n", r.m, r.integral,
                      r.leading, r.ratio);
        os << line;
    }
}

void write_sharp_csv(const SharpReport& report, std::ostream& os) {
    os << "m,odd0,odd1,odd2,m_beta01,m_beta12,grad_chain,grad_direct\n";
    char line[256];
    for (const SharpRow& r : report.rows) {
        std::snprintf(line, sizeof line, "%d,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n",
                      r.m, r.odd0, r.odd1, r.odd2, r.m_beta01, r.m_beta12, r.grad_chain,
                      r.grad_direct);
        os << line;
    }
}

void write_pinch_csv(const std::vector<PinchGap>& rows, std::ostream& os) {
    os << "k,m,bergman_value,metric_value,lower_bound,index_mean,index_variance,"
          "symmetry_defect\n";
    char line[256];
    for (const PinchGap& r : rows) {
        std::snprintf(line, sizeof line, "%d,%d,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n",
                      r.k, r.m, r.bergman_value, r.metric_value, r.lower_bound,
                      r.index_mean, r.index_variance, r.symmetry_defect);
        os << line;
    }
}

void write_cusp_csv(const CuspReport& report, std::ostream& os) {
    os << "n,gram_log_min,gram_log_max,center_ratio,bergman_center_ratio,"
          "bergman_fs_sup,gap_sup\n";
    char line[256];
    for (const CuspMemberRow& r : report.rows) {
        std::snprintf(line, sizeof line, "%d,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n", r.n,
                      r.gram_log_min, r.gram_log_max, r.center_ratio,
                      r.bergman_center_ratio, r.bergman_fs_sup, r.gap_sup);
        os << line;
    }
}

void write_osc_l1_csv(const OscL1Battery& battery, const std::vector<int>& k_list,
                      std::ostream& os) {
    os << "k,vs_zero,vs_cross,vs_half_mean,vs_running_mean\n";
    char line[192];
    for (size_t i = 0; i < k_list.size(); ++i) {
        std::snprintf(line, sizeof line, "%d,%.12g,%.12g,%.12g,%.12g\n", k_list[i],
                      battery.vs_zero[i].l1, battery.vs_cross[i].l1,
                      battery.vs_half_mean[i].l1, battery.vs_running_mean[i].l1);
        os << line;
    }
}

void write_hessian_gap_csv(const std::vector<HessianGapRow>& rows, std::ostream& os) {
    os << "m,k,l1\n";
    char line[96];
    for (const HessianGapRow& r : rows) {
        std::snprintf(line, sizeof line, "%d,%d,%.12g\n", r.m, r.k, r.l1);
        os << line;
    }
}

void write_curvature_residual_csv(const std::vector<CurvatureResidualRow>& rows,
                                  std::ostream& os) {
    os << "k,sup_ref,sup_fit\n";
    char line[96];
    for (const CurvatureResidualRow& r : rows) {
        std::snprintf(line, sizeof line, "%d,%.12g,%.12g\n", r.k, r.sup_ref, r.sup_fit);
        os << line;
    }
}

}  // namespace berg
