#include "berg/bergman_engine.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>

namespace berg {

namespace {

struct LDerivs {
    double l11 = 0.0;
    cplx l21, l31;
    double l22 = 0.0;
};

/* Mixed log-derivatives of K = sum_j |f_j|^2 from the derivative products
   S(a,b) = d^a_z d^b_zbar K.  All four are ratios, so a common rescaling of
   S drops out. */
LDerivs log_k_derivs(const Eigen::Matrix<cplx, 4, 4>& S) {
    const double F = std::real(S(0, 0));
    const cplx s10 = S(1, 0), s20 = S(2, 0), s30 = S(3, 0);
    const cplx s21 = S(2, 1), s31 = S(3, 1);
    const cplx s01 = std::conj(s10);
    const double s11 = std::real(S(1, 1)), s22 = std::real(S(2, 2));
    const double a10 = std::norm(s10);

    LDerivs L;
    L.l11 = s11 / F - a10 / (F * F);
    L.l21 = s21 / F - (s20 * s01 + 2.0 * s11 * s10) / (F * F) +
            2.0 * s10 * s10 * s01 / (F * F * F);
    L.l31 = s31 / F - (s30 * s01 + 3.0 * s21 * s10 + 3.0 * s20 * s11) / (F * F) +
            6.0 * (s10 * s10 * s11 + s20 * s10 * s01) / (F * F * F) -
            6.0 * s10 * s10 * s10 * s01 / (F * F * F * F);
    L.l22 = s22 / F -
            (std::norm(s20) + 4.0 * std::real(s21 * s01) + 2.0 * s11 * s11) / (F * F) +
            (4.0 * std::real(s20 * s01 * s01) + 8.0 * s11 * a10) / (F * F * F) -
            6.0 * a10 * a10 / (F * F * F * F);
    return L;
}

Eigen::Matrix<cplx, 4, 4> jet_products(const OrthonormalJets& J) {
    const int top = std::min(J.m, 3);
    Eigen::Matrix<cplx, 4, 4> S = Eigen::Matrix<cplx, 4, 4>::Zero();
    for (int a = 0; a <= 3; ++a)
        for (int b = 0; b <= 3; ++b)
            for (int j = 0; j <= top; ++j)
                S(a, b) += J.jets(j, a) * std::conj(J.jets(j, b));
    return S;
}

BergmanJet from_lderivs(int m, cplx z, const LDerivs& L) {
    BergmanJet B;
    B.m = m;
    B.point = z;
    const double c = 1.0 / (2.0 * PI * m);
    B.value = c * L.l11;
    B.gradient = c * L.l21;
    B.d2z = c * L.l31;
    B.d2zzb = c * L.l22;
    return B;
}

/* Full-field S(a,b) at z from the orthonormal transform: the scaled monomial
   derivative vectors share one exponent sigma, so the S ratios in
   log_k_derivs see consistently scaled values whatever the magnitudes. */
Eigen::Matrix<cplx, 4, 4> field_products(const Transform& T, cplx z) {
    const int n = T.m + 1;
    const double r = std::abs(z), th = std::arg(z);
    const double lr = std::log(r);
    Eigen::MatrixXd lex(n, 4);
    double sigma = -1e300;
    for (int a = 0; a < 4; ++a) {
        for (int i = 0; i < n; ++i) {
            if (i < a) {
                lex(i, a) = -1e300;
                continue;
            }
            double lc = std::lgamma(i + 1.0) - std::lgamma(i - a + 1.0);
            lex(i, a) = lc + (i - a) * lr - 0.5 * T.log_scale(i);
            sigma = std::max(sigma, lex(i, a));
        }
    }
    std::array<Eigen::VectorXcd, 4> v;
    for (int a = 0; a < 4; ++a) {
        Eigen::VectorXcd vec(n);
        for (int i = 0; i < n; ++i)
            vec(i) = i < a ? cplx(0.0)
                           : std::polar(std::exp(lex(i, a) - sigma), (i - a) * th);
        v[a] = T.coeff * vec;
    }
    Eigen::Matrix<cplx, 4, 4> S;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) S(a, b) = v[b].dot(v[a]);
    return S;
}

/* Radial direct path: the diagonal transform gives K(s) = sum_j a_j s^j with
   s = |z|^2, and the z-derivatives of log K reduce to the first four
   s-log-derivatives.  Coefficient sums are positive-term log-sums. */
struct RadialKernel {
    std::vector<double> la;  // log a_j

    LDerivs at(cplx z) const {
        const int n = (int)la.size();
        const double s = std::norm(z), ls = std::log(s);
        double lk[5];
        for (int p = 0; p <= 4; ++p) {
            std::vector<LogScalar> terms;
            terms.reserve(n - p);
            for (int j = p; j < n; ++j) {
                double lt = la[j] + std::lgamma(j + 1.0) - std::lgamma(j - p + 1.0) +
                            (j - p) * ls;
                terms.push_back(LogScalar::from_log(lt));
            }
            lk[p] = terms.empty() ? -1e300 : log_sum(terms).log_mag;
        }
        const double t1 = std::exp(lk[1] - lk[0]), t2 = std::exp(lk[2] - lk[0]);
        const double t3 = std::exp(lk[3] - lk[0]), t4 = std::exp(lk[4] - lk[0]);
        const double ls1 = t1;
        const double ls2 = t2 - t1 * t1;
        const double ls3 = t3 - 3.0 * t1 * t2 + 2.0 * t1 * t1 * t1;
        const double ls4 = t4 - 4.0 * t1 * t3 - 3.0 * t2 * t2 +
                           12.0 * t1 * t1 * t2 - 6.0 * t1 * t1 * t1 * t1;
        const cplx zb = std::conj(z);
        LDerivs L;
        L.l11 = ls1 + s * ls2;
        L.l21 = zb * (2.0 * ls2 + s * ls3);
        L.l31 = zb * zb * (3.0 * ls3 + s * ls4);
        L.l22 = 2.0 * ls2 + 4.0 * s * ls3 + s * s * ls4;
        return L;
    }
};

double fit_slope(const std::vector<double>& x, const std::vector<double>& y,
                 double* rms) {
    const int n = (int)x.size();
    double mx = 0, my = 0;
    for (int i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double num = 0, den = 0;
    for (int i = 0; i < n; ++i) {
        num += (x[i] - mx) * (y[i] - my);
        den += (x[i] - mx) * (x[i] - mx);
    }
    double slope = num / den;
    double icept = my - slope * mx, ss = 0;
    for (int i = 0; i < n; ++i) {
        double r = y[i] - (icept + slope * x[i]);
        ss += r * r;
    }
    if (rms) *rms = std::sqrt(ss / n);
    return slope;
}

}  // namespace

double metric_at(const OrthonormalJets& J) {
    return from_lderivs(J.m, 0.0, log_k_derivs(jet_products(J))).value;
}

cplx gradient_at(const OrthonormalJets& J) {
    return from_lderivs(J.m, 0.0, log_k_derivs(jet_products(J))).gradient;
}

std::pair<cplx, double> hessian_at(const OrthonormalJets& J) {
    BergmanJet B = from_lderivs(J.m, 0.0, log_k_derivs(jet_products(J)));
    return {B.d2z, B.d2zzb};
}

std::vector<cplx> annular_grid(int n_r, int n_th, double r_min, double r_max,
                               double angle_offset) {
    std::vector<cplx> grid;
    grid.reserve((size_t)n_r * n_th);
    for (int i = 0; i < n_r; ++i) {
        double r = n_r == 1 ? r_min : r_min + (r_max - r_min) * i / (n_r - 1.0);
        for (int t = 0; t < n_th; ++t)
            grid.push_back(std::polar(r, angle_offset + 2.0 * PI * t / n_th));
    }
    return grid;
}

std::vector<BergmanJet> metric_field(const MetricModel& model, int m,
                                     const std::vector<cplx>& grid,
                                     const QuadSpec& spec) {
    Transform T = orthonormalize(gram(model, m, spec));
    std::vector<BergmanJet> out;
    out.reserve(grid.size());

    if (model.symmetry() == Symmetry::radial) {
        RadialKernel K;
        K.la.resize(m + 1);
        for (int j = 0; j <= m; ++j)
            K.la[j] = 2.0 * std::log(std::real(T.coeff(j, j))) - T.log_scale(j);
        for (cplx z : grid) out.push_back(from_lderivs(m, z, K.at(z)));

        // recentring must reproduce the direct values: a cheap end-to-end
        // guard on the whole assembly chain (dense re-expansion, so only at
        // moderate m)
        if (!grid.empty() && m <= 256) {
            size_t picks[3] = {0, grid.size() / 2, grid.size() - 1};
            for (size_t p : picks) {
                double direct = out[p].value;
                double recent = metric_at(jets_at(model, m, grid[p], spec));
                if (std::abs(direct - recent) > 1e-8 * std::max(1.0, direct))
                    throw Error("metric_field: direct and recentring paths split at m=" +
                                std::to_string(m));
            }
        }
        return out;
    }

    for (cplx z : grid)
        out.push_back(from_lderivs(m, z, log_k_derivs(field_products(T, z))));
    return out;
}

RateReport rate_report(const MetricModel& model, const std::vector<int>& m_list,
                       const std::vector<cplx>& grid, double alpha, double q,
                       const QuadSpec& spec) {
    if (m_list.size() < 4) throw Error("rate_report: need at least 4 tensor powers");
    for (size_t i = 1; i < m_list.size(); ++i)
        if (m_list[i] <= m_list[i - 1])
            throw Error("rate_report: tensor powers must ascend");
    if (!(alpha > 0.0 && alpha < 1.0) || !(q > 1.0))
        throw Error("rate_report: need alpha in (0,1) and q > 1");

    RateReport rep;
    rep.model = model.name();
    rep.alpha = alpha;
    rep.q = q;

    const size_t N = grid.size();
    std::vector<MetricJets> truth(N);
    for (size_t i = 0; i < N; ++i) truth[i] = model.metric(grid[i]);

    for (int m : m_list) {
        auto field = metric_field(model, m, grid, spec);
        RateRow row;
        row.m = m;
        std::vector<cplx> gerr(N);
        double wq = 0.0;
        for (size_t i = 0; i < N; ++i) {
            row.sup_err = std::max(row.sup_err, std::abs(field[i].value - truth[i].g));
            gerr[i] = field[i].gradient - truth[i].gz;
            row.grad_err = std::max(row.grad_err, std::abs(gerr[i]));
            double h = std::hypot(std::abs(field[i].d2z), field[i].d2zzb);
            wq += std::pow(h, q);
        }
        row.w2q_norm = std::pow(wq / N, 1.0 / q);
        for (size_t i = 0; i < N; ++i)
            for (size_t k = i + 1; k < N; ++k) {
                double d = std::abs(grid[i] - grid[k]);
                if (d == 0.0) continue;
                row.c1alpha_mod = std::max(
                    row.c1alpha_mod, std::abs(gerr[i] - gerr[k]) / std::pow(d, alpha));
            }
        rep.rows.push_back(row);
    }

    double sup_max = 0.0, grad_max = 0.0;
    for (const auto& r : rep.rows) {
        sup_max = std::max(sup_max, r.sup_err);
        grad_max = std::max(grad_max, r.grad_err);
    }
    // at the quadrature floor the log-log fit measures noise, not a rate
    rep.slopes_valid = sup_max > 1e-9 && grad_max > 1e-9;
    if (rep.slopes_valid) {
        std::vector<double> lm, ls, lg;
        for (const auto& r : rep.rows) {
            lm.push_back(std::log((double)r.m));
            ls.push_back(std::log(r.sup_err));
            lg.push_back(std::log(r.grad_err));
        }
        rep.sup_slope = fit_slope(lm, ls, &rep.sup_fit_rms);
        rep.grad_slope = fit_slope(lm, lg, &rep.grad_fit_rms);
    } else {
        rep.sup_slope = rep.grad_slope = std::nan("");
    }
    return rep;
}

double grad_modulus(const std::vector<cplx>& points, const std::vector<cplx>& grads,
                    const std::vector<std::pair<int, int>>& pairs) {
    double sup = 0.0;
    for (auto [i, k] : pairs) {
        double d = std::abs(points[i] - points[k]);
        if (!(d > 0.0 && d < std::exp(-1.0)))
            throw Error("grad_modulus: pair separation must lie in (0, 1/e)");
        sup = std::max(sup,
                       std::abs(grads[i] - grads[k]) / (d * std::abs(std::log(d))));
    }
    return sup;
}

void write_rate_csv(const RateReport& report, std::ostream& os) {
    os << "m,sup_err,grad_err,c1alpha_mod,w2q_norm\n";
    char line[192];
    for (const auto& r : report.rows) {
        std::snprintf(line, sizeof line, "%d,%.12g,%.12g,%.12g,%.12g\n", r.m,
                      r.sup_err, r.grad_err, r.c1alpha_mod, r.w2q_norm);
        os << line;
    }
}

}  // namespace berg
