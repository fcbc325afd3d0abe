#include "berg/section_space.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <ostream>
#include <vector>

namespace berg {

namespace {

/* Diagonal Gram of a rotation-invariant weight.  Finite charts integrate in
   r directly; the dense chart of the sphere uses u = r^2/(1+r^2), which
   maps it to (0,1) and turns the round case into an exact Beta integrand. */
GramMatrix radial_gram(const MetricModel& model, int m, const QuadSpec& spec) {
    const int n = m + 1;
    const double R = model.chart_radius();
    std::vector<LogScalar> I(n);
    if (std::isfinite(R)) {
        auto bp = model.radial_breakpoints();
        for (int j = 0; j < n; ++j) {
            auto f = [&](double r) {
                return LogScalar::from_log(2.0 * j * std::log(r) +
                                           m * model.log_weight(r) +
                                           std::log(4.0 * PI * model.metric(r).g * r));
            };
            I[j] = integrate_radial(f, R, spec, bp).value;
        }
    } else {
        for (int j = 0; j < n; ++j) {
            auto f = [&](double u) {
                double r = std::sqrt(u / (1.0 - u));
                // 4 pi g r dr = (2 pi g / (1-u)^2) du
                double lg = j * (std::log(u) - std::log1p(-u)) +
                            m * model.log_weight(r) +
                            std::log(2.0 * PI * model.metric(r).g) - 2.0 * std::log1p(-u);
                return LogScalar::from_log(lg);
            };
            I[j] = integrate_radial(f, 1.0, spec).value;
        }
    }
    GramMatrix G;
    G.m = m;
    G.band = 0;
    G.unit = Eigen::MatrixXcd::Identity(n, n);
    G.log_scale.resize(n);
    for (int j = 0; j < n; ++j) {
        LogScalar t = I[j];
        // glued double chart: z^j transitions to z^{m-j} on the far chart
        if (model.double_chart()) t = t + I[m - j];
        G.log_scale(j) = t.log_mag;
    }
    return G;
}

/* Gram of a perturbed round weight, one radial sweep per angular mode.
   With u = r^2/(1+r^2) the entry for offset d = k - j >= 0 is

     G_{j,j+d} = int_0^1 (u/(1-u))^{j+d/2} (1-u)^m A_d(u) du,
     A_d(u)    = (1/2pi) int_0^{2pi} e^{m phi} 2pi g (1+r^2)^2 e^{-i d theta} dtheta,

   where phi is the model's log-perturbation against the round weight.  The
   fixed Gauss grid in u resolves the Beta-type bulk for every (j, d) pair;
   rows are scaled by the round diagonal, which the perturbation only moves
   by O(m phi)-exponential factors of order one. */
GramMatrix fs_angular_gram(const MetricModel& model, int m, const QuadSpec& spec,
                           int band) {
    const int n = m + 1;
    const int D = std::min(band, m);
    const int probe = std::min(m - D, 4);
    const int nth = std::max(spec.angular_nodes,
                             QuadSpec::angular_nodes_for(std::min(D + probe, m)));
    const int nu = std::max(1000, (int)std::ceil(0.55 * m) + 500);

    Eigen::VectorXd lgB(n);
    for (int j = 0; j < n; ++j)
        lgB(j) = std::lgamma(j + 1.0) + std::lgamma(m - j + 1.0) - std::lgamma(m + 2.0);

    std::vector<cplx> ph(nth);
    for (int t = 0; t < nth; ++t) ph[t] = std::polar(1.0, -2.0 * PI * t / nth);

    Eigen::MatrixXcd G = Eigen::MatrixXcd::Zero(n, n);
    const auto& [gx, gw] = gauss_legendre(nu);
    double tail = 0.0;

    std::vector<double> ker(nth);
    std::vector<cplx> A(D + probe + 1);
    for (int q = 0; q < nu; ++q) {
        const double u = 0.5 * (gx[q] + 1.0), wq = 0.5 * gw[q];
        const double r = std::sqrt(u / (1.0 - u)), q2 = 1.0 + r * r;
        for (int t = 0; t < nth; ++t) {
            cplx z = std::polar(r, 2.0 * PI * t / nth);
            ker[t] = std::exp(m * model.fs_log_perturbation(z)) * 2.0 * PI *
                     model.metric(z).g * q2 * q2;
        }
        for (int d = 0; d <= D + probe; ++d) {
            cplx acc = 0.0;
            int idx = 0;
            for (int t = 0; t < nth; ++t) {
                acc += ker[t] * ph[idx];
                idx += d;
                if (idx >= nth) idx -= nth;
            }
            A[d] = acc / double(nth);
        }
        for (int d = D + 1; d <= D + probe; ++d)
            tail = std::max(tail, std::abs(A[d]) / std::max(std::abs(A[0]), 1e-300));

        const double lu = std::log(u), l1u = std::log1p(-u);
        for (int d = 0; d <= D; ++d) {
            for (int j = 0; j + d < n; ++j) {
                double arg = m * l1u + (j + 0.5 * d) * (lu - l1u) -
                             0.5 * (lgB(j) + lgB(j + d));
                // entries are O(1) in this scaling; skip sub-roundoff nodes
                if (arg < -46.0) continue;
                cplx v = wq * std::exp(arg) * A[d];
                G(j, j + d) += v;
                if (d > 0) G(j + d, j) += std::conj(v);
            }
        }
    }

    GramMatrix out;
    out.m = m;
    out.band = D;
    out.unit = std::move(G);
    out.log_scale = std::move(lgB);
    out.tail_estimate = tail;
    return out;
}

}  // namespace

GramMatrix gram(const MetricModel& model, int m, const QuadSpec& spec, GramPath path) {
    if (m < 1) throw Error("gram: need tensor power m >= 1");
    if (m > model.degree_cap())
        throw Error("gram: m = " + std::to_string(m) + " exceeds degree cap of " +
                    model.name());
    spec.validate();

    if (path == GramPath::radial ||
        (path == GramPath::automatic && model.symmetry() == Symmetry::radial)) {
        if (model.symmetry() != Symmetry::radial)
            throw Error("gram: radial assembly requires a rotation-invariant model");
        return radial_gram(model, m, spec);
    }

    if (!model.fs_based())
        throw Error("gram: angular assembly requires a round-based weight");

    if (path == GramPath::generic ||
        (path == GramPath::automatic && model.symmetry() == Symmetry::generic))
        return fs_angular_gram(model, m, spec, m);

    GramMatrix G = fs_angular_gram(model, m, spec, model.angular_bandwidth());
    if (G.tail_estimate > spec.rel_tol) {
        if (path == GramPath::banded)
            throw BandwidthExceeded(
                "gram: discarded angular modes carry relative mass " +
                    std::to_string(G.tail_estimate) + " for " + model.name(),
                G.tail_estimate);
        return fs_angular_gram(model, m, spec, m);
    }
    return G;
}

Transform orthonormalize(const GramMatrix& G) {
    const int n = G.m + 1;
    // factor in reversed index order so the triangular factor puts each
    // section in the span of its own and higher monomials
    Eigen::MatrixXcd Grev(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) Grev(a, b) = G.unit(G.m - a, G.m - b);

    Eigen::LLT<Eigen::MatrixXcd> llt(Grev);
    if (llt.info() != Eigen::Success) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Grev,
                                                           Eigen::EigenvaluesOnly);
        double pivot = es.eigenvalues().minCoeff();
        throw NotPositiveDefinite(
            "orthonormalize: Gram not positive definite, smallest pivot " +
                std::to_string(pivot),
            pivot);
    }
    Eigen::MatrixXcd Crev =
        llt.matrixL().solve(Eigen::MatrixXcd::Identity(n, n));

    Transform T;
    T.m = G.m;
    T.log_scale = G.log_scale;
    T.coeff.resize(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            T.coeff(j, i) = i >= j ? Crev(G.m - j, G.m - i) : cplx(0.0);
    return T;
}

GramMatrix recenter(const GramMatrix& G, cplx w) {
    if (w == cplx(0.0)) return G;
    const int n = G.m + 1;
    if (G.m > 256)
        throw Error("recenter: dense re-expansion is meant for m <= 256");

    // Mhat(a,i) = binom(a,i) (-w)^{a-i} exp((s_i - s_a)/2) carries the
    // scaled monomials to the scaled shifted powers (z - w)^a
    Eigen::MatrixXcd Mh = Eigen::MatrixXcd::Zero(n, n);
    const double lw = std::log(std::abs(w)), aw = std::arg(-w);
    for (int a = 0; a < n; ++a) {
        Mh(a, a) = 1.0;
        for (int i = 0; i < a; ++i) {
            double lc = std::lgamma(a + 1.0) - std::lgamma(i + 1.0) -
                        std::lgamma(a - i + 1.0);
            double lmag = lc + (a - i) * lw + 0.5 * (G.log_scale(i) - G.log_scale(a));
            Mh(a, i) = std::polar(std::exp(lmag), aw * (a - i));
        }
    }
    Eigen::MatrixXcd D = Mh * G.unit * Mh.adjoint();

    GramMatrix out;
    out.m = G.m;
    out.band = G.m;
    out.tail_estimate = G.tail_estimate;
    out.log_scale.resize(n);
    Eigen::VectorXcd corr(n);
    for (int a = 0; a < n; ++a) {
        double da = std::real(D(a, a));
        if (!(da > 0.0))
            throw NotPositiveDefinite("recenter: lost positivity on the diagonal", da);
        out.log_scale(a) = G.log_scale(a) + std::log(da);
        corr(a) = 1.0 / std::sqrt(da);
    }
    out.unit = corr.asDiagonal() * D * corr.asDiagonal();
    return out;
}

OrthonormalJets jets_of(const Transform& T) {
    OrthonormalJets J;
    J.m = T.m;
    const int n = T.m + 1;
    J.jets = Eigen::MatrixXcd::Zero(n, 4);
    double fact = 1.0;
    for (int a = 0; a < std::min(4, n); ++a) {
        if (a > 0) fact *= a;
        double sc = fact * std::exp(-0.5 * T.log_scale(a));
        for (int j = 0; j <= a; ++j) J.jets(j, a) = T.coeff(j, a) * sc;
    }
    return J;
}

/* Off-center jets: expand the 0-gauge orthonormal basis at w (falling
   factorials of the scaled monomials, combined per entry in log domain) and
   rotate it triangular with a thin QR.  The unitary factor is an allowed
   gauge change, so R holds the jets of a valid triangular basis at w.  This
   avoids re-factorizing a shifted Gram, which loses positivity to roundoff
   long before m reaches the sweep range. */
OrthonormalJets jets_at(const MetricModel& model, int m, cplx basepoint,
                        const QuadSpec& spec) {
    Transform T = orthonormalize(gram(model, m, spec));
    if (basepoint == cplx(0.0)) return jets_of(T);

    const int n = m + 1;
    const double lw = std::log(std::abs(basepoint)), aw = std::arg(basepoint);
    Eigen::MatrixXcd V = Eigen::MatrixXcd::Zero(n, 4);
    for (int a = 0; a < 4; ++a)
        for (int i = a; i < n; ++i) {
            double lc = std::lgamma(i + 1.0) - std::lgamma(i - a + 1.0);
            V(i, a) = std::polar(std::exp(lc + (i - a) * lw - 0.5 * T.log_scale(i)),
                                 (i - a) * aw);
        }
    Eigen::MatrixXcd A = T.coeff * V;

    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(A);
    Eigen::MatrixXcd R = qr.matrixQR()
                             .topRows(std::min(4, n))
                             .triangularView<Eigen::Upper>();
    OrthonormalJets J;
    J.m = m;
    J.jets = Eigen::MatrixXcd::Zero(n, 4);
    for (int j = 0; j < std::min(4, n); ++j) {
        cplx d = R(j, j);
        cplx fix = std::abs(d) > 0.0 ? std::conj(d) / std::abs(d) : cplx(1.0);
        for (int a = j; a < 4; ++a) J.jets(j, a) = fix * R(j, a);
    }
    return J;
}

void write_gram_csv(const GramMatrix& G, std::ostream& os) {
    os << "j,k,log_mag,phase\n";
    char line[128];
    for (int j = 0; j <= G.m; ++j) {
        for (int k = std::max(0, j - G.band); k <= std::min(G.m, j + G.band); ++k) {
            cplx v = G.unit(j, k);
            if (v == cplx(0.0)) continue;
            double lm = 0.5 * (G.log_scale(j) + G.log_scale(k)) + std::log(std::abs(v));
            std::snprintf(line, sizeof line, "%d,%d,%.17g,%.17g\n", j, k, lm,
                          std::arg(v));
            os << line;
        }
    }
}

}  // namespace berg
