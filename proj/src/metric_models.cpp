#include "berg/metric_models.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "berg/quadrature.hpp"

namespace berg {

static constexpr double TWO_PI = 2.0 * PI;

PositivityFailure::PositivityFailure(const std::string& what, cplx where_, double value_)
    : Error(what), where(where_), value(value_) {}

namespace {

/* Metric positivity sweep shared by the perturbed models.  The grid covers the
   unit disc where every perturbation lives; outside it the models are round. */
void verify_positive(const MetricModel& m, const std::string& who) {
    for (int ir = 1; ir <= 60; ++ir) {
        double r = ir / 60.0 * 0.999;
        for (int it = 0; it < 96; ++it) {
            cplx z = std::polar(r, TWO_PI * it / 96.0 + 0.013);
            double g = m.metric(z).g;
            if (!(g > 0.0))
                throw PositivityFailure(who + ": metric coefficient is not positive", z, g);
        }
    }
}

/* ---------------- Fubini-Study ---------------- */

class FubiniStudy : public MetricModel {
public:
    std::string name() const override { return "fubini_study"; }
    double chart_radius() const override { return std::numeric_limits<double>::infinity(); }
    Symmetry symmetry() const override { return Symmetry::radial; }
    int degree_cap() const override { return 4096; }

    double log_weight(cplx z) const override { return -std::log1p(std::norm(z)); }

    MetricJets metric(cplx z) const override {
        double s = std::norm(z), q = 1.0 / (1.0 + s);
        cplx zb = std::conj(z);
        double q2 = q * q, q3 = q2 * q, q4 = q3 * q;
        return {q2 / TWO_PI, -2.0 * zb * q3 / TWO_PI, 6.0 * zb * zb * q4 / TWO_PI,
                (4.0 * s - 2.0) * q4 / TWO_PI};
    }

    bool fs_based() const override { return true; }
    double fs_log_perturbation(cplx) const override { return 0.0; }
};

/* ---------------- flat Gaussian ---------------- */

class FlatGaussian : public MetricModel {
public:
    explicit FlatGaussian(double R) : R_(R) {
        if (!(R > 0.0)) throw Error("flat_gaussian: chart radius must be positive");
    }
    std::string name() const override { return "flat_gaussian"; }
    double chart_radius() const override { return R_; }
    Symmetry symmetry() const override { return Symmetry::radial; }
    int degree_cap() const override { return 4096; }
    double log_weight(cplx z) const override { return -PI * std::norm(z); }
    MetricJets metric(cplx) const override { return {0.5, 0.0, 0.0, 0.0}; }

private:
    double R_;
};

/* ---------------- sharp perturbation of the round model ----------------

   log a = phi - log(1+|z|^2) with phi = (z+zbar) |z|^3 eta(|z|) / 400.
   Writing phi = (z+zbar) F(s)/400, s = |z|^2, the H-tables are the first four
   s-derivatives of F = eta(r) r^3 expressed through radial eta jets. */

struct SharpTables {
    double H0, H1, H2, H3, H4;
};

class SharpExample : public MetricModel {
public:
    SharpExample() { verify_positive(*this, name()); }

    std::string name() const override { return "sharp_example"; }
    double chart_radius() const override { return std::numeric_limits<double>::infinity(); }
    Symmetry symmetry() const override { return Symmetry::angular_band; }
    int angular_bandwidth() const override { return 12; }
    // the acceptance sweep tops out at m = 1024; Gram band content beyond
    // mode 11 stays below 1e-14 there
    int degree_cap() const override { return 2048; }

    double log_weight(cplx z) const override {
        return fs_log_perturbation(z) - std::log1p(std::norm(z));
    }

    bool fs_based() const override { return true; }

    double fs_log_perturbation(cplx z) const override {
        double r = std::abs(z);
        if (r >= 1.0 || r < 1e-9) return 0.0;
        double w = 2.0 * z.real();
        return w * tables(r).H0 / 400.0;
    }

    MetricJets metric(cplx z) const override {
        double s = std::norm(z), q = 1.0 / (1.0 + s);
        cplx zb = std::conj(z);
        double q2 = q * q, q3 = q2 * q, q4 = q3 * q;
        double r = std::abs(z);
        double p11 = 0.0, p22 = 0.0;
        cplx p21 = 0.0, p31 = 0.0;
        if (r < 1.0 && r >= 1e-9) {
            SharpTables t = tables(r);
            double w = 2.0 * z.real();
            p11 = (2.0 * t.H1 * w + t.H2 * s * w) / 400.0;
            p21 = (2.0 * t.H1 + t.H2 * (3.0 * zb * zb + 4.0 * s) +
                   t.H3 * s * (zb * zb + s)) /
                  400.0;
            p31 = (6.0 * t.H2 * zb + t.H3 * (4.0 * zb * zb * zb + 6.0 * s * zb) +
                   t.H4 * s * zb * zb * w) /
                  400.0;
            p22 = (6.0 * t.H2 * w + 6.0 * t.H3 * s * w + t.H4 * s * s * w) / 400.0;
        }
        return {(q2 - p11) / TWO_PI, (-2.0 * zb * q3 - p21) / TWO_PI,
                (6.0 * zb * zb * q4 - p31) / TWO_PI, ((4.0 * s - 2.0) * q4 - p22) / TWO_PI};
    }

    std::vector<double> radial_breakpoints() const override { return eta_.breakpoints(); }

private:
    SharpTables tables(double r) const {
        // Gram assembly walks a radius-major tensor grid, so the last radius
        // repeats across the angular sweep
        thread_local const SharpExample* mkey = nullptr;
        thread_local double mr = -1.0;
        thread_local SharpTables mt;
        if (mkey == this && mr == r) return mt;
        CutoffJets e = eta_.jets(r);
        double r2 = r * r, r3 = r2 * r;
        SharpTables t;
        t.H0 = e.v * r3;
        t.H1 = (e.d1 * r2 + 3.0 * e.v * r) / 2.0;
        t.H2 = (e.d2 * r2 + 5.0 * e.d1 * r + 3.0 * e.v) / (4.0 * r);
        t.H3 = (e.d3 * r3 + 6.0 * e.d2 * r2 + 3.0 * e.d1 * r - 3.0 * e.v) / (8.0 * r3);
        t.H4 = (e.d4 * r2 * r2 + 6.0 * e.d3 * r3 - 3.0 * e.d2 * r2 - 9.0 * e.d1 * r +
                9.0 * e.v) /
               (16.0 * r3 * r2);
        mkey = this;
        mr = r;
        mt = t;
        return t;
    }

    CutoffProfile eta_;
};

/* ---------------- oscillation family ----------------

   log a = phi_k - log(1+|z|^2) with
   phi_k = -k^{-4} sin(2kx) sin(2ky) eta(|z|) = chi(z) N(s),
   chi a sum of four unimodular exponentials e^{az+b zbar}.  Derivatives of chi
   are algebraic; derivatives of the radial factor N go through the T-tables. */

class OscillationFamily : public MetricModel {
public:
    explicit OscillationFamily(int k) : k_(k) {
        if (k < 1) throw Error("oscillation_family: k must be >= 1");
        double c0 = -0.25 * std::pow(static_cast<double>(k), -4.0);
        cplx a1(-k, k), b1(k, k);  // exponent 2ik(x - y)
        cplx a2(k, k), b2(-k, k);  // exponent 2ik(x + y)
        ex_[0] = {c0, a1, b1};
        ex_[1] = {c0, std::conj(b1), std::conj(a1)};
        ex_[2] = {-c0, a2, b2};
        ex_[3] = {-c0, std::conj(b2), std::conj(a2)};
        verify_positive(*this, name());
    }

    std::string name() const override { return "oscillation_family"; }
    double chart_radius() const override { return std::numeric_limits<double>::infinity(); }
    Symmetry symmetry() const override { return Symmetry::generic; }
    int degree_cap() const override { return 128; }

    double log_weight(cplx z) const override {
        return fs_log_perturbation(z) - std::log1p(std::norm(z));
    }

    bool fs_based() const override { return true; }

    double fs_log_perturbation(cplx z) const override {
        double r = std::abs(z);
        if (r >= 1.0) return 0.0;
        double k4 = std::pow(static_cast<double>(k_), 4.0);
        return -std::sin(2.0 * k_ * z.real()) * std::sin(2.0 * k_ * z.imag()) *
               eta_(r) / k4;
    }

    MetricJets metric(cplx z) const override {
        double s = std::norm(z), q = 1.0 / (1.0 + s);
        cplx zb = std::conj(z);
        double q2 = q * q, q4 = q2 * q2;
        double p11 = 0.0, p22 = 0.0;
        cplx p21 = 0.0, p31 = 0.0;
        if (std::abs(z) < 1.0) {
            Derivs d = perturbation_derivs(z);
            p11 = d.d11;
            p21 = d.d21;
            p31 = d.d31;
            p22 = d.d22;
        }
        return {(q2 - p11) / TWO_PI, (-2.0 * zb * q2 * q - p21) / TWO_PI,
                (6.0 * zb * zb * q4 - p31) / TWO_PI, ((4.0 * s - 2.0) * q4 - p22) / TWO_PI};
    }

    std::vector<double> radial_breakpoints() const override { return eta_.breakpoints(); }

    int parameter() const { return k_; }

private:
    struct Expo {
        cplx coef, a, b;
    };
    struct Derivs {
        double d11, d22;
        cplx d21, d31;
    };

    // dz^i dzbar^j of the radial factor N(s) = eta(r)
    std::array<std::array<cplx, 3>, 4> t_table(cplx z) const {
        double r = std::abs(z), s = std::norm(z);
        cplx zb = std::conj(z);
        double N = 1.0, N1 = 0.0, N2 = 0.0, N3 = 0.0, N4 = 0.0;
        if (r >= 0.5) {  // eta derivatives live only on the ramp band
            CutoffJets e = eta_.jets(r);
            double r2 = r * r, r3 = r2 * r, r5 = r3 * r2, r7 = r5 * r2;
            N = e.v;
            N1 = e.d1 / (2.0 * r);
            N2 = (e.d2 * r - e.d1) / (4.0 * r3);
            N3 = (e.d3 * r2 - 3.0 * e.d2 * r + 3.0 * e.d1) / (8.0 * r5);
            N4 = (e.d4 * r3 - 6.0 * e.d3 * r2 + 15.0 * e.d2 * r - 15.0 * e.d1) /
                 (16.0 * r7);
        }
        std::array<std::array<cplx, 3>, 4> T{};
        T[0][0] = N;
        T[1][0] = N1 * zb;
        T[0][1] = N1 * z;
        T[1][1] = N2 * s + N1;
        T[2][0] = N2 * zb * zb;
        T[0][2] = N2 * z * z;
        T[2][1] = N3 * s * zb + 2.0 * N2 * zb;
        T[1][2] = std::conj(T[2][1]);
        T[3][0] = N3 * zb * zb * zb;
        T[3][1] = N4 * s * zb * zb + 3.0 * N3 * zb * zb;
        T[2][2] = N4 * s * s + 4.0 * N3 * s + 2.0 * N2;
        return T;
    }

    cplx chi_deriv(cplx z, int p, int q) const {
        cplx s = 0.0;
        for (const Expo& e : ex_) {
            cplx f = e.coef * std::exp(e.a * z + e.b * std::conj(z));
            for (int i = 0; i < p; ++i) f *= e.a;
            for (int j = 0; j < q; ++j) f *= e.b;
            s += f;
        }
        return s;
    }

    Derivs perturbation_derivs(cplx z) const {
        static const double C[4][4] = {
            {1, 0, 0, 0}, {1, 1, 0, 0}, {1, 2, 1, 0}, {1, 3, 3, 1}};
        auto T = t_table(z);
        auto mixed = [&](int p, int q) {
            cplx s = 0.0;
            for (int i = 0; i <= p && i <= 3; ++i)
                for (int j = 0; j <= q && j <= 2; ++j)
                    s += C[p][i] * C[q][j] * chi_deriv(z, p - i, q - j) * T[i][j];
            return s;
        };
        Derivs d;
        d.d11 = mixed(1, 1).real();
        d.d21 = mixed(2, 1);
        d.d31 = mixed(3, 1);
        d.d22 = mixed(2, 2).real();
        return d;
    }

    int k_;
    CutoffProfile eta_;
    std::array<Expo, 4> ex_;
};

}  // namespace

/* ---------------- pinch family ---------------- */

namespace {

struct StepLoc {
    double v, d1, d2;
};

// window that is 1 on [0, 1.5] and 0 from 2 on
StepLoc window32(double x) {
    double t = 4.0 - 2.0 * x;
    return {smooth_step(t), -2.0 * smooth_step_d1(t), 4.0 * smooth_step_d2(t)};
}

}  // namespace

PinchModel::PinchModel(int k) : k_(k) {
    if (k < 1) throw Error("pinch_family: k must be >= 1");
    if (k > 5) throw Error("pinch_family: scale e^{2e^k} leaves double range for k > 5");
    double ek = std::exp(static_cast<double>(k));
    split_ = std::exp(ek);
    scale_ = split_ * split_;

    // area of f^2 |dw|^2 over both half-charts; the window (2pi, 20pi) is a
    // consistency bound on the construction
    QuadSpec spec;
    spec.rel_tol = 1e-11;
    auto area = [&](double r) {
        double f = profile(scale_ * r);
        return LogScalar::from_log(2.0 * std::log(scale_ * f) + std::log(r));
    };
    raw_volume_ = 4.0 * PI *
                  integrate_radial(area, 1.0, spec, radial_breakpoints()).value.real_value();
    if (!(raw_volume_ > TWO_PI && raw_volume_ < 20.0 * PI))
        throw Error("pinch_family: profile area " + std::to_string(raw_volume_) +
                    " leaves (2pi, 20pi); construction is broken");
    // unit total volume under dV = 2 g dA summed over both half-charts
    norm_c_ = 1.0 / (2.0 * raw_volume_);
    build_weight_table();
}

std::string PinchModel::name() const { return "pinch_family"; }

std::vector<double> PinchModel::radial_breakpoints() const {
    return {1.5 / scale_, 2.0 / scale_, 1.5 * split_ / scale_, 2.0 * split_ / scale_};
}

double PinchModel::profile(double w) const {
    StepLoc s1 = window32(w);
    if (s1.v >= 1.0) return 1.0;
    double s2 = (w > split_) ? window32(w / split_).v : 1.0;
    double f = s1.v;
    if (s2 > 0.0) f += (1.0 - s1.v) * s2 / (w * std::log(w));
    if (s2 < 1.0) f += (1.0 - s1.v) * (1.0 - s2) / (std::exp(static_cast<double>(k_)) * w);
    return f;
}

double PinchModel::profile_d1(double w) const {
    StepLoc s1 = window32(w);
    if (s1.v >= 1.0) return 0.0;
    StepLoc s2 = (w > split_) ? window32(w / split_) : StepLoc{1.0, 0.0, 0.0};
    s2.d1 /= split_;
    double A = std::log(w), A1 = A + 1.0;
    double P = 1.0 / (w * A), P1 = -A1 / (w * A * w * A);
    double Q = 1.0 / (std::exp(static_cast<double>(k_)) * w), Q1 = -Q / w;
    double cP = (1.0 - s1.v) * s2.v, cQ = (1.0 - s1.v) * (1.0 - s2.v);
    double cP1 = -s1.d1 * s2.v + (1.0 - s1.v) * s2.d1;
    double cQ1 = -s1.d1 * (1.0 - s2.v) - (1.0 - s1.v) * s2.d1;
    return s1.d1 + cP1 * P + cP * P1 + cQ1 * Q + cQ * Q1;
}

double PinchModel::profile_d2(double w) const {
    StepLoc s1 = window32(w);
    if (s1.v >= 1.0) return 0.0;
    StepLoc s2 = (w > split_) ? window32(w / split_) : StepLoc{1.0, 0.0, 0.0};
    s2.d1 /= split_;
    s2.d2 /= split_ * split_;
    double A = std::log(w), A1 = A + 1.0;
    double WA = w * A;
    double P = 1.0 / WA, P1 = -A1 / (WA * WA), P2 = -1.0 / (w * WA * WA) + 2.0 * A1 * A1 / (WA * WA * WA);
    double Q = 1.0 / (std::exp(static_cast<double>(k_)) * w), Q1 = -Q / w, Q2 = 2.0 * Q / (w * w);
    double cP = (1.0 - s1.v) * s2.v, cQ = (1.0 - s1.v) * (1.0 - s2.v);
    double cP1 = -s1.d1 * s2.v + (1.0 - s1.v) * s2.d1;
    double cQ1 = -s1.d1 * (1.0 - s2.v) - (1.0 - s1.v) * s2.d1;
    double cP2 = -s1.d2 * s2.v - 2.0 * s1.d1 * s2.d1 + (1.0 - s1.v) * s2.d2;
    double cQ2 = -s1.d2 * (1.0 - s2.v) + 2.0 * s1.d1 * s2.d1 - (1.0 - s1.v) * s2.d2;
    return s1.d2 + cP2 * P + 2.0 * cP1 * P1 + cP * P2 + cQ2 * Q + 2.0 * cQ1 * Q1 + cQ * Q2;
}

double PinchModel::profile_curvature(double w) const {
    double f = profile(w), f1 = profile_d1(w), f2 = profile_d2(w);
    double lap_logf = (f2 * f - f1 * f1) / (f * f) + f1 / (w * f);
    return -lap_logf / (f * f);
}

void PinchModel::build_weight_table() {
    // Inner plateau (f = 1) has the closed form u = -2 pi c scale^2 r^2; the
    // table starts just inside it and carries I(r) = int_0^r G t dt along.
    double r0 = 1.4 / scale_;
    std::vector<double> ks;
    double ratio = 1.02;
    for (double r = r0; r < 1.0; r *= ratio) ks.push_back(r);
    ks.push_back(1.0);
    for (double b : radial_breakpoints())
        if (b > r0 && b < 1.0) ks.push_back(b);
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());

    auto G_raw = [&](double t) {
        double f = profile(scale_ * t);
        return scale_ * scale_ * f * f;
    };
    const double lam2 = scale_ * scale_;
    size_t n = ks.size();
    knots_ = ks;
    u_.assign(n, 0.0);
    mass_.assign(n, 0.0);
    double I = lam2 * r0 * r0 / 2.0;  // exact on the plateau
    double u = -TWO_PI * norm_c_ * lam2 * r0 * r0;
    u_[0] = u;
    mass_[0] = I;
    for (size_t i = 0; i + 1 < n; ++i) {
        double a = ks[i], b = ks[i + 1];
        // u increment needs I at interior nodes: I(t) = I(a) + int_a^t G s ds
        double inc = gl_integrate(
            [&](double t) {
                double It = I + gl_integrate([&](double s) { return G_raw(s) * s; }, a, t, 8);
                return -8.0 * PI * norm_c_ * It / t;
            },
            a, b, 12);
        I += gl_integrate([&](double s) { return G_raw(s) * s; }, a, b, 12);
        u += inc;
        u_[i + 1] = u;
        mass_[i + 1] = I;
    }
}

double PinchModel::cum_mass(double r) const {
    const double lam2 = scale_ * scale_;
    if (r <= knots_.front()) return lam2 * r * r / 2.0;
    double rc = std::min(r, 1.0);
    size_t i = std::upper_bound(knots_.begin(), knots_.end(), rc) - knots_.begin() - 1;
    if (i + 1 >= knots_.size()) return mass_.back();
    return mass_[i] + gl_integrate(
                          [&](double s) {
                              double f = profile(scale_ * s);
                              return lam2 * f * f * s;
                          },
                          knots_[i], rc, 8);
}

double PinchModel::log_weight_d1(double r) const {
    const double lam2 = scale_ * scale_;
    if (r <= knots_.front()) return -4.0 * PI * norm_c_ * lam2 * r;
    return -8.0 * PI * norm_c_ * cum_mass(r) / r;
}

double PinchModel::log_weight_radial(double r) const {
    const double lam2 = scale_ * scale_;
    if (r <= knots_.front()) return -TWO_PI * norm_c_ * lam2 * r * r;
    double rc = std::min(r, 1.0);
    size_t i = std::upper_bound(knots_.begin(), knots_.end(), rc) - knots_.begin() - 1;
    double base = (i + 1 >= knots_.size())
                      ? u_.back()
                      : u_[i] + gl_integrate([&](double t) { return log_weight_d1(t); },
                                             knots_[i], rc, 8);
    if (r > 1.0) base += log_weight_d1(1.0) * (r - 1.0);  // chart edge continuation
    return base;
}

double PinchModel::log_weight(cplx z) const { return log_weight_radial(std::abs(z)); }

MetricJets PinchModel::metric(cplx z) const {
    double r = std::abs(z);
    if (r < knots_.front()) return {norm_c_ * scale_ * scale_, 0.0, 0.0, 0.0};
    double w = scale_ * r;
    double f = profile(w), f1 = profile_d1(w), f2 = profile_d2(w);
    double lam = scale_, lam2 = lam * lam;
    double G = norm_c_ * lam2 * f * f;
    double Gr = norm_c_ * 2.0 * lam2 * lam * f * f1;
    double Grr = norm_c_ * 2.0 * lam2 * lam2 * (f1 * f1 + f * f2);
    double Gs = Gr / (2.0 * r);                       // d/ds, s = r^2
    double Gss = (Grr * r - Gr) / (4.0 * r * r * r);
    cplx zb = std::conj(z);
    return {G, Gs * zb, Gss * zb * zb, Gs + std::norm(z) * Gss};
}

/* ---------------- registry ---------------- */

std::unique_ptr<MetricModel> fubini_study() { return std::make_unique<FubiniStudy>(); }

std::unique_ptr<MetricModel> flat_gaussian(double chart_radius) {
    return std::make_unique<FlatGaussian>(chart_radius);
}

std::unique_ptr<MetricModel> sharp_example() { return std::make_unique<SharpExample>(); }

std::unique_ptr<MetricModel> oscillation_family(int k) {
    return std::make_unique<OscillationFamily>(k);
}

// Sign convention: R = -g_{z zbar} - |g_z|^2 / g.  The first-derivative term
// enters with a minus here; the classical curvature tensor takes it with a
// plus, so R/g^2 is constant for the round metric only under that other sign.
// Round-metric values under this convention: R(0) = 1/pi and, off the origin,
// R = (1 - 4|z|^2) / (pi (1+|z|^2)^4).  Tests pin both.
double curvature_at(const MetricModel& model, cplx z) {
    MetricJets j = model.metric(z);
    return -j.gzzb - std::norm(j.gz) / j.g;
}

std::vector<std::string> model_names() {
    return {"fubini_study", "flat_gaussian", "sharp_example", "pinch_family",
            "oscillation_family"};
}

std::unique_ptr<MetricModel> make_model(const std::string& name,
                                        const std::map<std::string, double>& params) {
    auto get = [&](const std::string& key, double fallback) {
        auto it = params.find(key);
        return it == params.end() ? fallback : it->second;
    };
    if (name == "fubini_study") return fubini_study();
    if (name == "flat_gaussian") return flat_gaussian(get("chart_radius", 8.0));
    if (name == "sharp_example") return sharp_example();
    if (name == "pinch_family")
        return std::make_unique<PinchModel>(static_cast<int>(get("k", 1.0)));
    if (name == "oscillation_family")
        return oscillation_family(static_cast<int>(get("k", 8.0)));
    throw Error("make_model: unknown model '" + name + "'");
}

}  // namespace berg
