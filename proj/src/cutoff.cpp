#include "berg/cutoff.hpp"

#include <cmath>
#include <functional>
#include <vector>

#include "berg/quadrature.hpp"

namespace berg {

namespace {

constexpr double MU = 0.1;       // bump sharpness
constexpr double DLT = 0.125;    // ramp width
constexpr double SLP = 8.0 / 3;  // middle slope; total drop over [1/2,1] is exactly 1

// bump b(u) = exp(-mu/(u(1-u))) on (0,1), zero outside, with two derivatives
double bump(double u) {
    if (u <= 0.0 || u >= 1.0) return 0.0;
    return std::exp(-MU / (u * (1.0 - u)));
}

double bump_d1(double u) {
    if (u <= 0.0 || u >= 1.0) return 0.0;
    double q = 1.0 / (u * (1.0 - u)), d = 2.0 * u - 1.0;
    return -bump(u) * MU * d * q * q;
}

double bump_d2(double u) {
    if (u <= 0.0 || u >= 1.0) return 0.0;
    double q = 1.0 / (u * (1.0 - u)), d = 2.0 * u - 1.0;
    return bump(u) * (MU * MU * d * d * q * q * q * q - 2.0 * MU * q * q -
                      2.0 * MU * d * d * q * q * q);
}

/* b is essentially flat at 0 and 1 (underflows below u ~ 1.4e-4), which ruins
   single-panel Gauss rules.  Geometric panels toward both endpoints restore
   spectral accuracy. */
double bump_quad(const std::function<double(double)>& w, double t) {
    constexpr double LO = 1.3e-4;  // b < 1e-300 outside [LO, 1-LO]
    double hi = std::min(t, 1.0 - LO);
    if (hi <= LO) return 0.0;
    std::vector<double> edges{LO};
    for (double e = LO; e < 0.5; e *= 4.0) edges.push_back(std::min(e * 4.0, 0.5));
    for (double e = LO * 4.0; e < 0.5; e *= 4.0) edges.push_back(1.0 - e);
    edges.push_back(1.0 - LO);
    std::sort(edges.begin(), edges.end());
    double s = 0.0;
    for (size_t i = 0; i + 1 < edges.size(); ++i) {
        double a = std::max(edges[i], LO), b2 = std::min(edges[i + 1], hi);
        if (b2 > a) s += gl_integrate([&](double u) { return w(u) * bump(u); }, a, b2, 24);
    }
    return s;
}

double bump_mass() {  // int_0^1 b, fixed by MU
    static const double Z = bump_quad([](double) { return 1.0; }, 1.0);
    return Z;
}

// Phi(t) = int_0^t b / Z: the normalized step
double step_raw(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    return bump_quad([](double) { return 1.0; }, t) / bump_mass();
}

// Psi(t) = int_0^t Phi = int_0^t (t-u) b(u)/Z du; Psi(1) = 1/2 by symmetry of b
double step_antideriv(double t) {
    if (t <= 0.0) return 0.0;
    return bump_quad([&](double u) { return t - u; }, t) / bump_mass();
}

}  // namespace

CutoffProfile::CutoffProfile() : slope_(SLP), delta_(DLT) {
    seams_ = {0.5, 0.5 + DLT, 1.0 - DLT, 1.0};
    max_d1_ = 0.0;
    max_d2_ = 0.0;
    for (int i = 0; i <= 4000; ++i) {
        CutoffJets j = jets(0.5 + 0.5 * i / 4000.0);
        max_d1_ = std::max(max_d1_, std::abs(j.d1));
        max_d2_ = std::max(max_d2_, std::abs(j.d2));
    }
}

CutoffJets CutoffProfile::jets(double r) const {
    const double Z = bump_mass();
    if (r <= 0.5) return {1.0, 0.0, 0.0, 0.0, 0.0};
    if (r >= 1.0) return {0.0, 0.0, 0.0, 0.0, 0.0};
    if (r <= 0.5 + delta_) {
        double t = (r - 0.5) / delta_;
        return {1.0 - slope_ * delta_ * step_antideriv(t),
                -slope_ * step_raw(t),
                -slope_ * bump(t) / (Z * delta_),
                -slope_ * bump_d1(t) / (Z * delta_ * delta_),
                -slope_ * bump_d2(t) / (Z * delta_ * delta_ * delta_)};
    }
    if (r < 1.0 - delta_) {
        // Psi(1) = 1/2, so the plateau hands off at 1 - slope*delta/2
        return {1.0 - 0.5 * slope_ * delta_ - slope_ * (r - 0.5 - delta_),
                -slope_, 0.0, 0.0, 0.0};
    }
    double u = (1.0 - r) / delta_;
    return {slope_ * delta_ * step_antideriv(u),
            -slope_ * step_raw(u),
            slope_ * bump(u) / (Z * delta_),
            -slope_ * bump_d1(u) / (Z * delta_ * delta_),
            slope_ * bump_d2(u) / (Z * delta_ * delta_ * delta_)};
}

double smooth_step(double t) { return step_raw(t); }

double smooth_step_d1(double t) {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    return bump(t) / bump_mass();
}

double smooth_step_d2(double t) {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    return bump_d1(t) / bump_mass();
}

}  // namespace berg
