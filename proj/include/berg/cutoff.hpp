#pragma once

#include <vector>

#include "berg/common.hpp"

namespace berg {

struct CutoffJets {
    double v;   // eta(r)
    double d1;  // radial derivatives up to order four
    double d2;
    double d3;
    double d4;
};

/* Radial plateau profile: identically 1 on [0,1/2], identically 0 on [1,inf),
   C-infinity in between.  Two mollified ramps of width 1/8 join a linear
   segment of slope -8/3, which keeps sup|eta'| = 8/3 <= 3 and sup|eta''| < 30
   while the endpoint values stay exact. */
class CutoffProfile {
public:
    CutoffProfile();

    double operator()(double r) const { return jets(r).v; }
    CutoffJets jets(double r) const;

    double max_abs_d1() const { return max_d1_; }
    double max_abs_d2() const { return max_d2_; }

    // branch seams; quadrature panels should not straddle these
    const std::vector<double>& breakpoints() const { return seams_; }

private:
    double slope_;   // magnitude of the middle-segment slope
    double delta_;   // ramp width
    double max_d1_, max_d2_;
    std::vector<double> seams_;
};

/* C-infinity unit step: 0 for t <= 0, 1 for t >= 1, strictly increasing in
   between, all derivatives vanish at both ends. */
double smooth_step(double t);
double smooth_step_d1(double t);
double smooth_step_d2(double t);

}  // namespace berg
