#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "berg/common.hpp"
#include "berg/cutoff.hpp"

namespace berg {

enum class Symmetry { radial, angular_band, generic };

/* Metric coefficient g_{1 1bar} and its derivatives at one chart point.
   For real-valued g the mixed second derivative gzzb is real. */
struct MetricJets {
    double g;
    cplx gz;      // dg/dz
    cplx gzz;     // d2g/dz2
    double gzzb;  // d2g/dz dzbar
};

struct PositivityFailure : Error {
    PositivityFailure(const std::string& what, cplx where_, double value_);
    cplx where;
    double value;
};

/* A polarized model on a chart: positive weight a (the Hermitian metric on the
   canonical frame) and metric coefficient g with
   (1/2pi) d2(log a)/dz dzbar = -g.  Models are immutable and safe to share
   across threads. */
class MetricModel {
public:
    virtual ~MetricModel() = default;

    virtual std::string name() const = 0;
    virtual double chart_radius() const = 0;  // +inf for the dense chart of CP^1
    virtual Symmetry symmetry() const = 0;
    virtual int degree_cap() const = 0;

    virtual double log_weight(cplx z) const = 0;  // log a(z)
    virtual MetricJets metric(cplx z) const = 0;

    // number of angular Fourier modes of the Gram kernel that matter; only
    // meaningful for symmetry() == angular_band
    virtual int angular_bandwidth() const { return 0; }

    // log a = phi - log(1+|z|^2) with phi the perturbation of the round weight
    virtual bool fs_based() const { return false; }
    virtual double fs_log_perturbation(cplx) const {
        throw Error(name() + ": not a perturbed round model");
    }

    // manifold glued from two copies of the chart (monomial z^j pairs with
    // w^{m-j} on the opposite chart)
    virtual bool double_chart() const { return false; }

    // radii where the weight changes analytic branch; quadrature panels
    // should not straddle these
    virtual std::vector<double> radial_breakpoints() const { return {}; }
};

std::unique_ptr<MetricModel> fubini_study();
std::unique_ptr<MetricModel> flat_gaussian(double chart_radius = 8.0);
std::unique_ptr<MetricModel> sharp_example();
std::unique_ptr<MetricModel> oscillation_family(int k);

/* Degenerating family: a round cap, a hyperbolic cusp neck of length e^k, and
   a thin flat cone, glued by smooth steps and normalized to unit volume.  The
   profile is radial, so the model keeps the whole construction exposed for
   the example drivers. */
class PinchModel : public MetricModel {
public:
    explicit PinchModel(int k);

    std::string name() const override;
    double chart_radius() const override { return 1.0; }
    Symmetry symmetry() const override { return Symmetry::radial; }
    int degree_cap() const override { return 4096; }
    double log_weight(cplx z) const override;
    MetricJets metric(cplx z) const override;
    bool double_chart() const override { return true; }
    std::vector<double> radial_breakpoints() const override;

    int parameter() const { return k_; }
    // area of the un-normalized profile metric f^2 |dw|^2 over both charts
    double raw_volume() const { return raw_volume_; }
    double normalization() const { return norm_c_; }

    // neck profile f(w) and derivatives in the scaled coordinate w
    double profile(double w) const;
    double profile_d1(double w) const;
    double profile_d2(double w) const;
    // Gauss curvature of f^2 |dw|^2; the cusp branch gives exactly -1
    double profile_curvature(double w) const;

    // radial log-weight and its derivative; log_weight_d1(1) = -1 after the
    // unit-volume normalization
    double log_weight_radial(double r) const;
    double log_weight_d1(double r) const;

private:
    void build_weight_table();
    double cum_mass(double r) const;  // int_0^r g_raw t dt, refined per query

    int k_;
    double scale_;       // e^{2 e^k}: chart magnification
    double split_;       // e^{e^k}: ratio between the two glue radii
    double raw_volume_;
    double norm_c_;
    // anchors for u = log a: per-query refinement integrates from the nearest
    // knot, so the weight is quadrature-exact rather than interpolated
    std::vector<double> knots_, u_, mass_;
};

double curvature_at(const MetricModel& model, cplx z);

std::vector<std::string> model_names();
std::unique_ptr<MetricModel> make_model(const std::string& name,
                                        const std::map<std::string, double>& params = {});

}  // namespace berg
