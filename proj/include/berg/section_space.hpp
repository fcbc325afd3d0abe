#pragma once

#include <Eigen/Dense>
#include <iosfwd>

#include "berg/common.hpp"
#include "berg/metric_models.hpp"
#include "berg/quadrature.hpp"

namespace berg {

/* L^2 Gram matrix of the monomial sections z^0..z^m against a^m dV, held in
   row/column-scaled form so that entries stay O(1) for every model:

       G_true(j, k) = exp((log_scale(j) + log_scale(k)) / 2) * unit(j, k).

   For the radial assembly path log_scale(j) is exactly log G_true(j, j) and
   unit is the identity.  For angular paths log_scale is the log of the
   round-metric diagonal, so unit has near-unit diagonal. */
struct GramMatrix {
    int m = 0;
    Eigen::MatrixXcd unit;
    Eigen::VectorXd log_scale;
    // stored half-bandwidth: 0 diagonal, m full; entries outside are zero
    int band = 0;
    // largest ratio |A_d|/|A_0| seen among the first few discarded angular
    // modes, sampled along the radial grid; 0 for exact-by-symmetry paths
    double tail_estimate = 0.0;
};

/* Basis change to the L^2-orthonormal sections in the triangular gauge:
   row j holds f_j = sum_{i >= j} coeff(j, i) * z^i * exp(-log_scale(i)/2),
   with coeff(j, j) real positive.  Monomials below j are absent, so the
   first j derivatives of f_j vanish at the chart origin. */
struct Transform {
    int m = 0;
    Eigen::MatrixXcd coeff;
    Eigen::VectorXd log_scale;
};

/* Jets of the orthonormal basis at the chosen basepoint: column a of row j
   is the a-th derivative of f_j there, a = 0..3.  Triangular gauge makes
   rows j > a vanish in column a. */
struct OrthonormalJets {
    int m = 0;
    Eigen::MatrixXcd jets;
};

struct NotPositiveDefinite : Error {
    double smallest_pivot;
    NotPositiveDefinite(const std::string& what, double pivot)
        : Error(what), smallest_pivot(pivot) {}
};

struct BandwidthExceeded : Error {
    double tail;
    BandwidthExceeded(const std::string& what, double tail_in)
        : Error(what), tail(tail_in) {}
};

/* Assembly path.  automatic picks by the model's symmetry flag and falls
   back from banded to generic when the discarded-mode probe exceeds the
   quadrature tolerance; the explicit values force one path (used by tests
   to cross-validate the paths against each other). */
enum class GramPath { automatic, radial, banded, generic };

GramMatrix gram(const MetricModel& model, int m, const QuadSpec& spec = {},
                GramPath path = GramPath::automatic);

Transform orthonormalize(const GramMatrix& G);

/* Gram of the same sections re-expanded around chart point w, i.e. in the
   shifted monomials (z-w)^a.  Dense conjugation, meant for moderate m. */
GramMatrix recenter(const GramMatrix& G, cplx w);

OrthonormalJets jets_at(const MetricModel& model, int m, cplx basepoint = 0.0,
                        const QuadSpec& spec = {});

OrthonormalJets jets_of(const Transform& T);

// csv rows "j,k,log_mag,phase" of the stored entries, for external checks
void write_gram_csv(const GramMatrix& G, std::ostream& os);

}  // namespace berg
