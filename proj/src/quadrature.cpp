#include "berg/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>

namespace berg {

static constexpr double NEG_INF = -std::numeric_limits<double>::infinity();

LogScalar LogScalar::from(double x) {
    if (x == 0.0) return zero();
    return LogScalar(std::log(std::abs(x)), cplx(x > 0 ? 1.0 : -1.0, 0.0));
}

LogScalar LogScalar::from(cplx x) {
    double m = std::abs(x);
    if (m == 0.0) return zero();
    return LogScalar(std::log(m), x / m);
}

LogScalar LogScalar::from_log(double lm, cplx ph) {
    double m = std::abs(ph);
    if (m == 0.0 || lm == NEG_INF) return zero();
    return LogScalar(lm + std::log(m), ph / m);
}

cplx LogScalar::value() const {
    if (is_zero()) return cplx(0.0, 0.0);
    return phase * std::exp(log_mag);
}

LogScalar LogScalar::operator*(const LogScalar& o) const {
    if (is_zero() || o.is_zero()) return zero();
    return LogScalar(log_mag + o.log_mag, phase * o.phase);
}

LogScalar LogScalar::operator/(const LogScalar& o) const {
    if (is_zero()) return zero();
    return LogScalar(log_mag - o.log_mag, phase / o.phase);
}

LogScalar LogScalar::operator+(const LogScalar& o) const {
    if (is_zero()) return o;
    if (o.is_zero()) return *this;
    // anchor at the larger magnitude so exp never overflows
    const LogScalar &big = (log_mag >= o.log_mag) ? *this : o;
    const LogScalar &sml = (log_mag >= o.log_mag) ? o : *this;
    cplx s = big.phase + sml.phase * std::exp(sml.log_mag - big.log_mag);
    double m = std::abs(s);
    if (m == 0.0) return zero();
    return LogScalar(big.log_mag + std::log(m), s / m);
}

LogScalar LogScalar::scaled(double c) const {
    if (c == 0.0 || is_zero()) return zero();
    return LogScalar(log_mag + std::log(std::abs(c)), c > 0 ? phase : -phase);
}

LogScalar log_sum(std::vector<LogScalar> terms) {
    terms.erase(std::remove_if(terms.begin(), terms.end(),
                               [](const LogScalar& t) { return t.is_zero(); }),
                terms.end());
    if (terms.empty()) return LogScalar::zero();
    // ascending magnitude + full tie-break makes the sum permutation-invariant
    std::sort(terms.begin(), terms.end(), [](const LogScalar& a, const LogScalar& b) {
        if (a.log_mag != b.log_mag) return a.log_mag < b.log_mag;
        if (a.phase.real() != b.phase.real()) return a.phase.real() < b.phase.real();
        return a.phase.imag() < b.phase.imag();
    });
    double shift = terms.back().log_mag;
    cplx s(0.0, 0.0), comp(0.0, 0.0);  // Kahan accumulation
    for (const LogScalar& t : terms) {
        cplx y = t.phase * std::exp(t.log_mag - shift) - comp;
        cplx u = s + y;
        comp = (u - s) - y;
        s = u;
    }
    double m = std::abs(s);
    if (m == 0.0) return LogScalar::zero();
    return LogScalar(shift + std::log(m), s / m);
}

int QuadSpec::angular_nodes_for(int bandwidth) {
    int want = std::max(256, 8 * bandwidth);
    int n = 256;
    while (n < want) n *= 2;
    return n;
}

void QuadSpec::validate() const {
    if (!(rel_tol > 0.0)) throw Error("QuadSpec: rel_tol must be positive");
    if (max_subdivisions < 1) throw Error("QuadSpec: max_subdivisions must be >= 1");
    if (angular_nodes < 4 || (angular_nodes & (angular_nodes - 1)) != 0)
        throw Error("QuadSpec: angular_nodes must be a power of two >= 4");
}

/* Gauss-Kronrod 7-15 abscissae mapped to [0,1]; odd indices are the embedded
   7-point Gauss nodes. */
static const double GK_X[15] = {
    0.0042723144395936940576063989283284, 0.025446043828620756865888097308925,
    0.067567788320115451661251881887438,  0.12923440720030276995800022632466,
    0.20695638226615442611944217787823,   0.29707742431130140792205907018797,
    0.3961075224960507457083735971537,    0.5,
    0.6038924775039492542916264028463,    0.7029225756886985365667896985542,
    0.79304361773384557388055782212177,   0.87076559279969723004199977367534,
    0.93243221167988454833874811811256,   0.97455395617137918762296067143325,
    0.99572768556040625043124236981384};

static const double GK_WK[15] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
    0.204432940075298892414161999234649, 0.190350578064785409913256402421014,
    0.169004726639267902826583426598550, 0.140653259715525918745189590510238,
    0.104790010322250183839876322541518, 0.063092092629978553290700663189204,
    0.022935322010529224963732008058970};

static const double GK_WG[15] = {
    0, 0.129484966168869693270611432679082, 0, 0.279705391489276667901467771423780,
    0, 0.381830050505118944950369775488975, 0, 0.417959183673469387755102040816327,
    0, 0.381830050505118944950369775488975, 0, 0.279705391489276667901467771423780,
    0, 0.129484966168869693270611432679082, 0};

namespace {

struct Panel {
    double a, b;
    LogScalar val;     // Kronrod estimate of the panel integral
    double err_log;    // log magnitude of |K15 - G7| * (b - a)
};

Panel eval_panel(const LogIntegrand& f, double a, double b) {
    double h = b - a;
    double shift = NEG_INF;
    LogScalar fv[15];
    for (int i = 0; i < 15; ++i) {
        fv[i] = f(a + h * GK_X[i]);
        shift = std::max(shift, fv[i].log_mag);
    }
    Panel p{a, b, LogScalar::zero(), NEG_INF};
    if (shift == NEG_INF) return p;  // integrand vanishes on this panel
    cplx k(0, 0), g(0, 0);
    for (int i = 0; i < 15; ++i) {
        if (fv[i].is_zero()) continue;
        cplx v = fv[i].phase * std::exp(fv[i].log_mag - shift);
        k += GK_WK[i] * v;
        g += GK_WG[i] * v;
    }
    // weights are normalized for [-1,1], so the width factor is h/2
    double km = std::abs(k);
    if (km > 0.0)
        p.val = LogScalar(shift + std::log(km) + std::log(0.5 * h), k / km);
    double em = std::abs(k - g);
    if (em > 0.0) p.err_log = shift + std::log(em) + std::log(0.5 * h);
    return p;
}

// Coarse search for the integrand's peak; panels concentrate around it.
std::vector<double> default_breakpoints(const LogIntegrand& f, double R) {
    double best = NEG_INF, rstar = R * 0.5;
    auto probe = [&](double r) {
        LogScalar v = f(r);
        if (v.log_mag > best) { best = v.log_mag; rstar = r; }
    };
    for (int i = 0; i < 64; ++i) probe(R * (i + 0.5) / 64.0);
    for (int i = 0; i < 64; ++i) probe(R * std::pow(10.0, -10.0 * (63 - i) / 63.0));
    if (best == NEG_INF) return {};
    std::vector<double> bk;
    for (double c : {1.0 / 16, 0.25, 0.5, 1.0, 2.0, 4.0}) {
        double r = rstar * c;
        if (r > 0.0 && r < R) bk.push_back(r);
    }
    return bk;
}

}  // namespace

IntegralResult integrate_radial(const LogIntegrand& f, double R, const QuadSpec& spec,
                                const std::vector<double>& breakpoints) {
    spec.validate();
    if (!(R > 0.0)) throw Error("integrate_radial: R must be positive");

    std::vector<double> edges = breakpoints.empty() ? default_breakpoints(f, R) : breakpoints;
    edges.push_back(0.0);
    edges.push_back(R);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    // Cap the panel aspect ratio: the embedded error estimate is blind to
    // power-law tails when one panel spans many decades.
    std::vector<double> capped;
    for (size_t i = 0; i + 1 < edges.size(); ++i) {
        double a = edges[i], b = edges[i + 1];
        capped.push_back(a);
        if (a > 0.0 && b / a > 4.0) {
            int k = static_cast<int>(std::ceil(std::log(b / a) / std::log(4.0)));
            for (int j = 1; j < k; ++j)
                capped.push_back(a * std::pow(b / a, static_cast<double>(j) / k));
        }
    }
    capped.push_back(edges.back());
    edges.swap(capped);

    std::vector<Panel> panels;
    for (size_t i = 0; i + 1 < edges.size(); ++i)
        if (edges[i] >= 0.0 && edges[i + 1] <= R && edges[i + 1] > edges[i])
            panels.push_back(eval_panel(f, edges[i], edges[i + 1]));

    auto totals = [&]() {
        std::vector<LogScalar> vs, es;
        for (const Panel& p : panels) {
            vs.push_back(p.val);
            es.push_back(LogScalar::from_log(p.err_log));
        }
        return std::make_pair(log_sum(vs), log_sum(es).log_mag);
    };

    int splits = 0;
    while (true) {
        auto [total, err_log] = totals();
        double goal = std::max(total.log_mag + std::log(spec.rel_tol), spec.abs_tol_log);
        if (err_log <= goal)
            return {total, std::exp(err_log - total.log_mag), static_cast<int>(panels.size())};
        if (splits >= spec.max_subdivisions)
            throw NonConvergence("integrate_radial: subdivision budget exhausted", total,
                                 std::exp(err_log - total.log_mag));
        size_t worst = 0;
        for (size_t i = 1; i < panels.size(); ++i)
            if (panels[i].err_log > panels[worst].err_log ||
                (panels[i].err_log == panels[worst].err_log && panels[i].a < panels[worst].a))
                worst = i;
        Panel p = panels[worst];
        double mid = 0.5 * (p.a + p.b);
        panels[worst] = eval_panel(f, p.a, mid);
        panels.push_back(eval_panel(f, mid, p.b));
        ++splits;
    }
}

std::vector<LogScalar> angular_modes(const std::function<LogScalar(double)>& f,
                                     int n_modes, const QuadSpec& spec) {
    spec.validate();
    const int N = spec.angular_nodes;
    if (n_modes < 0 || n_modes > N / 2)
        throw Error("angular_modes: n_modes must lie in [0, angular_nodes/2]");

    std::vector<LogScalar> samples(N);
    double shift = NEG_INF;
    for (int j = 0; j < N; ++j) {
        samples[j] = f(2.0 * PI * j / N);
        shift = std::max(shift, samples[j].log_mag);
    }
    std::vector<LogScalar> modes(n_modes + 1, LogScalar::zero());
    if (shift == NEG_INF) return modes;

    std::vector<cplx> v(N);
    for (int j = 0; j < N; ++j)
        v[j] = samples[j].is_zero() ? cplx(0, 0)
                                    : samples[j].phase * std::exp(samples[j].log_mag - shift);

    auto mode = [&](int k) {
        cplx s(0, 0), comp(0, 0);
        for (int j = 0; j < N; ++j) {
            cplx y = v[j] * std::polar(1.0, -2.0 * PI * k * j / N) - comp;
            cplx u = s + y;
            comp = (u - s) - y;
            s = u;
        }
        return s * (2.0 * PI / N);
    };

    // Parseval check on the top of the computable spectrum: content there means
    // the equispaced grid does not resolve the integrand.
    double total_energy = 0.0;
    for (const cplx& x : v) total_energy += std::norm(x);
    total_energy *= (2.0 * PI / N) * (2.0 * PI);
    int band = std::max(8, N / 20);
    double tail_energy = 0.0;
    for (int k = N / 2 - band; k <= N / 2; ++k) tail_energy += 2.0 * std::norm(mode(k));
    if (total_energy > 0.0 && tail_energy > spec.rel_tol * total_energy)
        throw AliasingSuspected("angular_modes: unresolved high-frequency content");

    for (int k = 0; k <= n_modes; ++k)
        modes[k] = LogScalar::from_log(shift, mode(k));
    return modes;
}

IntegralResult integrate_disc(const std::function<LogScalar(cplx)>& f, double R,
                              const QuadSpec& spec, const std::vector<double>& breakpoints) {
    spec.validate();
    const int N = spec.angular_nodes;
    std::vector<cplx> dirs(N);
    for (int j = 0; j < N; ++j) dirs[j] = std::polar(1.0, 2.0 * PI * j / N);

    double scale_log = NEG_INF;  // largest pre-cancellation sample magnitude seen
    LogIntegrand ring = [&](double r) {
        std::vector<LogScalar> vals(N);
        double mx = NEG_INF;
        for (int j = 0; j < N; ++j) {
            vals[j] = f(r * dirs[j]);
            mx = std::max(mx, vals[j].log_mag);
        }
        if (mx > NEG_INF && r > 0.0)
            scale_log = std::max(scale_log, mx + std::log(2.0 * PI * r));
        return log_sum(std::move(vals)).scaled(2.0 * PI / N).scaled(r);
    };
    try {
        return integrate_radial(ring, R, spec, breakpoints);
    } catch (const NonConvergence& nc) {
        // Angular cancellation leaves roundoff noise the radial stage cannot
        // refine away; a total this far below the pre-cancellation scale is
        // zero to working precision.
        if (nc.partial.is_zero() ||
            nc.partial.log_mag < scale_log + std::log(R) + std::log(1e-12))
            return {nc.partial, nc.rel_err, 0};
        throw;
    }
}

const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(int n) {
    static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    if (n < 1) throw Error("gauss_legendre: order must be >= 1");

    std::vector<double> x(n), w(n);
    for (int i = 0; i < n; ++i) {
        double xi = std::cos(PI * (i + 0.75) / (n + 0.5));  // Chebyshev initial guess
        double dp = 0.0;
        for (int it2 = 0; it2 < 100; ++it2) {
            double p0 = 1.0, p1 = xi;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2 * k - 1) * xi * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (xi * p1 - p0) / (xi * xi - 1.0);
            double dx = p1 / dp;
            xi -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        x[i] = xi;
        w[i] = 2.0 / ((1.0 - xi * xi) * dp * dp);
    }
    return cache.emplace(n, std::make_pair(std::move(x), std::move(w))).first->second;
}

double gl_integrate(const std::function<double(double)>& f, double a, double b, int n) {
    const auto& [x, w] = gauss_legendre(n);
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += w[i] * f(mid + half * x[i]);
    return s * half;
}

}  // namespace berg
