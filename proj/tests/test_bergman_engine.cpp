#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "berg/bergman_engine.hpp"

using namespace berg;

TEST_CASE("grid helper") {
    auto grid = annular_grid();
    CHECK(grid.size() == 40);
    double rmin = 1e9, rmax = 0.0;
    for (cplx z : grid) {
        rmin = std::min(rmin, std::abs(z));
        rmax = std::max(rmax, std::abs(z));
    }
    CHECK(rmin == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(rmax == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("balanced fixed point: round field reproduces the round metric") {
    auto fs = fubini_study();
    auto grid = annular_grid();
    for (int m : {4, 16, 64}) {
        auto field = metric_field(*fs, m, grid);
        for (size_t i = 0; i < grid.size(); ++i) {
            auto ref = fs->metric(grid[i]);
            CHECK(std::abs(field[i].value - ref.g) < 1e-10);
            CHECK(std::abs(field[i].gradient - ref.gz) < 1e-10);
            CHECK(std::abs(field[i].d2z - ref.gzz) < 1e-9);
            CHECK(std::abs(field[i].d2zzb - ref.gzzb) < 1e-9);
        }
    }
}

TEST_CASE("radial field is rotation invariant") {
    auto fl = flat_gaussian();
    auto a = metric_field(*fl, 32, {std::polar(0.3, 0.2)});
    auto b = metric_field(*fl, 32, {std::polar(0.3, 2.9)});
    CHECK(a[0].value == doctest::Approx(b[0].value).epsilon(1e-12));
    CHECK(std::abs(a[0].gradient) == doctest::Approx(std::abs(b[0].gradient)).epsilon(1e-12));
    CHECK(a[0].d2zzb == doctest::Approx(b[0].d2zzb).epsilon(1e-12));
}

TEST_CASE("direct and recentring paths agree away from the basepoint") {
    auto fl = flat_gaussian();
    const int m = 64;
    cplx z(0.21, -0.13);
    auto field = metric_field(*fl, m, {z});
    OrthonormalJets J = jets_at(*fl, m, z);
    CHECK(metric_at(J) == doctest::Approx(field[0].value).epsilon(1e-8));
    CHECK(std::abs(gradient_at(J) - field[0].gradient) < 1e-8);
}

TEST_CASE("derivatives match finite differences of the value field") {
    // the flat model is a poor vehicle here: its section sums telescope to a
    // constant metric, leaving only noise to difference; the round and pinch
    // metrics have honest gradients
    auto fs = fubini_study();
    PinchModel pinch(1);
    const double h = 1e-4;
    struct Probe {
        const MetricModel* model;
        int m;
    } probes[] = {{fs.get(), 32}, {&pinch, 12}};
    for (const auto& pr : probes) {
        for (cplx z : {cplx(0.3, 0.1), cplx(-0.2, 0.35)}) {
            std::vector<cplx> pts = {z,
                                     z + cplx(h, 0),  z - cplx(h, 0),
                                     z + cplx(0, h),  z - cplx(0, h),
                                     z + cplx(h, h),  z + cplx(h, -h),
                                     z + cplx(-h, h), z + cplx(-h, -h)};
            auto f = metric_field(*pr.model, pr.m, pts);
            double gx = (f[1].value - f[2].value) / (2 * h);
            double gy = (f[3].value - f[4].value) / (2 * h);
            double gxx = (f[1].value - 2 * f[0].value + f[2].value) / (h * h);
            double gyy = (f[3].value - 2 * f[0].value + f[4].value) / (h * h);
            double gxy =
                (f[5].value - f[6].value - f[7].value + f[8].value) / (4 * h * h);
            cplx fd_grad = cplx(gx, -gy) / 2.0;
            cplx fd_d2z = cplx(gxx - gyy, -2 * gxy) / 4.0;
            double fd_d2zzb = (gxx + gyy) / 4.0;
            double scale = std::abs(f[0].gradient);
            CHECK(std::abs(f[0].gradient - fd_grad) / scale < 1e-6);
            CHECK(std::abs(f[0].d2z - fd_d2z) < 1e-4 * std::abs(f[0].d2z));
            CHECK(std::abs(f[0].d2zzb - fd_d2zzb) < 1e-4 * std::abs(f[0].d2zzb));
        }
    }
}

TEST_CASE("gauge independence: diagonal phases drop out of the jet readouts") {
    auto sh = sharp_example();
    OrthonormalJets J = jets_at(*sh, 64);
    OrthonormalJets Jp = J;
    const double ph[4] = {0.7, -1.3, 2.1, 0.4};
    for (int j = 0; j <= 3; ++j)
        for (int a = 0; a <= 3; ++a) Jp.jets(j, a) *= std::polar(1.0, ph[j]);
    CHECK(metric_at(Jp) == doctest::Approx(metric_at(J)).epsilon(1e-14));
    CHECK(std::abs(gradient_at(Jp) - gradient_at(J)) <=
          1e-14 * std::max(1.0, std::abs(gradient_at(J))));
    auto [h2, hm] = hessian_at(J);
    auto [h2p, hmp] = hessian_at(Jp);
    CHECK(std::abs(h2p - h2) <= 1e-13 * std::max(1.0, std::abs(h2)));
    CHECK(hmp == doctest::Approx(hm).epsilon(1e-13));
}

TEST_CASE("basepoint normalized errors stay bounded on the perturbed model") {
    auto sh = sharp_example();
    // the sup over an annulus is a separate, cutoff-limited question; the
    // peak-point quantities are the clean ones
    double g0 = sh->metric(0.0).g;
    for (int m : {64, 128, 256, 512}) {
        OrthonormalJets J = jets_at(*sh, m);
        CHECK(m * std::abs(metric_at(J) - g0) < 1.0);
        CHECK(std::sqrt((double)m) * std::abs(gradient_at(J)) < 0.1);
    }
}

TEST_CASE("hessian growth allowances on the perturbed model") {
    auto sh = sharp_example();
    auto grid = annular_grid(3, 4, 0.1, 0.4);
    for (int m : {64, 128, 256}) {
        auto f = metric_field(*sh, m, grid);
        for (const auto& B : f) {
            CHECK(std::abs(B.d2z) / std::log((double)m) < 1.0);
            CHECK(std::abs(B.d2zzb) < 1.0);
        }
    }
}

TEST_CASE("rate report: round sweep sits at the floor and is flagged") {
    auto fs = fubini_study();
    auto rep = rate_report(*fs, {4, 8, 16, 32}, annular_grid());
    CHECK(!rep.slopes_valid);
    CHECK(std::isnan(rep.sup_slope));
    for (const auto& r : rep.rows) {
        CHECK(r.sup_err < 1e-9);
        CHECK(r.grad_err < 1e-9);
    }
}

TEST_CASE("rate report: perturbed sweep fits finite slopes") {
    auto sh = sharp_example();
    auto rep = rate_report(*sh, {32, 64, 128, 256}, annular_grid());
    CHECK(rep.slopes_valid);
    CHECK(std::isfinite(rep.sup_slope));
    CHECK(std::isfinite(rep.grad_slope));
    CHECK(rep.sup_slope < 0.0);
    CHECK(rep.rows.size() == 4);
    for (size_t i = 1; i < rep.rows.size(); ++i)
        CHECK(rep.rows[i].m > rep.rows[i - 1].m);
    std::ostringstream os;
    write_rate_csv(rep, os);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "m,sup_err,grad_err,c1alpha_mod,w2q_norm");
    int rows = 0;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == 4);
}

TEST_CASE("rate report guards") {
    auto fs = fubini_study();
    CHECK_THROWS_AS(rate_report(*fs, {4, 8, 16}, annular_grid()), Error);
    CHECK_THROWS_AS(rate_report(*fs, {4, 8, 16, 8}, annular_grid()), Error);
    CHECK_THROWS_AS(rate_report(*fs, {4, 8, 16, 32}, annular_grid(), 1.5), Error);
}

TEST_CASE("gradient modulus statistics") {
    auto fs = fubini_study();
    std::vector<cplx> pts;
    std::vector<cplx> grads;
    for (int i = 0; i < 20; ++i) {
        cplx z = std::polar(0.2 + 0.01 * i, 0.3 * i);
        pts.push_back(z);
        grads.push_back(fs->metric(z).gz);
    }
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i + 1 < 20; ++i) pairs.emplace_back(i, i + 1);
    double sup = grad_modulus(pts, grads, pairs);
    CHECK(std::isfinite(sup));
    CHECK(sup > 0.0);

    // a linear field has constant slope, so the log factor sends it to zero
    auto lin_sup = [&](double h) {
        std::vector<cplx> p = {cplx(0.1, 0.0), cplx(0.1 + h, 0.0)};
        std::vector<cplx> g = {3.0 * p[0], 3.0 * p[1]};
        return grad_modulus(p, g, {{0, 1}});
    };
    CHECK(lin_sup(1e-6) < lin_sup(1e-3));
    CHECK(lin_sup(1e-8) < 0.3);

    CHECK_THROWS_AS(grad_modulus(pts, grads, {{0, 0}}), Error);
}
