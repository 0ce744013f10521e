#include <catch2/catch_amalgamated.hpp>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <vector>

#include "hedgehog/model.hpp"
#include "hedgehog/series.hpp"

using namespace hedgehog;
using mp = boost::multiprecision::cpp_bin_float_50;

namespace {

// Residual of the truncated core expansion in the full interior equation
//   r^2 h'' + 2 r h' - 6 h = r^2 (-h + quad h^2 + cub h^3),
// evaluated in 50-digit arithmetic so the tiny defect of a good truncation
// is not swamped by double round-off. The polynomial itself (double
// coefficients) is the object under test.
mp series_ode_residual(const SeriesExpansion& s, double r_in) {
    const mp t = s.t;
    const mp sq = sqrt(mp(9) + 8 * t);
    const mp h_plus = (3 + sq) / 4;
    const mp cub = 1 + 3 * h_plus / t;
    const mp quad = -3 * h_plus / t;

    const mp r = r_in;
    mp h = 0, dh = 0, d2h = 0;
    for (int k = static_cast<int>(s.coeffs.size()) - 1; k >= 0; --k) {
        d2h = d2h * r + 2 * dh;
        dh = dh * r + h;
        h = h * r + s.coeffs[k];
    }
    // Horner pass above gives h; dh and d2h accumulate h' and h''/1 via the
    // derivative recurrences dh_next = dh*r + h_prev, d2h_next = d2h*r + 2*dh_prev.
    const mp g = -h + quad * h * h + cub * h * h * h;
    return r * r * d2h + 2 * r * dh - 6 * h - r * r * g;
}

}  // namespace

TEST_CASE("second coefficient of the recurrence", "[series]") {
    // a4 = -a2/14: the quadratic and cubic convolutions vanish at this order
    const SeriesExpansion unit = series_coefficients(1.0, 200.0, 12);
    REQUIRE(unit.coeffs[4] == -1.0 / 14.0);  // exact in floating point at a2 = 1
    for (double a2 : {0.132, 3.7, 1e-4}) {
        for (double t : {1.5, 200.0}) {
            const SeriesExpansion s = series_coefficients(a2, t, 8);
            REQUIRE(s.coeffs[4] / s.coeffs[2] == Catch::Approx(-1.0 / 14.0).margin(1e-16));
        }
    }
}

TEST_CASE("odd coefficients vanish through order 11", "[series]") {
    const SeriesExpansion s = series_coefficients(0.37, 50.0, 12);
    for (int k : {1, 3, 5, 7, 9, 11}) REQUIRE(s.coeffs[k] == 0.0);
    REQUIRE(s.coeffs[0] == 0.0);
    REQUIRE(s.coeffs[2] == 0.37);
}

TEST_CASE("third coefficient against its closed form", "[series]") {
    // hand expansion of the order-4 balance: a6 = (a2/14 - 3 (h_plus/t) a2^2)/36
    for (double t : {5.0, 200.0}) {
        const ModelParams m = derive_model_params(t);
        for (double a2 : {0.1, 1.0}) {
            const SeriesExpansion s = series_coefficients(a2, t, 8);
            const double expect = (a2 / 14.0 - 3.0 * (m.h_plus / t) * a2 * a2) / 36.0;
            REQUIRE(s.coeffs[6] == Catch::Approx(expect).epsilon(1e-14));
        }
    }
}

TEST_CASE("truncated expansion satisfies the interior equation", "[series]") {
    // the first unmatched order is r^(N+2), so the high-precision residual
    // must be tiny near the origin and scale like r^14 for an order-12 fit
    // the residual ceiling at r = 0.4 tracks the size of the coefficients,
    // which grow with the launch amplitude
    const std::vector<std::tuple<double, double, double>> cases{
        {0.132, 200.0, 1e-8}, {1.0, 5.0, 1e-5}};
    for (auto [a2, t, cap04] : cases) {
        const SeriesExpansion s = series_coefficients(a2, t, 12);
        const double res01 = std::abs(static_cast<double>(series_ode_residual(s, 0.1)));
        const double res04 = std::abs(static_cast<double>(series_ode_residual(s, 0.4)));
        REQUIRE(res01 < 1e-14);
        REQUIRE(res04 < cap04);
    }
    // the first unmatched order for an order-N fit is r^(N+2); for N = 8 the
    // leading defect is big enough to sit clear of coefficient round-off, so
    // doubling the radius scales the residual by 2^10 almost exactly
    const SeriesExpansion s8 = series_coefficients(0.132, 200.0, 8);
    const double lo = std::abs(static_cast<double>(series_ode_residual(s8, 0.2)));
    const double hi = std::abs(static_cast<double>(series_ode_residual(s8, 0.4)));
    const double ratio = hi / lo;
    const double expect = std::pow(2.0, 10);
    REQUIRE(ratio > expect * 0.9);
    REQUIRE(ratio < expect * 1.1);

    // raising the truncation order collapses the defect by many decades
    const SeriesExpansion s12 = series_coefficients(0.132, 200.0, 12);
    const double hi12 = std::abs(static_cast<double>(series_ode_residual(s12, 0.4)));
    REQUIRE(hi / hi12 > 1e5);
}

TEST_CASE("zero amplitude gives the trivial expansion", "[series]") {
    const SeriesExpansion s = series_coefficients(0.0, 200.0, 10);
    for (double c : s.coeffs) REQUIRE(c == 0.0);
    const LaunchState ls = launch_state(s, 0.5);
    REQUIRE(ls.h == 0.0);
    REQUIRE(ls.dh == 0.0);
}

TEST_CASE("launch state evaluation and truncation sentinel", "[series]") {
    const SeriesExpansion s = series_coefficients(0.1, 200.0, 8);
    const LaunchState tiny = launch_state(s, 1e-3);
    REQUIRE(tiny.h == Catch::Approx(0.1e-6).epsilon(1e-6));
    REQUIRE(tiny.dh == Catch::Approx(0.2e-3).epsilon(1e-6));
    REQUIRE_FALSE(tiny.truncation_warn);

    // far outside the core the truncated series is untrustworthy and says so
    const SeriesExpansion low = series_coefficients(0.5, 200.0, 4);
    const LaunchState far = launch_state(low, 1.5);
    REQUIRE(far.truncation_warn);
    REQUIRE(far.truncation_estimate > 1e-6);
}

TEST_CASE("interior Taylor expansion matches the equation locally", "[series]") {
    const ModelParams m = derive_model_params(200.0);
    const double r_i = 2.0, h = 0.5, dh = 0.1;
    const std::vector<double> c = local_taylor(r_i, h, dh, m);
    REQUIRE(c[0] == h);
    REQUIRE(c[1] == dh);
    const auto [v, d2h] = ode_rhs(r_i, h, dh, m);
    REQUIRE(2.0 * c[2] == Catch::Approx(d2h).epsilon(1e-13));

    // re-expanding downstream and evaluating back agrees with the original
    // to within the truncation of both expansions
    const auto [h1, dh1] = eval_taylor(c, 0.1);
    const std::vector<double> c2 = local_taylor(r_i + 0.1, h1, dh1, m);
    const auto [ha, dha] = eval_taylor(c, 0.05);
    const auto [hb, dhb] = eval_taylor(c2, -0.05);
    REQUIRE(ha == Catch::Approx(hb).margin(1e-7));
    REQUIRE(dha == Catch::Approx(dhb).margin(1e-6));
}

TEST_CASE("expansion input validation", "[series]") {
    REQUIRE_THROWS_AS(series_coefficients(0.1, 200.0, 3), std::invalid_argument);
    REQUIRE_THROWS_AS(series_coefficients(0.1, 200.0, 2), std::invalid_argument);
    REQUIRE_THROWS_AS(series_coefficients(-0.1, 200.0, 8), std::invalid_argument);
    REQUIRE_THROWS_AS(series_coefficients(0.1, 0.5, 8), std::domain_error);
    const SeriesExpansion s = series_coefficients(0.1, 200.0, 8);
    REQUIRE_THROWS_AS(launch_state(s, 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(launch_state(s, -1.0), std::invalid_argument);
    const ModelParams m = derive_model_params(200.0);
    REQUIRE_THROWS_AS(local_taylor(0.0, 0.1, 0.1, m), std::invalid_argument);
}
