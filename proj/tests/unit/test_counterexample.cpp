#include <cmath>
#include <cstdio>
#include <string>

#include "doctest.h"
#include "renyi/counterexample.hpp"

using namespace renyi;

namespace {

std::string five_dp(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.5f", x);
    return buf;
}

}  // namespace

TEST_CASE("instance distributions") {
    const auto& c = counterexample_instance();
    CHECK(c.p_a1_given_b1[1][0].value() == 0.0);
    CHECK(c.p_a2[0][1][0].value() == 1.0);
    CHECK(c.p_a2[1][1][1].value() == 0.5);
    double s = 0;
    for (double x : ce_two_rounds().p) s += x;
    CHECK(s == doctest::Approx(1.0));
}

TEST_CASE("golden values at alpha = 1.5 to five places") {
    const auto r = ce_report(1.5);
    CHECK(five_dp(r.lhs) == "0.82057");
    CHECK(five_dp(r.first_term) == "0.35295");
    CHECK(five_dp(r.inf_up) == "0.47118");
    CHECK(five_dp(r.rhs) == "0.82413");
    CHECK(r.violated);
    CHECK(r.rhs - r.lhs == doctest::Approx(0.00356).epsilon(2e-5 / 0.00356));
    CHECK(r.saturation_gap < 1e-6);
}

TEST_CASE("closed forms agree with the generic classical entropies") {
    for (double a : {1.01, 1.5, 2.0, 3.0}) {
        CHECK(ce_lhs(a) == doctest::Approx(h_classical(ce_two_rounds(), a, Variant::Up)).epsilon(1e-12));
        CHECK(ce_first_term(a) == doctest::Approx(h_classical(ce_first_round(), a, Variant::Up)).epsilon(1e-12));
    }
}

TEST_CASE("deterministic branch of the first round contributes exactly one half") {
    // b1 = 1 is a point mass, so its inner norm is 1 and it enters with weight 1/2.
    const auto p = ce_first_round();
    CHECK(p(1, 1) == 0.5);
    CHECK(p(0, 1) == 0.0);
}

TEST_CASE("analytic and vertex infimum agree") {
    for (double a : {1.1, 1.5, 2.0, 3.0, 5.0}) {
        CHECK(std::abs(ce_inf_term(a, Variant::Up) - ce_inf_term_vertices(a, Variant::Up)) < 1e-10);
        CHECK(std::abs(ce_inf_term(a, Variant::Down) - ce_inf_term_vertices(a, Variant::Down)) < 1e-10);
        CHECK(ce_inf_term(a, Variant::Up) >= ce_inf_term(a, Variant::Down) - 1e-12);
    }
}

TEST_CASE("input-independent first round: infimum over inputs is the first term") {
    // Round one ignores its input, so every deterministic input gives the same joint p(a1, b1).
    for (double a : {1.2, 1.5, 2.5}) {
        double worst = 1e9;
        for (int e = 0; e < 2; ++e) worst = std::min(worst, h_classical(ce_first_round(), a, Variant::Up));
        CHECK(worst == doctest::Approx(ce_first_term(a)).epsilon(1e-12));
    }
}

TEST_CASE("near alpha = 1 the left side approaches the Shannon conditional entropy") {
    const auto p = ce_two_rounds();
    double h = 0;
    for (std::size_t b = 0; b < p.nb; ++b) {
        double pb = 0;
        for (std::size_t a = 0; a < p.na; ++a) pb += p(a, b);
        for (std::size_t a = 0; a < p.na; ++a)
            if (p(a, b) > 0) h -= p(a, b) * std::log2(p(a, b) / pb);
    }
    CHECK(ce_lhs(1.0 + 1e-7) == doctest::Approx(h).epsilon(1e-5));
}

TEST_CASE("report and scan stay ordered") {
    const auto r = ce_report(1.01);
    CHECK(r.h_down_lhs <= r.lhs + 1e-12);
    CHECK(r.h_down_first <= r.first_term + 1e-12);
    const auto scan = ce_scan(1.1, 3.0, 5);
    CHECK(scan.size() == 5);
    CHECK(scan.back().alpha == doctest::Approx(3.0));
}
