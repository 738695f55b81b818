#include <chrono>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "renyi/eatrate.hpp"
#include "renyi/errors.hpp"
#include "support/oracles.hpp"

using namespace renyi;

namespace {

struct ConstrainedCase {
    Distribution p;
    double h;
    double alpha;
    ConstraintSet cs;
};

// One or two random rows, each violated by p and satisfied strictly by a random point q.
ConstrainedCase constrained_case(std::uint64_t seed, std::size_t index) {
    auto rng = Rng::derive(seed, index);
    ConstrainedCase c;
    const std::size_t n = 3 + rng.index(2);
    c.p = random_distribution(n, rng);
    for (auto& x : c.p) x = 0.02 + 0.9 * x;
    double s = 0;
    for (double x : c.p) s += x;
    for (auto& x : c.p) x /= s;
    const auto q = random_distribution(n, rng);
    c.h = rng.uniform(0.0, 1.5);
    c.alpha = 1.1 + 1.9 * rng.uniform();
    c.cs = ConstraintSet::full(n);
    const std::size_t rows = 1 + rng.index(2);
    for (std::size_t k = 0; k < rows; ++k) {
        std::vector<double> g(n);
        for (auto& x : g) x = rng.uniform(-1.0, 1.0);
        double gp = 0, gq = 0;
        for (std::size_t i = 0; i < n; ++i) {
            gp += g[i] * c.p[i];
            gq += g[i] * q[i];
        }
        if (gq < gp) {
            for (auto& x : g) x = -x;
            gp = -gp;
            gq = -gq;
        }
        c.cs.add(g, gp + 0.8 * (gq - gp));
    }
    return c;
}

}  // namespace

TEST_CASE("constraint sets") {
    auto cs = ConstraintSet::full(3);
    cs.at_least(1, 0.4).at_most(2, 0.5);
    CHECK(cs.size() == 2);
    CHECK(cs.violation({0.3, 0.4, 0.3}) == 0.0);
    CHECK(cs.violation({0.5, 0.2, 0.3}) == doctest::Approx(0.2));
    CHECK(cs.violation({0.0, 0.4, 0.6}) == doctest::Approx(0.1));
    CHECK_THROWS_AS(cs.add({1.0, 2.0}, 0.0), Error);
    auto bad = ConstraintSet::full(2);
    bad.at_least(0, 0.7).at_least(1, 0.7);
    CHECK_THROWS_AS(check_nonempty(bad), Error);
    CHECK_NOTHROW(check_nonempty(cs));
}

TEST_CASE("inner problem on the full simplex") {
    SUBCASE("no generation entropy returns p itself") {
        const Distribution p{0.2, 0.3, 0.5};
        const auto sol = inner_inf_v(p, 0.0, ConstraintSet::full(3), 1.5, 2);
        CHECK(std::abs(sol.value) < 1e-14);
        for (std::size_t i = 0; i < 3; ++i) CHECK(sol.v_star[i] == doctest::Approx(p[i]));
    }
    SUBCASE("closed form against the grid oracle") {
        for (int t = 0; t < 10; ++t) {
            auto rng = Rng::derive(5, t);
            const auto p = random_distribution(3, rng);
            const double h = rng.uniform(0.1, 1.0), alpha = 1.1 + rng.uniform();
            const auto sol = inner_inf_v(p, h, ConstraintSet::full(3), alpha, 2);
            double z = 0;
            for (std::size_t c = 0; c < 3; ++c) z += p[c] * std::exp2(-(alpha - 1.0) * (c == 2 ? h : 0.0));
            const double closed = -std::log2(z) / (alpha - 1.0);
            CHECK(std::abs(sol.value - closed) < 1e-12);
            CHECK(std::abs(oracle::inner_grid(p, h, ConstraintSet::full(3), alpha, 2) - closed) < 1e-6);
        }
    }
}

TEST_CASE("binding constraints: certificate and Frank-Wolfe bracket") {
    for (std::size_t i = 0; i < 15; ++i) {
        const auto c = constrained_case(17, i);
        const std::size_t bottom = c.p.size() - 1;
        const auto sol = inner_inf_v(c.p, c.h, c.cs, c.alpha, bottom);
        CHECK(sol.kkt_residual < 1e-9);
        CHECK(c.cs.violation(sol.v_star) < 1e-9);
        for (double l : sol.lambda) CHECK(l >= 0.0);
        CHECK(std::abs(sol.value - sol.dual_value) < 1e-9);
        const auto [upper, lower] = oracle::inner_frank_wolfe(c.p, c.h, c.cs, c.alpha, bottom);
        CHECK(upper - lower < 1e-6);
        CHECK(sol.value >= lower - 1e-9);
        CHECK(sol.value <= upper + 1e-9);
    }
}

TEST_CASE("infeasible constraint sets are reported") {
    auto cs = ConstraintSet::full(3);
    cs.at_least(0, 0.5);
    // p has no mass on letter 0
    CHECK_THROWS_AS(inner_inf_v({0.0, 0.5, 0.5}, 0.3, cs, 2.0, 2), Error);
}

TEST_CASE("finite size bound") {
    CHECK(finite_size_bound(1000, 0.7, 1.0, 1.5) == doctest::Approx(700.0));
    const double pen = finite_size_bound(10, 0.5, 0.25, 2.0) - 5.0;
    CHECK(pen == doctest::Approx(-4.0));
    CHECK(finite_size_bound(20, 0.5, 0.25, 2.0) - finite_size_bound(10, 0.5, 0.25, 2.0) == doctest::Approx(5.0));
    CHECK_THROWS_AS(finite_size_bound(10, 0.5, 0.0, 2.0), Error);
    CHECK_THROWS_AS(finite_size_bound(10, 0.5, 1.5, 2.0), Error);
    const auto fs = finite_size(1e6, 0.5, 0.99, 1.5, 1e-10);
    CHECK(fs.key_length == key_length(fs.total_bits, 1e-10, 1.5));
}

TEST_CASE("generation entropy") {
    SUBCASE("point-mass settings give the down entropy") {
        for (int t = 0; t < 10; ++t) {
            auto rng = Rng::derive(8, t);
            const auto s = random_strategy(StateModel::Mixed, 2, 2, rng);
            Distribution pb(4, 0.0);
            pb[rng.index(4)] = 1.0;
            for (double a : {1.3, 2.0}) {
                const double part = gen_round_entropy(s, pb, a);
                const double down = gen_round_entropy(s, pb, a, {OutputSelection::Alice, GenEntropy::Down});
                CHECK(std::abs(part - down) < 1e-10);
            }
        }
    }
    SUBCASE("ordering against the down entropy") {
        for (int t = 0; t < 10; ++t) {
            auto rng = Rng::derive(9, t);
            const auto s = random_strategy(StateModel::Mixed, 2, 2, rng);
            const auto pb = random_distribution(4, rng);
            CHECK(gen_round_entropy(s, pb, 1.7) >= gen_round_entropy(s, pb, 1.7, {OutputSelection::Alice, GenEntropy::Down}) - 1e-10);
        }
    }
    SUBCASE("pure maximal violation gives one bit") {
        const auto s = tsirelson_strategy();
        CHECK(gen_round_entropy(s, {0.25, 0.25, 0.25, 0.25}, 2.0) == doctest::Approx(1.0).epsilon(1e-9));
        const auto cq = strategy_to_cq(s, {0.25, 0.25, 0.25, 0.25});
        CHECK(gen_round_entropy(s, {0.25, 0.25, 0.25, 0.25}, 2.0) == doctest::Approx(h_up(cq, {"A"}, {"B"}, 2.0)));
    }
}

TEST_CASE("single-round value") {
    const auto honest = tsirelson_strategy();
    SUBCASE("gamma = 0 leaves only the generation term") {
        const auto proto = chsh_protocol(0.0);
        const auto ev = single_round_h(honest, proto, ConstraintSet::full(3), 1.5);
        CHECK(ev.p_c[2] == doctest::Approx(1.0));
        CHECK(ev.value == doctest::Approx(ev.h_gen).epsilon(1e-12));
    }
    SUBCASE("threshold at the honest rate") {
        const double gamma = 0.05;
        const auto proto = chsh_protocol(gamma);
        const double w = std::pow(std::cos(std::numbers::pi / 8.0), 2);
        auto cs = ConstraintSet::full(3);
        cs.at_least(1, gamma * w);
        const auto ev = single_round_h(honest, proto, cs, 1.01);
        CHECK(ev.value <= (1.0 - gamma) * ev.h_gen + 1e-9);
        CHECK(ev.value > (1.0 - gamma) * ev.h_gen - 0.01);
    }
    SUBCASE("partial entropy is never worse than the down entropy") {
        for (int t = 0; t < 5; ++t) {
            auto rng = Rng::derive(10, t);
            const auto s = random_strategy(StateModel::Mixed, 2, 2, rng);
            const auto proto = chsh_protocol(0.2);
            auto cs = ConstraintSet::full(3);
            cs.at_least(1, 0.1);
            const double part = single_round_h(s, proto, cs, 1.5).value;
            const double down = single_round_h(s, proto, cs, 1.5, {OutputSelection::Alice, GenEntropy::Down}).value;
            CHECK(part >= down - 1e-10);
        }
    }
    SUBCASE("enlarging the constraint set never increases the value") {
        for (int t = 0; t < 5; ++t) {
            auto rng = Rng::derive(11, t);
            const auto s = random_strategy(StateModel::Mixed, 2, 2, rng);
            const auto proto = chsh_protocol(0.3);
            auto tight = ConstraintSet::full(3);
            tight.at_least(1, 0.25);
            auto loose = ConstraintSet::full(3);
            loose.at_least(1, 0.15);
            CHECK(single_round_h(s, proto, loose, 2.0).value <= single_round_h(s, proto, tight, 2.0).value + 1e-12);
        }
    }
}

TEST_CASE("strategy search") {
    const auto proto = chsh_protocol(0.1);
    auto cs = ConstraintSet::full(3);
    cs.at_least(1, 0.1 * 0.84);
    SearchOptions opts;
    opts.restarts = 2;
    opts.max_evaluations = 400;
    opts.seed = 3;
    const auto a = optimize_strategy(proto, cs, 2.0, opts);
    const auto b = optimize_strategy(proto, cs, 2.0, opts);
    CHECK(a.h_alpha == b.h_alpha);
    opts.restarts = 4;
    const auto c = optimize_strategy(proto, cs, 2.0, opts);
    CHECK(c.h_alpha <= a.h_alpha + 1e-12);
    opts.seeds = {tsirelson_strategy()};
    const auto d = optimize_strategy(proto, cs, 2.0, opts);
    const double honest = single_round_h(tsirelson_strategy(), proto, cs, 2.0).value;
    CHECK(d.h_alpha <= honest + 1e-12);
    CHECK(d.kkt_residual < 1e-9);
}

TEST_CASE("Nelder-Mead on a quadratic") {
    const auto res = nelder_mead(
        [](const std::vector<double>& x) { return (x[0] - 1) * (x[0] - 1) + 3 * (x[1] + 2) * (x[1] + 2); }, {0.0, 0.0},
        0.5, 2000, 1e-10);
    CHECK(res.x[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(res.x[1] == doctest::Approx(-2.0).epsilon(1e-6));
}

TEST_CASE("entropy comparison") {
    SUBCASE("point-mass settings close the gap") {
        const auto rows = compare_entropies(tsirelson_strategy(), {1.0, 0.0, 0.0, 0.0}, {1.5, 2.0});
        for (const auto& r : rows) CHECK(r.gap == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("symmetric strategy has equal per-setting entropies") {
        const auto rows = compare_entropies(tsirelson_strategy(), {0.25, 0.25, 0.25, 0.25}, {1.5, 2.0, 3.0});
        for (const auto& r : rows) {
            CHECK(std::abs(r.gap) < 1e-9);
            CHECK(r.asymmetry < 1e-9);
        }
    }
}

TEST_CASE("Bell optimisation reaches the Tsirelson bound") {
    const auto s = best_bell_strategy(chsh_functional(), 3, 1);
    CHECK(bell_value(s, chsh_functional()) == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-6));
}

TEST_CASE("limits toward alpha = 1") {
    const Distribution p{0.1, 0.2, 0.7};
    const double lim = richardson_alpha_limit([&](double a) { return renyi_entropy(p, a); });
    CHECK(lim == doctest::Approx(von_neumann(p)).epsilon(1e-9));
    const auto tab = asymptotic_check(tsirelson_strategy(), {{1.5, 0.1}, {1.1, 0.01}, {1.01, 1e-3}, {1.001, 1e-4}});
    CHECK(tab.von_neumann_target == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(tab.h_partial_limit == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(tab.rows.back().value >= 0.98);
    CHECK(tab.rows.back().value <= 1.0);
    CHECK(tab.rows.back().kl_term < tab.rows.front().kl_term + 1e-12);
    CHECK(tab.monotone);
}
