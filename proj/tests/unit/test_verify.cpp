#include <cmath>
#include <iostream>

#include "doctest.h"
#include "renyi/errors.hpp"
#include "renyi/verify.hpp"

using namespace renyi;

namespace {

void print_failures(const SuiteReport& rep) {
    for (const auto& p : rep.properties)
        if (!p.passed())
            std::cerr << p.name << ": " << p.failed << "/" << p.instances << " failed, worst margin " << p.worst_margin
                      << " at " << p.worst_index << "\n"
                      << (p.failures.empty() ? std::string() : p.failures.front().instance.dump().substr(0, 2000)) << "\n";
}

SamplingProtocol two_by_two(double gamma) {
    SamplingProtocol p;
    p.gamma = gamma;
    p.outcomes = 2;
    p.settings = 2;
    p.score_bits = 1;
    p.p_gen = {1.0, 0.0};
    p.p_test = {0.5, 0.5};
    p.score = {1, 0, 0, 1};
    return p;
}

ClassicalAttack deterministic_attack() {
    ClassicalAttack at;
    at.memory = 1;
    at.initial = {1.0};
    at.response = {1.0, 0.0, 0.0, 1.0};
    at.update = {0, 0, 0, 0};
    return at;
}

}  // namespace

TEST_CASE("default suite passes on a reduced instance count") {
    SuiteConfig cfg;
    cfg.seed = 7;
    cfg.count = 12;
    const auto rep = run_property_suite(cfg);
    print_failures(rep);
    CHECK(rep.passed());
    CHECK(rep.properties.size() == property_names().size());
    for (const auto& name : property_names()) CHECK_MESSAGE(rep.find(name) != nullptr, name);
}

TEST_CASE("an entropy reported in nats is caught with a reproducer") {
    SuiteConfig cfg;
    cfg.count = 20;
    cfg.only = {"ordering"};
    cfg.fault = Fault::OffByBase;
    const auto rep = check_ordering(cfg);
    const auto* p = rep.find("ordering");
    REQUIRE(p != nullptr);
    CHECK_FALSE(p->passed());
    REQUIRE_FALSE(p->failures.empty());
    CHECK(p->failures.front().instance.contains("state"));
    const auto state = cq_from_json(p->failures.front().instance.at("state"));
    CHECK(state.outcomes() > 0);
}

TEST_CASE("reports are deterministic in the seed and the thread count") {
    SuiteConfig cfg;
    cfg.seed = 11;
    cfg.count = 8;
    cfg.only = {"ordering", "partial", "two_rounds"};
    cfg.threads = 1;
    const auto a = run_property_suite(cfg);
    cfg.threads = 4;
    const auto b = run_property_suite(cfg);
    REQUIRE(a.properties.size() == b.properties.size());
    for (std::size_t i = 0; i < a.properties.size(); ++i) {
        CHECK(a.properties[i].seed == b.properties[i].seed);
        CHECK(a.properties[i].worst_margin == b.properties[i].worst_margin);
        CHECK(a.properties[i].worst_index == b.properties[i].worst_index);
    }
    cfg.seed = 12;
    const auto c = run_property_suite(cfg);
    CHECK(c.properties.front().seed != a.properties.front().seed);
}

TEST_CASE("suite configuration") {
    SuiteConfig cfg;
    cfg.counts["partial"] = 5;
    cfg.counts["partial.isometry"] = 2;
    CHECK(cfg.count_for("partial.isometry") == 2);
    CHECK(cfg.count_for("partial.consistency") == 5);
    CHECK(cfg.count_for("ordering") == cfg.count);
    cfg.only = {"fweighted"};
    CHECK(cfg.selected("fweighted.mixing"));
    CHECK_FALSE(cfg.selected("ordering"));
    cfg.alphas = {0.5};
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg.alphas = {2.0};
    cfg.count = 0;
    CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("two rounds with an unconstrained event") {
    const auto proto = two_by_two(0.3);
    const auto at = deterministic_attack();
    const auto cs = ConstraintSet::full(proto.score_alphabet());
    const auto r = simulate_two_rounds(proto, at, cs, 2.0);
    CHECK(r.p_event == doctest::Approx(1.0));
    CHECK(r.bound == doctest::Approx(2.0 * r.h_round));
    CHECK(r.holds);
    // a deterministic device leaves nothing unknown
    CHECK(std::abs(r.h_round) < 1e-9);
    CHECK(std::abs(r.lhs_exact) < 1e-9);
}

TEST_CASE("two rounds with an unreachable event") {
    const auto proto = two_by_two(0.3);
    auto at = deterministic_attack();
    // the device always loses the test
    at.response = {0.0, 1.0, 1.0, 0.0};
    auto cs = ConstraintSet::full(proto.score_alphabet());
    cs.at_least(1, 0.5);
    CHECK_THROWS_WITH_AS(simulate_two_rounds(proto, at, cs, 2.0), doctest::Contains("probability zero"), Error);
}

TEST_CASE("memory infimum of a uniform device") {
    const auto proto = two_by_two(0.2);
    ClassicalAttack at = deterministic_attack();
    at.response = {0.5, 0.5, 0.5, 0.5};
    const auto m = memory_infimum(proto, at, ConstraintSet::full(proto.score_alphabet()), 1.5);
    CHECK(m.h_gen == doctest::Approx(1.0));
    CHECK(m.p_c[proto.bottom()] == doctest::Approx(0.8));
    CHECK(m.p_c[0] == doctest::Approx(0.1));
    CHECK(m.p_c[1] == doctest::Approx(0.1));
    // unconstrained tilt: -1/(alpha-1) log(sum_c p(c) 2^{-(alpha-1) h [c = bottom]})
    CHECK(m.value == doctest::Approx(-2.0 * std::log2(0.8 / std::sqrt(2.0) + 0.2)).epsilon(1e-9));
}

TEST_CASE("attack validation") {
    const auto proto = two_by_two(0.5);
    auto at = deterministic_attack();
    at.update = {0, 0, 0, 3};
    CHECK_THROWS_AS(at.validate(proto), Error);
    at = deterministic_attack();
    at.response = {0.5, 0.6, 0.0, 1.0};
    CHECK_THROWS_AS(at.validate(proto), Error);
}
