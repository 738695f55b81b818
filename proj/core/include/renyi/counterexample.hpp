#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "renyi/entropy.hpp"

namespace renyi {

struct Fraction {
    std::int64_t num = 0;
    std::int64_t den = 1;
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

// Two-round classical instance: round one prepares (A1, B1) and a memory R1 = A1,
// round two samples B2 uniformly and outputs A2 uniform when R1 xor B2 = 0, else A2 = 0.
struct CounterexampleInstance {
    std::array<Fraction, 2> p_b1;
    std::array<std::array<Fraction, 2>, 2> p_a1_given_b1;      // [b1][a1]
    std::array<Fraction, 2> p_b2;
    std::array<std::array<std::array<Fraction, 2>, 2>, 2> p_a2;  // [r1][b2][a2]
};

const CounterexampleInstance& counterexample_instance();

// p(a1, b1) with A = A1, B = B1.
JointDistribution ce_first_round();
// p(a1 a2, b1 b2) with A = (A1, A2), B = (B1, B2), digits ordered (round 1, round 2).
JointDistribution ce_two_rounds();

double ce_lhs(double alpha);
double ce_first_term(double alpha);
double ce_inf_term(double alpha, Variant variant);
// Same infimum from enumerating deterministic memory inputs.
double ce_inf_term_vertices(double alpha, Variant variant);

struct CounterexampleReport {
    double alpha = 0;
    double lhs = 0;
    double first_term = 0;
    double inf_up = 0;
    double rhs = 0;
    bool violated = false;
    double h_down_lhs = 0;
    double h_down_first = 0;
    double h_down_inf = 0;
    double h_down_rhs = 0;
    double saturation_gap = 0;
};

CounterexampleReport ce_report(double alpha);
std::vector<CounterexampleReport> ce_scan(double from, double to, int points);

}  // namespace renyi
