#include "renyi/counterexample.hpp"

#include <algorithm>
#include <cmath>

#include "renyi/errors.hpp"

namespace renyi {

const CounterexampleInstance& counterexample_instance() {
    static const CounterexampleInstance inst = [] {
        CounterexampleInstance c;
        c.p_b1 = {Fraction{1, 2}, Fraction{1, 2}};
        c.p_a1_given_b1 = {{{Fraction{3, 4}, Fraction{1, 4}}, {Fraction{0, 1}, Fraction{1, 1}}}};
        c.p_b2 = {Fraction{1, 2}, Fraction{1, 2}};
        for (int r = 0; r < 2; ++r)
            for (int b = 0; b < 2; ++b) {
                if ((r ^ b) == 0)
                    c.p_a2[r][b] = {Fraction{1, 2}, Fraction{1, 2}};
                else
                    c.p_a2[r][b] = {Fraction{1, 1}, Fraction{0, 1}};
            }
        return c;
    }();
    return inst;
}

JointDistribution ce_first_round() {
    const auto& c = counterexample_instance();
    JointDistribution p{2, 2, std::vector<double>(4, 0.0)};
    for (int b1 = 0; b1 < 2; ++b1)
        for (int a1 = 0; a1 < 2; ++a1) p.p[a1 * 2 + b1] = c.p_b1[b1].value() * c.p_a1_given_b1[b1][a1].value();
    return p;
}

JointDistribution ce_two_rounds() {
    const auto& c = counterexample_instance();
    JointDistribution p{4, 4, std::vector<double>(16, 0.0)};
    for (int b1 = 0; b1 < 2; ++b1)
        for (int a1 = 0; a1 < 2; ++a1)
            for (int b2 = 0; b2 < 2; ++b2)
                for (int a2 = 0; a2 < 2; ++a2) {
                    const int r1 = a1;
                    const double w = c.p_b1[b1].value() * c.p_a1_given_b1[b1][a1].value() * c.p_b2[b2].value() *
                                     c.p_a2[r1][b2][a2].value();
                    p.p[(a1 * 2 + a2) * 4 + (b1 * 2 + b2)] = w;
                }
    return p;
}

double ce_lhs(double alpha) {
    check_alpha(alpha);
    const auto p = ce_two_rounds();
    // sum_b p(b) (sum_a p(a|b)^alpha)^{1/alpha} = sum_b (sum_a p(a,b)^alpha)^{1/alpha}
    double s = 0.0;
    for (std::size_t b = 0; b < p.nb; ++b) {
        double inner = 0.0;
        for (std::size_t a = 0; a < p.na; ++a)
            if (p(a, b) > 0.0) inner += std::pow(p(a, b), alpha);
        s += std::pow(inner, 1.0 / alpha);
    }
    return alpha / (1.0 - alpha) * std::log2(s);
}

double ce_first_term(double alpha) {
    check_alpha(alpha);
    const double inner = std::pow(std::pow(0.75, alpha) + std::pow(0.25, alpha), 1.0 / alpha);
    return alpha / (1.0 - alpha) * std::log2(0.5 * inner + 0.5);
}

double ce_inf_term(double alpha, Variant variant) {
    check_alpha(alpha);
    const double uniform = 2.0 * std::pow(0.5, alpha);
    if (variant == Variant::Up) return alpha / (1.0 - alpha) * std::log2(0.5 * std::pow(uniform, 1.0 / alpha) + 0.5);
    return std::log2(0.5 * uniform + 0.5) / (1.0 - alpha);
}

double ce_inf_term_vertices(double alpha, Variant variant) {
    check_alpha(alpha);
    const auto& c = counterexample_instance();
    // The objective is affine in the input distribution, so the extremum sits on a deterministic input.
    double best = 0.0;
    for (int e = 0; e < 2; ++e) {
        double s = 0.0;
        for (int b2 = 0; b2 < 2; ++b2) {
            double inner = 0.0;
            for (int a2 = 0; a2 < 2; ++a2) {
                const double x = c.p_a2[e][b2][a2].value();
                if (x > 0.0) inner += std::pow(x, alpha);
            }
            s += c.p_b2[b2].value() * (variant == Variant::Up ? std::pow(inner, 1.0 / alpha) : inner);
        }
        best = std::max(best, s);
    }
    return variant == Variant::Up ? alpha / (1.0 - alpha) * std::log2(best) : std::log2(best) / (1.0 - alpha);
}

CounterexampleReport ce_report(double alpha) {
    check_alpha(alpha);
    CounterexampleReport r;
    r.alpha = alpha;
    r.lhs = ce_lhs(alpha);
    r.first_term = ce_first_term(alpha);
    r.inf_up = ce_inf_term(alpha, Variant::Up);
    r.rhs = r.first_term + r.inf_up;
    r.violated = r.rhs > r.lhs;
    r.h_down_lhs = h_classical(ce_two_rounds(), alpha, Variant::Down);
    r.h_down_first = h_classical(ce_first_round(), alpha, Variant::Down);
    r.h_down_inf = ce_inf_term_vertices(alpha, Variant::Down);
    r.h_down_rhs = r.h_down_first + r.h_down_inf;
    r.saturation_gap = std::abs(r.h_down_lhs - r.h_down_rhs);
    return r;
}

std::vector<CounterexampleReport> ce_scan(double from, double to, int points) {
    require(points >= 1, ErrorCode::BadInput, "scan needs at least one point");
    check_alpha(from);
    check_alpha(to);
    std::vector<CounterexampleReport> out;
    for (int i = 0; i < points; ++i) {
        const double a = points == 1 ? from : from + (to - from) * i / (points - 1);
        out.push_back(ce_report(a));
    }
    return out;
}

}  // namespace renyi
