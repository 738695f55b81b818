#include <cmath>
#include <functional>

#include "doctest.h"
#include "renyi/entropy.hpp"
#include "renyi/errors.hpp"
#include "renyi/linalg.hpp"
#include "renyi/random.hpp"

using namespace renyi;

namespace {

const double kAlphas[] = {1.1, 1.5, 2.0, 3.0};

DensityOperator diag_state(const std::vector<double>& p, Dims dims, std::vector<std::string> labels) {
    return {ComplexMatrix::diagonal(p), std::move(dims), std::move(labels)};
}

// Direct evaluation of the classical closed forms, written out per outcome.
double classical_down(const std::vector<std::vector<double>>& pab, double alpha) {
    double s = 0.0;
    for (std::size_t b = 0; b < pab[0].size(); ++b) {
        double pb = 0.0;
        for (const auto& row : pab) pb += row[b];
        if (pb == 0.0) continue;
        double inner = 0.0;
        for (const auto& row : pab) inner += std::pow(row[b] / pb, alpha);
        s += pb * inner;
    }
    return std::log2(s) / (1.0 - alpha);
}

double classical_up(const std::vector<std::vector<double>>& pab, double alpha) {
    double s = 0.0;
    for (std::size_t b = 0; b < pab[0].size(); ++b) {
        double pb = 0.0;
        for (const auto& row : pab) pb += row[b];
        if (pb == 0.0) continue;
        double inner = 0.0;
        for (const auto& row : pab) inner += std::pow(row[b] / pb, alpha);
        s += pb * std::pow(inner, 1.0 / alpha);
    }
    return alpha / (1.0 - alpha) * std::log2(s);
}

// Best -D(rho_AB || I (x) sigma) over qubit sigma = (I + r.s)/2, by grid + pattern search.
double bloch_grid_h_up(const DensityOperator& rho_ab, double alpha) {
    auto value = [&](double x, double y, double z) {
        const double n = std::sqrt(x * x + y * y + z * z);
        if (n >= 1.0) return -1e300;
        ComplexMatrix s{{0.5 * (1 + z), cplx(0.5 * x, -0.5 * y)}, {cplx(0.5 * x, 0.5 * y), 0.5 * (1 - z)}};
        auto d = renyi_divergence(rho_ab.matrix, kron(ComplexMatrix::identity(rho_ab.dims[0]), s), alpha);
        return d.is_finite() ? -d.value() : -1e300;
    };
    double best = -1e300, bx = 0, by = 0, bz = 0;
    const int n = 12;
    for (int i = -n; i <= n; ++i)
        for (int j = -n; j <= n; ++j)
            for (int k = -n; k <= n; ++k) {
                const double x = 0.999 * i / n, y = 0.999 * j / n, z = 0.999 * k / n;
                const double v = value(x, y, z);
                if (v > best) best = v, bx = x, by = y, bz = z;
            }
    double h = 1.0 / n;
    while (h > 1e-9) {
        bool moved = false;
        for (int i = -1; i <= 1; ++i)
            for (int j = -1; j <= 1; ++j)
                for (int k = -1; k <= 1; ++k) {
                    const double v = value(bx + i * h, by + j * h, bz + k * h);
                    if (v > best) best = v, bx += i * h, by += j * h, bz += k * h, moved = true;
                }
        if (!moved) h /= 2;
    }
    return best;
}

}  // namespace

TEST_CASE("divergence basics") {
    Rng rng(1);
    for (double a : kAlphas) {
        auto rho = random_density({3}, 2, rng);
        CHECK(std::abs(renyi_divergence(rho.matrix, rho.matrix, a).value()) < 1e-9);
    }
    auto d = renyi_divergence(ComplexMatrix::diagonal({1, 0}), ComplexMatrix::diagonal({0.5, 0.5}), 2.0);
    CHECK(d.value() == doctest::Approx(1.0));
    auto inf = renyi_divergence(ComplexMatrix::diagonal({0.5, 0.5}), ComplexMatrix::diagonal({1, 0}), 2.0);
    CHECK(inf.is_plus_infinity());
    CHECK(inf > ExtendedReal(1e300));
    CHECK_THROWS_AS(renyi_divergence(ComplexMatrix::diagonal({1, 0}), ComplexMatrix::diagonal({1, -1}), 2.0), Error);
    CHECK_THROWS_AS(renyi_divergence(ComplexMatrix::diagonal({1, 0}), ComplexMatrix::diagonal({1, 0}), 1.0), Error);
}

TEST_CASE("cq decomposition agrees with the dense divergence") {
    Rng rng(2);
    for (int i = 0; i < 30; ++i) {
        auto rho = random_cq({{"X", 3}}, {2}, {"Q"}, rng);
        BlockOperator sigma;
        sigma.registers = {{"X", 3}};
        sigma.dims = {2};
        for (int x = 0; x < 3; ++x) {
            sigma.weights.push_back(rng.uniform(0.1, 2.0));
            sigma.blocks.push_back(random_density({2}, 0, rng).matrix);
        }
        for (double a : kAlphas) {
            const double cq = renyi_divergence(rho, sigma, a).value();
            const double dense = renyi_divergence(to_dense(rho).matrix, sigma.dense(), a).value();
            CHECK(cq == doctest::Approx(dense).epsilon(1e-9));
        }
    }
}

TEST_CASE("max-divergence") {
    Rng rng(3);
    auto rho = random_density({3}, 0, rng);
    CHECK(std::abs(max_divergence(rho.matrix, rho.matrix).value()) < 1e-9);
    const double lmax = psd_spectrum(rho.matrix).front();
    auto mixed = ComplexMatrix::identity(3) * cplx(1.0 / 3);
    CHECK(max_divergence(rho.matrix, mixed).value() == doctest::Approx(std::log2(3.0) + std::log2(lmax)).epsilon(1e-10));
    for (int i = 0; i < 30; ++i) {
        auto r = random_density({3}, 0, rng), s = random_density({3}, 0, rng);
        for (double a : kAlphas) CHECK(renyi_divergence(r.matrix, s.matrix, a) <= max_divergence(r.matrix, s.matrix) + 1e-9);
    }
}

TEST_CASE("KL divergence") {
    CHECK(kl_divergence({0.3, 0.7}, {0.3, 0.7}).value() == doctest::Approx(0.0));
    CHECK(kl_divergence({1, 0}, {0.5, 0.5}).value() == doctest::Approx(1.0));
    CHECK(kl_divergence({0.5, 0.5}, {1, 0}).is_plus_infinity());
    CHECK_THROWS_AS(kl_divergence({1}, {0.5, 0.5}), Error);
    Rng rng(4);
    for (int i = 0; i < 100; ++i)
        CHECK(kl_divergence(random_distribution(4, rng), random_distribution(4, rng)).value() >= 0.0);
}

TEST_CASE("conditional entropies of simple states") {
    auto mixed = CqState({}, {1.0}, {maximally_mixed({2}, {"A"})});
    for (double a : kAlphas) {
        CHECK(h_down(mixed, {"A"}, {}, a) == doctest::Approx(1.0));
        CHECK(h_up(mixed, {"A"}, {}, a) == doctest::Approx(1.0));
    }
    CHECK_THROWS_AS(h_down(mixed, {"A"}, {"A"}, 2.0), Error);
    CHECK_THROWS_AS(h_down(mixed, {"Z"}, {}, 2.0), Error);
    CHECK_THROWS_AS(h_down(mixed, {}, {}, 2.0), Error);
}

TEST_CASE("classical closed forms agree with dense and cq evaluations") {
    Rng rng(5);
    for (int i = 0; i < 40; ++i) {
        const std::size_t na = 2 + rng.index(2), nb = 1 + rng.index(3);
        auto flat = random_distribution(na * nb, rng);
        if (i % 5 == 0) flat[0] = 0.0;
        double s = 0;
        for (double x : flat) s += x;
        for (double& x : flat) x /= s;
        std::vector<std::vector<double>> pab(na, std::vector<double>(nb));
        for (std::size_t a = 0; a < na; ++a)
            for (std::size_t b = 0; b < nb; ++b) pab[a][b] = flat[a * nb + b];
        JointDistribution jd{na, nb, flat};
        auto cq = CqState::classical({{"A", na}, {"B", nb}}, flat);
        auto dense = diag_state(flat, {na, nb}, {"A", "B"});
        for (double a : kAlphas) {
            const double down = classical_down(pab, a), up = classical_up(pab, a);
            CHECK(h_classical(jd, a, Variant::Down) == doctest::Approx(down).epsilon(1e-10));
            CHECK(h_classical(jd, a, Variant::Up) == doctest::Approx(up).epsilon(1e-10));
            CHECK(h_down(cq, {"A"}, {"B"}, a) == doctest::Approx(down).epsilon(1e-10));
            CHECK(h_up(cq, {"A"}, {"B"}, a) == doctest::Approx(up).epsilon(1e-10));
            CHECK(h_down(dense, {0}, {1}, a) == doctest::Approx(down).epsilon(1e-10));
            CHECK(h_up(dense, {0}, {1}, a) == doctest::Approx(up).epsilon(1e-8));
            CHECK(up >= down - 1e-12);
        }
    }
}

TEST_CASE("uniform bit with trivial conditioning") {
    JointDistribution jd{2, 1, {0.5, 0.5}};
    CHECK(h_classical(jd, 2.0, Variant::Up) == doctest::Approx(1.0));
    CHECK(h_classical(jd, 2.0, Variant::Down) == doctest::Approx(1.0));
}

TEST_CASE("classical conditioning formula agrees with the dense definition") {
    Rng rng(6);
    for (int i = 0; i < 20; ++i) {
        auto rho = random_cq({{"B", 3}}, {2, 2}, {"A", "C"}, rng);
        auto dense = to_dense(rho);
        for (double a : kAlphas) {
            CHECK(h_down(rho, {"A"}, {"B", "C"}, a) == doctest::Approx(h_down(dense, {1}, {0, 2}, a)).epsilon(1e-10));
            CHECK(h_up(rho, {"A"}, {"B", "C"}, a) == doctest::Approx(h_up(dense, {1}, {0, 2}, a)).epsilon(1e-8));
        }
    }
}

TEST_CASE("quantum H-up solver matches a Bloch-ball grid") {
    Rng rng(7);
    for (int i = 0; i < 6; ++i) {
        auto rho = random_density({2, 2}, 1 + rng.index(4), rng, {"A", "B"});
        for (double a : {1.5, 3.0}) {
            const double solver = h_up(rho, {0}, {1}, a);
            const double grid = bloch_grid_h_up(rho, a);
            CHECK(solver == doctest::Approx(grid).epsilon(1e-5));
            CHECK(solver >= grid - 1e-9);
            CHECK(solver >= h_down(rho, {0}, {1}, a) - 1e-12);
        }
    }
}

TEST_CASE("H-up is additive on tensor products") {
    Rng rng(8);
    for (int i = 0; i < 5; ++i) {
        auto r = random_density({2, 2}, 0, rng, {"A1", "B1"});
        auto t = random_density({2, 2}, 2, rng, {"A2", "B2"});
        auto joint = permute(tensor(r, t), {0, 2, 1, 3});
        for (double a : {1.5, 2.0}) {
            const double lhs = h_up(joint, {0, 1}, {2, 3}, a);
            CHECK(lhs == doctest::Approx(h_up(r, {0}, {1}, a) + h_up(t, {0}, {1}, a)).epsilon(1e-8));
        }
    }
}

TEST_CASE("H-up of a product with a nearly pure conditioning system") {
    // rho_C^alpha has eigenvalues far below the support cutoff while rho_C itself does not
    Rng rng(21);
    const auto ra = random_density({2}, 0, rng, {"A"});
    const auto rc = diag_state({1.0 - 8e-5, 8e-5}, {2}, {"C"});
    const auto joint = tensor(ra, rc);
    for (double a : kAlphas) CHECK(h_up(joint, {0}, {1}, a) == doctest::Approx(h_down(ra, {0}, {}, a)).epsilon(1e-10));
}

TEST_CASE("entropies are nonincreasing in alpha") {
    Rng rng(9);
    for (int i = 0; i < 10; ++i) {
        auto rho = random_cq({{"B", 2}}, {2, 2}, {"A", "C"}, rng);
        double pd = 1e9, pu = 1e9, pp = 1e9;
        for (double a : {1.05, 1.3, 1.7, 2.5, 4.0}) {
            const double d = h_down(rho, {"A"}, {"B", "C"}, a);
            const double u = h_up(rho, {"A"}, {"B", "C"}, a);
            const double p = h_partial(rho, {"A"}, {"B"}, {"C"}, a);
            CHECK(d <= pd + 1e-9);
            CHECK(u <= pu + 1e-9);
            CHECK(p <= pp + 1e-9);
            pd = d, pu = u, pp = p;
        }
    }
}

TEST_CASE("partially optimized entropy reduces to H-up and H-down on products") {
    Rng rng(10);
    for (int i = 0; i < 10; ++i) {
        auto ab = random_cq({{"B", 3}}, {2}, {"A"}, rng);
        auto c = random_density({2}, 0, rng, {"C"});
        std::vector<DensityOperator> conds;
        for (const auto& x : ab.conditionals) conds.push_back(tensor(x, c));
        CqState prod(ab.registers, ab.weights, conds);

        auto ac = random_density({2, 2}, 0, rng, {"A", "C"});
        CqState prod2({{"B", 3}}, random_distribution(3, rng), std::vector<DensityOperator>(3, ac));
        for (double a : kAlphas) {
            CHECK(h_partial(prod, {"A"}, {"B"}, {"C"}, a) == doctest::Approx(h_up(ab, {"A"}, {"B"}, a)).epsilon(1e-10));
            CHECK(h_partial(prod2, {"A"}, {"B"}, {"C"}, a) == doctest::Approx(h_down(ac, {0}, {1}, a)).epsilon(1e-10));
        }
    }
    auto rho = random_cq({{"B", 2}}, {2, 2}, {"A", "C"}, rng);
    CHECK_THROWS_AS(h_partial(rho, {"A"}, {"C"}, {"B"}, 2.0), Error);
}

TEST_CASE("variational form of the partially optimized entropy") {
    Rng rng(11);
    for (int i = 0; i < 15; ++i) {
        const std::size_t nb = 2 + rng.index(3);
        auto rho = random_cq({{"B", nb}}, {2, 2}, {"A", "C"}, rng);
        for (double a : {1.5, 3.0}) {
            const double closed = h_partial(rho, {"A"}, {"B"}, {"C"}, a);
            const double search = h_partial_variational(rho, {"A"}, {"B"}, {"C"}, a);
            CHECK(search == doctest::Approx(closed).epsilon(1e-6));
            CHECK(search <= closed + 1e-9);
            VariationalOptions coarse{50, false, false};
            CHECK(h_partial_variational(rho, {"A"}, {"B"}, {"C"}, a, coarse) <= closed + 1e-9);
        }
    }
}

TEST_CASE("variational objective at q = p_B is H-down") {
    Rng rng(12);
    auto rho = random_cq({{"B", 3}}, {2, 2}, {"A", "C"}, rng);
    const double a = 2.0;
    std::vector<double> p, d;
    for (const auto& br : split(rho, {"B"})) {
        p.push_back(br.probability);
        auto s = marginal(br.state, {"C"});
        d.push_back(divergence_to_identity(br.state, {"A"}, BlockOperator::single(s.conditionals[0].matrix, {2}), a).value());
    }
    CHECK(h_partial_objective(p, d, p, a) == doctest::Approx(h_down(rho, {"A"}, {"B", "C"}, a)).epsilon(1e-10));
}

TEST_CASE("optimal q") {
    auto q = optimal_q({1, 1}, 2.0);
    CHECK(q[0] == doctest::Approx(0.5));
    auto q3 = optimal_q({8, 1}, 3.0);
    CHECK(q3[0] == doctest::Approx(2.0 / 3));
    CHECK(q3[1] == doctest::Approx(1.0 / 3));
    CHECK_THROWS_AS(optimal_q({0, 0}, 2.0), Error);

    Rng rng(13);
    for (double a : kAlphas) {
        std::vector<double> r = {rng.uniform(), rng.uniform(), rng.uniform()};
        auto obj = [&](const std::vector<double>& qq) {
            double s = 0;
            for (int i = 0; i < 3; ++i) s += std::pow(qq[i], 1 - a) * r[i];
            return s;
        };
        auto qs = optimal_q(r, a);
        double sum = 0;
        for (double x : r) sum += std::pow(x, 1 / a);
        CHECK(obj(qs) == doctest::Approx(std::pow(sum, a)).epsilon(1e-12));
        for (int k = 0; k < 100; ++k) CHECK(obj(qs) <= obj(random_distribution(3, rng)) + 1e-12);
    }
}

TEST_CASE("von Neumann entropy and conditional mutual information") {
    Rng rng(14);
    CHECK(std::abs(von_neumann(random_pure({3}, rng))) < 1e-9);
    auto ac = random_density({2, 2}, 0, rng);
    auto b = random_density({3}, 0, rng);
    auto joint = permute(tensor(ac, b), {0, 2, 1});  // A B C
    CHECK(std::abs(cond_mutual_info(joint, {0}, {1}, {2})) < 1e-9);
    auto x = random_density({2}, 0, rng), y = random_density({3}, 0, rng);
    CHECK(von_neumann(tensor(x, y)) == doctest::Approx(von_neumann(x) + von_neumann(y)).epsilon(1e-10));
    for (int i = 0; i < 20; ++i) CHECK(cond_mutual_info(random_density({2, 2, 2}, 0, rng), {0}, {1}, {2}) >= -1e-9);
    CHECK_THROWS_AS(cond_mutual_info(joint, {0}, {0}, {2}), Error);
}

TEST_CASE("Renyi entropy") {
    CHECK(renyi_entropy(Distribution{0.25, 0.25, 0.25, 0.25}, 2.0) == doctest::Approx(2.0));
    CHECK(renyi_entropy(Distribution{1.0, 0.0}, 3.0) == doctest::Approx(0.0));
    Rng rng(15);
    for (int i = 0; i < 20; ++i) {
        auto r = random_density({4}, 0, rng);
        double prev = 1e9;
        for (double a : {1.1, 1.5, 2.0, 5.0}) {
            const double h = renyi_entropy(r, a);
            CHECK(h <= prev + 1e-12);
            prev = h;
        }
    }
}

TEST_CASE("f-weighted entropy") {
    Rng rng(16);
    for (int i = 0; i < 10; ++i) {
        auto rho = random_cq({{"C", 3}}, {2, 2}, {"A", "B"}, rng);
        auto rb = marginal(rho, {"B"}).conditionals[0].matrix;
        auto sigma = BlockOperator::single(rb, {2});
        for (double a : kAlphas) {
            const auto h0 = f_weighted(rho, "C", {"A"}, {"B"}, sigma, {0, 0, 0}, a);
            CHECK(h0.value() == doctest::Approx(h_down(rho, {"C", "A"}, {"B"}, a)).epsilon(1e-10));
            const auto hs = f_weighted(rho, "C", {"A"}, {"B"}, sigma, {0.7, 0.7, 0.7}, a);
            CHECK(hs.value() == doctest::Approx(h0.value() - 0.7).epsilon(1e-10));
        }
    }
    auto rho = random_cq({{"C", 2}}, {2, 2}, {"A", "B"}, rng);
    auto sigma = BlockOperator::single(ComplexMatrix::diagonal({1.0, 0.0}), {2});
    CHECK(f_weighted(rho, "C", {"A"}, {"B"}, sigma, {0, 0}, 2.0).is_plus_infinity());
    CHECK_THROWS_AS(f_weighted(rho, "C", {"A"}, {"B"}, sigma, {0}, 2.0), Error);
}

TEST_CASE("closed form of the optimized f-weighted entropy") {
    Rng rng(17);
    for (int i = 0; i < 10; ++i) {
        auto rho = random_cq({{"B", 2}, {"C", 2}}, {2, 2}, {"A", "E"}, rng);
        std::vector<double> f = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
        for (double a : {1.5, 2.0}) {
            const double closed = f_weighted_sup_qb(rho, {"A"}, "B", "C", {"E"}, f, a);
            std::vector<ComplexMatrix> rhoe;
            for (const auto& br : split(rho, {"B"})) rhoe.push_back(marginal(br.state, {"E"}).conditionals[0].matrix);
            double best = -1e300;
            for (int k = 1; k < 2000; ++k) {
                const double q = k / 2000.0;
                BlockOperator s{{{"B", 2}}, {q, 1 - q}, rhoe, {2}};
                best = std::max(best, f_weighted(rho, "C", {"A"}, {"B", "E"}, s, f, a).value());
            }
            CHECK(best <= closed + 1e-9);
            CHECK(best == doctest::Approx(closed).epsilon(1e-6));
        }
    }
    // single-letter B
    auto rho = random_cq({{"B", 1}, {"C", 3}}, {2, 2}, {"A", "E"}, rng);
    std::vector<double> f = {0.1, -0.2, 0.3};
    auto re = marginal(rho, {"E"}).conditionals[0].matrix;
    BlockOperator s{{{"B", 1}}, {1.0}, {re}, {2}};
    CHECK(f_weighted_sup_qb(rho, {"A"}, "B", "C", {"E"}, f, 2.0) ==
          doctest::Approx(f_weighted(rho, "C", {"A"}, {"B", "E"}, s, f, 2.0).value()).epsilon(1e-10));
}

TEST_CASE("optimized f-weighted entropy with f = 0 and trivial C is the partially optimized entropy") {
    Rng rng(18);
    auto base = random_cq({{"B", 3}}, {2, 2}, {"A", "E"}, rng);
    auto rho = append_classical(base, {"C", 1}, std::vector<std::vector<double>>(3, {1.0}));
    for (double a : kAlphas)
        CHECK(f_weighted_sup_qb(rho, {"A"}, "B", "C", {"E"}, {0.0}, a) ==
              doctest::Approx(h_partial(base, {"A"}, {"B"}, {"E"}, a)).epsilon(1e-10));
}

TEST_CASE("key length") {
    CHECK(key_length(0.0, 1e-6, 2.0) == 0);
    std::int64_t prev = 0;
    for (double h = 0; h < 200; h += 7.3) {
        const auto l = key_length(h, 1e-6, 1.5);
        CHECK(l >= prev);
        prev = l;
    }
    for (double a : {1.1, 1.5, 2.0}) {
        const double h = 1234.5, eps = 1e-8;
        const auto l = key_length(h, eps, a);
        auto lhs = [&](double ll) { return std::exp2(2 / a - 1) * std::exp2((a - 1) / a * (ll - h)); };
        CHECK(lhs(static_cast<double>(l)) <= eps * (1 + 1e-12));
        CHECK(lhs(static_cast<double>(l + 1)) > eps);
    }
    CHECK_THROWS_AS(key_length(10, 0.0, 2.0), Error);
    CHECK_THROWS_AS(key_length(10, 0.5, 2.5), Error);
}
