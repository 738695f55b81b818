#include "renyi/eatrate.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

#include "renyi/errors.hpp"
#include "renyi/linalg.hpp"

namespace renyi {

namespace {

constexpr double kLn2 = std::numbers::ln2;

// Solves a small dense system in place; returns false when singular.
bool solve_linear(std::vector<std::vector<double>> a, std::vector<double> b, std::vector<double>& x) {
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
        if (std::abs(a[piv][c]) < 1e-300) return false;
        std::swap(a[c], a[piv]);
        std::swap(b[c], b[piv]);
        for (std::size_t r = c + 1; r < n; ++r) {
            const double f = a[r][c] / a[c][c];
            for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
            b[r] -= f * b[c];
        }
    }
    x.assign(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
        x[i] = s / a[i][i];
    }
    return true;
}

struct Tilted {
    Distribution v;
    double log2_z = 0.0;
    double dual = 0.0;
    std::vector<double> grad;                  // t - E_v[g]
    std::vector<std::vector<double>> neg_hess;  // (alpha - 1) ln2 Cov_v(g)
};

Tilted tilt(const Distribution& p, double h, const ConstraintSet& cs, const std::vector<double>& lambda, double s,
            std::size_t bottom) {
    const std::size_t n = p.size(), m = cs.size();
    std::vector<double> expo(n, -std::numeric_limits<double>::infinity());
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < n; ++c) {
        if (p[c] <= 0.0) continue;
        double w = c == bottom ? h : 0.0;
        for (std::size_t k = 0; k < m; ++k) w -= lambda[k] * cs.g[k][c];
        expo[c] = std::log2(p[c]) - s * w;
        top = std::max(top, expo[c]);
    }
    Tilted r;
    r.v.assign(n, 0.0);
    double z = 0.0;
    for (std::size_t c = 0; c < n; ++c)
        if (p[c] > 0.0) z += r.v[c] = std::exp2(expo[c] - top);
    for (auto& x : r.v) x /= z;
    r.log2_z = top + std::log2(z);
    r.dual = -r.log2_z / s;
    std::vector<double> mean(m, 0.0);
    for (std::size_t k = 0; k < m; ++k) {
        for (std::size_t c = 0; c < n; ++c) mean[k] += r.v[c] * cs.g[k][c];
        r.dual += lambda[k] * cs.t[k];
        r.grad.push_back(cs.t[k] - mean[k]);
    }
    r.neg_hess.assign(m, std::vector<double>(m, 0.0));
    for (std::size_t k = 0; k < m; ++k)
        for (std::size_t l = 0; l < m; ++l) {
            double cov = 0.0;
            for (std::size_t c = 0; c < n; ++c) cov += r.v[c] * (cs.g[k][c] - mean[k]) * (cs.g[l][c] - mean[l]);
            r.neg_hess[k][l] = s * kLn2 * cov;
        }
    return r;
}

double kkt_residual(const Tilted& r, const std::vector<double>& lambda) {
    double res = 0.0;
    for (std::size_t k = 0; k < lambda.size(); ++k) {
        res = std::max(res, std::max(0.0, r.grad[k]));
        res = std::max(res, std::abs(lambda[k] * r.grad[k]));
    }
    return res;
}

double objective_or_penalty(const std::vector<double>& x, const SamplingProtocol& proto, const ConstraintSet& cs,
                            double alpha, const SearchOptions& opts, std::size_t nx, std::size_t ny) {
    try {
        const auto s = strategy_from_parameters(x, opts.model, nx, ny);
        return single_round_h(s, proto, cs, alpha, opts.round).value;
    } catch (const Error&) {
        return 1e6;
    }
}

std::pair<std::size_t, std::size_t> protocol_settings(const SamplingProtocol& proto) {
    // Joint settings x * ny + y with two outcomes per party.
    require(proto.outcomes == 4, ErrorCode::AlphabetMismatch, "two-qubit strategies need four joint outcomes");
    for (std::size_t nx = 1; nx <= proto.settings; ++nx)
        if (proto.settings % nx == 0 && nx * nx >= proto.settings) return {nx, proto.settings / nx};
    return {proto.settings, 1};
}

std::vector<double> random_parameters(StateModel model, std::size_t nx, std::size_t ny, Rng& rng) {
    std::vector<double> p(strategy_parameter_count(model, nx, ny));
    const std::size_t state_params = model == StateModel::Pure ? 6 : 32;
    for (std::size_t i = 0; i < p.size(); ++i)
        p[i] = (model == StateModel::Mixed && i < state_params) ? rng.normal()
                                                                : rng.uniform(0.0, 2.0 * std::numbers::pi);
    return p;
}

}  // namespace

ConstraintSet ConstraintSet::full(std::size_t n) {
    ConstraintSet cs;
    cs.alphabet = n;
    return cs;
}

ConstraintSet& ConstraintSet::add(std::vector<double> row, double bound) {
    require(row.size() == alphabet, ErrorCode::AlphabetMismatch, "constraint row must cover the score alphabet");
    g.push_back(std::move(row));
    t.push_back(bound);
    return *this;
}

ConstraintSet& ConstraintSet::at_least(std::size_t c, double bound) {
    require(c < alphabet, ErrorCode::BadIndex, "score letter out of range");
    std::vector<double> row(alphabet, 0.0);
    row[c] = 1.0;
    return add(row, bound);
}

ConstraintSet& ConstraintSet::at_most(std::size_t c, double bound) {
    require(c < alphabet, ErrorCode::BadIndex, "score letter out of range");
    std::vector<double> row(alphabet, 0.0);
    row[c] = -1.0;
    return add(row, -bound);
}

double ConstraintSet::violation(const Distribution& v) const {
    require(v.size() == alphabet, ErrorCode::AlphabetMismatch, "distribution size differs from the alphabet");
    double worst = 0.0;
    for (std::size_t k = 0; k < size(); ++k) {
        double s = 0.0;
        for (std::size_t c = 0; c < alphabet; ++c) s += g[k][c] * v[c];
        worst = std::max(worst, t[k] - s);
    }
    return worst;
}

void ConstraintSet::validate() const {
    require(alphabet >= 1, ErrorCode::BadShape, "empty score alphabet");
    require(g.size() == t.size(), ErrorCode::BadShape, "one bound per constraint row");
    for (std::size_t k = 0; k < size(); ++k) {
        require(g[k].size() == alphabet, ErrorCode::AlphabetMismatch, "constraint row must cover the score alphabet");
        require(std::isfinite(t[k]), ErrorCode::BadInput, "constraint bound must be finite");
        for (double x : g[k]) require(std::isfinite(x), ErrorCode::BadInput, "constraint coefficient must be finite");
    }
}

void check_nonempty(const ConstraintSet& cs) {
    cs.validate();
    const Distribution uniform(cs.alphabet, 1.0 / static_cast<double>(cs.alphabet));
    inner_inf_v(uniform, 0.0, cs, 2.0, 0);
}

double inner_objective(const Distribution& v, const Distribution& p_c, double h_gen, double alpha, std::size_t bottom) {
    const auto d = kl_divergence(v, p_c);
    if (!d.is_finite()) return std::numeric_limits<double>::infinity();
    return d.value() / (alpha - 1.0) + v[bottom] * h_gen;
}

InnerSolution inner_inf_v(const Distribution& p_c, double h_gen, const ConstraintSet& cs, double alpha,
                          std::size_t bottom) {
    check_alpha(alpha);
    cs.validate();
    require(p_c.size() == cs.alphabet, ErrorCode::AlphabetMismatch, "score distribution and constraints differ");
    require(bottom < cs.alphabet, ErrorCode::BadIndex, "bottom letter out of range");
    require(std::isfinite(h_gen), ErrorCode::BadInput, "generation entropy must be finite");
    double total = 0.0, pmin = 1.0;
    for (double x : p_c) {
        require(x >= 0.0, ErrorCode::BadProbability, "negative probability");
        total += x;
        if (x > 0.0) pmin = std::min(pmin, x);
    }
    require(std::abs(total - 1.0) <= 1e-9, ErrorCode::BadProbability, "score distribution must sum to 1");

    const double s = alpha - 1.0;
    // Any feasible v has D(v||p) <= log(1/pmin); a larger dual value certifies infeasibility.
    const double primal_cap = std::log2(1.0 / pmin) / s + std::abs(h_gen) + 1.0;
    const std::size_t m = cs.size();
    std::vector<double> lambda(m, 0.0);
    auto cur = tilt(p_c, h_gen, cs, lambda, s, bottom);
    int it = 0;
    for (; it < 500; ++it) {
        if (cur.dual > primal_cap) fail(ErrorCode::Infeasible, "constraint set does not meet the support of p_C");
        if (kkt_residual(cur, lambda) < 1e-13) break;
        // Free coordinates: positive multipliers or ones the gradient wants to raise.
        std::vector<std::size_t> free;
        for (std::size_t k = 0; k < m; ++k)
            if (lambda[k] > 0.0 || cur.grad[k] > 0.0) free.push_back(k);
        if (free.empty()) break;
        std::vector<std::vector<double>> a(free.size(), std::vector<double>(free.size()));
        std::vector<double> b(free.size());
        double scale = 0.0;
        for (std::size_t i = 0; i < free.size(); ++i) scale = std::max(scale, cur.neg_hess[free[i]][free[i]]);
        for (std::size_t i = 0; i < free.size(); ++i) {
            for (std::size_t j = 0; j < free.size(); ++j) a[i][j] = cur.neg_hess[free[i]][free[j]];
            a[i][i] += 1e-14 * scale + 1e-300;
            b[i] = cur.grad[free[i]];
        }
        std::vector<double> d;
        if (!solve_linear(a, b, d)) d = b;
        std::vector<double> dir(m, 0.0);
        for (std::size_t i = 0; i < free.size(); ++i) dir[free[i]] = d[i];
        // Projected backtracking on the concave dual.
        double step = 1.0;
        bool moved = false;
        for (int ls = 0; ls < 80; ++ls, step *= 0.5) {
            auto trial = lambda;
            for (std::size_t k = 0; k < m; ++k) trial[k] = std::max(0.0, lambda[k] + step * dir[k]);
            const auto next = tilt(p_c, h_gen, cs, trial, s, bottom);
            // Near the optimum the dual is flat to rounding, so a KKT decrease also counts.
            const double flat = 1e-14 * (1.0 + std::abs(cur.dual));
            if (next.dual > cur.dual ||
                (next.dual >= cur.dual - flat && kkt_residual(next, trial) < kkt_residual(cur, lambda))) {
                lambda = trial;
                cur = next;
                moved = true;
                break;
            }
        }
        if (!moved) {
            // Newton failed to ascend; fall back to a projected gradient step.
            double gstep = 1.0;
            for (int ls = 0; ls < 80; ++ls, gstep *= 0.5) {
                auto trial = lambda;
                for (std::size_t k = 0; k < m; ++k) trial[k] = std::max(0.0, lambda[k] + gstep * cur.grad[k]);
                const auto next = tilt(p_c, h_gen, cs, trial, s, bottom);
                if (next.dual > cur.dual) {
                    lambda = trial;
                    cur = next;
                    moved = true;
                    break;
                }
            }
        }
        if (!moved) break;
    }
    InnerSolution out;
    out.v_star = cur.v;
    out.lambda = lambda;
    out.dual_value = cur.dual;
    out.kkt_residual = kkt_residual(cur, lambda);
    out.iterations = it;
    out.value = inner_objective(cur.v, p_c, h_gen, alpha, bottom);
    if (cs.violation(out.v_star) > 1e-6) fail(ErrorCode::Infeasible, "no feasible score distribution found");
    return out;
}

double gen_round_entropy(const TwoQubitStrategy& s, const Distribution& p_gen, double alpha, const RoundOptions& opts) {
    check_alpha(alpha);
    const auto cq = strategy_to_cq(s, p_gen, opts.outputs);
    if (opts.gen == GenEntropy::Down) return h_down(cq, {"A"}, {"B", "E"}, alpha);
    return h_partial(cq, {"A"}, {"B"}, {"E"}, alpha);
}

RoundEvaluation single_round_h(const TwoQubitStrategy& s, const SamplingProtocol& proto, const ConstraintSet& cs,
                               double alpha, const RoundOptions& opts) {
    proto.validate();
    require(cs.alphabet == proto.score_alphabet(), ErrorCode::AlphabetMismatch,
            "constraints must cover the protocol's score alphabet");
    RoundEvaluation r;
    r.p_c = score_distribution(build_sampling_channel(s, proto));
    r.h_gen = gen_round_entropy(s, proto.p_gen, alpha, opts);
    r.inner = inner_inf_v(r.p_c, r.h_gen, cs, alpha, proto.bottom());
    r.value = r.inner.value;
    return r;
}

std::vector<double> mixed_parameters(const TwoQubitStrategy& s) {
    const auto g = matrix_power(s.state.matrix, 0.5);
    std::vector<double> p;
    for (const auto& z : g.data()) {
        p.push_back(z.real());
        p.push_back(z.imag());
    }
    for (const auto& n : s.alice) p.insert(p.end(), {n.theta, n.phi});
    for (const auto& n : s.bob) p.insert(p.end(), {n.theta, n.phi});
    return p;
}

LocalMinimum nelder_mead(const std::function<double(const std::vector<double>&)>& objective,
                         const std::vector<double>& start, double step, int max_evaluations, double tolerance) {
    const std::size_t n = start.size();
    struct Ctx {
        const std::function<double(const std::vector<double>&)>* f;
        std::vector<double> buf;
        int evals = 0;
    } ctx{&objective, std::vector<double>(n), 0};
    gsl_multimin_function fn;
    fn.n = n;
    fn.params = &ctx;
    fn.f = [](const gsl_vector* v, void* params) {
        auto* c = static_cast<Ctx*>(params);
        for (std::size_t i = 0; i < c->buf.size(); ++i) c->buf[i] = gsl_vector_get(v, i);
        ++c->evals;
        return (*c->f)(c->buf);
    };
    gsl_vector* x = gsl_vector_alloc(n);
    gsl_vector* ss = gsl_vector_alloc(n);
    for (std::size_t i = 0; i < n; ++i) gsl_vector_set(x, i, start[i]);
    gsl_vector_set_all(ss, step);
    gsl_multimin_fminimizer* m = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n);
    gsl_multimin_fminimizer_set(m, &fn, x, ss);
    while (ctx.evals < max_evaluations) {
        if (gsl_multimin_fminimizer_iterate(m) != GSL_SUCCESS) break;
        if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(m), tolerance) == GSL_SUCCESS) break;
    }
    LocalMinimum out;
    out.x.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.x[i] = gsl_vector_get(m->x, i);
    out.value = m->fval;
    out.evaluations = ctx.evals;
    gsl_multimin_fminimizer_free(m);
    gsl_vector_free(ss);
    gsl_vector_free(x);
    return out;
}

RateReport optimize_strategy(const SamplingProtocol& proto, const ConstraintSet& cs, double alpha,
                             const SearchOptions& opts) {
    check_alpha(alpha);
    proto.validate();
    require(opts.restarts >= 1, ErrorCode::BadInput, "restarts must be at least 1");
    const auto [nx, ny] = protocol_settings(proto);
    gsl_set_error_handler_off();

    std::vector<std::vector<double>> starts;
    for (const auto& s : opts.seeds) {
        require(opts.model == StateModel::Mixed, ErrorCode::BadInput, "seed strategies need the mixed model");
        starts.push_back(mixed_parameters(s));
    }
    for (int r = 0; r < opts.restarts; ++r) {
        auto rng = Rng::derive(opts.seed, static_cast<std::uint64_t>(r));
        starts.push_back(random_parameters(opts.model, nx, ny, rng));
    }
    std::vector<LocalMinimum> results(starts.size());
    auto objective = [&](const std::vector<double>& x) {
        return objective_or_penalty(x, proto, cs, alpha, opts, nx, ny);
    };
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t workers = std::min<std::size_t>(starts.size(), opts.threads > 0 ? opts.threads : hw);
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                for (std::size_t i = w; i < starts.size(); i += workers)
                    results[i] = nelder_mead(objective, starts[i], opts.initial_step, opts.max_evaluations,
                                             opts.simplex_tolerance);
            });
    }
    std::size_t best = 0;
    int evals = 0;
    for (std::size_t i = 0; i < results.size(); ++i) {
        evals += results[i].evaluations;
        if (results[i].value < results[best].value) best = i;
    }
    RateReport rep;
    rep.alpha = alpha;
    rep.strategy = strategy_from_parameters(results[best].x, opts.model, nx, ny);
    const auto eval = single_round_h(rep.strategy, proto, cs, alpha, opts.round);
    rep.h_alpha = eval.value;
    rep.h_gen = eval.h_gen;
    rep.v_star = eval.inner.v_star;
    rep.p_c = eval.p_c;
    rep.kkt_residual = eval.inner.kkt_residual;
    if (nx == 2 && ny == 2) rep.chsh_value = bell_value(rep.strategy, chsh_functional());
    rep.evaluations = evals;
    rep.restarts = static_cast<int>(starts.size());
    return rep;
}

double finite_size_bound(double n, double h_alpha, double p_omega, double alpha) {
    check_alpha(alpha);
    require(n >= 1.0, ErrorCode::BadInput, "n must be at least 1");
    require(p_omega > 0.0 && p_omega <= 1.0, ErrorCode::BadProbability, "p_omega must lie in (0, 1]");
    return n * h_alpha - alpha / (alpha - 1.0) * std::log2(1.0 / p_omega);
}

FiniteSize finite_size(double n, double h_alpha, double p_omega, double alpha, double epsilon) {
    FiniteSize f;
    f.n = n;
    f.p_omega = p_omega;
    f.epsilon = epsilon;
    f.total_bits = finite_size_bound(n, h_alpha, p_omega, alpha);
    f.key_length = alpha <= 2.0 ? key_length(f.total_bits, epsilon, alpha) : 0;
    return f;
}

std::vector<ComparisonRow> compare_entropies(const TwoQubitStrategy& s, const Distribution& p_b,
                                             const std::vector<double>& alphas, OutputSelection outputs) {
    const auto cq = strategy_to_cq(s, p_b, outputs);
    const auto branches = split(cq, {"B"});
    std::vector<ComparisonRow> rows;
    for (double a : alphas) {
        check_alpha(a);
        ComparisonRow r;
        r.alpha = a;
        r.h_down = h_down(cq, {"A"}, {"B", "E"}, a);
        r.h_partial = h_partial(cq, {"A"}, {"B"}, {"E"}, a);
        r.gap = r.h_partial - r.h_down;
        for (const auto& br : branches) r.per_setting.push_back(h_down(br.state, {"A"}, {"E"}, a));
        const auto [lo, hi] = std::minmax_element(r.per_setting.begin(), r.per_setting.end());
        r.asymmetry = *hi - *lo;
        rows.push_back(std::move(r));
    }
    return rows;
}

TwoQubitStrategy best_bell_strategy(const BellFunctional& f, int restarts, std::uint64_t seed, StateModel model) {
    require(restarts >= 1, ErrorCode::BadInput, "restarts must be at least 1");
    gsl_set_error_handler_off();
    auto objective = [&](const std::vector<double>& x) {
        return -bell_value(strategy_from_parameters(x, model, f.nx, f.ny), f);
    };
    LocalMinimum best;
    best.value = std::numeric_limits<double>::infinity();
    for (int r = 0; r < restarts; ++r) {
        auto rng = Rng::derive(seed, static_cast<std::uint64_t>(r));
        auto res = nelder_mead(objective, random_parameters(model, f.nx, f.ny, rng), 0.5, 20000, 1e-10);
        if (res.value < best.value) best = std::move(res);
    }
    return strategy_from_parameters(best.x, model, f.nx, f.ny);
}

double richardson_alpha_limit(const std::function<double(double)>& f, double h) {
    require(h > 0.0, ErrorCode::BadInput, "step must be positive");
    return 2.0 * f(1.0 + h) - f(1.0 + 2.0 * h);
}

AsymptoticTable asymptotic_check(const TwoQubitStrategy& s, const std::vector<std::pair<double, double>>& schedule) {
    require(!schedule.empty(), ErrorCode::BadInput, "empty schedule");
    AsymptoticTable tab;
    const auto base = chsh_protocol(1.0);
    const auto gen = strategy_to_cq(s, base.p_gen);
    const auto dense = to_dense(gen);  // subsystems A, B, E
    tab.von_neumann_target = von_neumann(dense) - von_neumann(partial_trace(dense, {1, 2}));
    tab.h_partial_limit = richardson_alpha_limit([&](double a) { return h_partial(gen, {"A"}, {"B"}, {"E"}, a); });
    const double win = score_distribution(build_sampling_channel(s, base))[1];
    double last_gap = std::numeric_limits<double>::infinity();
    for (const auto& [alpha, gamma] : schedule) {
        const auto proto = chsh_protocol(gamma);
        ConstraintSet cs = ConstraintSet::full(proto.score_alphabet());
        cs.at_least(1, gamma * win);
        const auto ev = single_round_h(s, proto, cs, alpha);
        AsymptoticRow row;
        row.alpha = alpha;
        row.gamma = gamma;
        row.value = ev.value;
        row.h_gen = ev.h_gen;
        row.kl_term = kl_divergence(ev.inner.v_star, ev.p_c).value() / (alpha - 1.0);
        const double gap = std::abs(tab.von_neumann_target - row.value);
        if (gap > last_gap + 1e-9) tab.monotone = false;
        last_gap = gap;
        tab.rows.push_back(row);
    }
    return tab;
}

}  // namespace renyi
