#include "renyi/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include <gsl/gsl_multifit.h>

#include "renyi/errors.hpp"
#include "renyi/linalg.hpp"

namespace renyi {

namespace {

constexpr double kLeakTol = 1e-10;

double log2_pos(double x) { return std::log2(x); }

// Powers of a PSD operator on its support plus the projector onto the complement.
struct SupportPower {
    ComplexMatrix power;
    ComplexMatrix perp;
};

SupportPower support_power(const ComplexMatrix& sigma, double t) {
    const auto eig = psd_eig(sigma);
    const double cut = support_threshold(eig.values);
    std::vector<double> pw(eig.values.size(), 0.0), out(eig.values.size(), 0.0);
    for (std::size_t k = 0; k < pw.size(); ++k) {
        const double x = eig.values[k];
        if (x > cut && x > 0.0)
            pw[k] = std::pow(x, t);
        else
            out[k] = 1.0;
    }
    return {from_spectrum(eig, pw), from_spectrum(eig, out)};
}

bool leaks(const ComplexMatrix& rho, const ComplexMatrix& perp) {
    const double t = rho.real_trace();
    return trace_product(perp, rho) > kLeakTol * std::max(t, 1e-300);
}

// sum_i lambda_i(S rho S)^alpha
double sandwiched_trace(const ComplexMatrix& rho, const ComplexMatrix& s, double alpha) {
    const auto z = (s * rho * s).hermitian_part();
    const auto vals = psd_spectrum(z);
    double q = 0.0;
    for (double x : vals)
        if (x > 0.0) q += std::pow(x, alpha);
    return q;
}

double power_trace(const ComplexMatrix& rho, double alpha) {
    double q = 0.0;
    for (double x : psd_spectrum(rho))
        if (x > 0.0) q += std::pow(x, alpha);
    return q;
}

struct Parts {
    Labels a_classical, a_quantum, b_classical, b_quantum;
};

Parts classify(const CqState& rho, const Labels& a, const Labels& b) {
    require(!a.empty(), ErrorCode::BadPartition, "the entropy register set is empty");
    std::set<std::string> seen;
    Parts p;
    auto place = [&](const std::string& l, Labels& cl, Labels& qu) {
        require(seen.insert(l).second, ErrorCode::BadPartition, "register listed twice: " + l);
        if (rho.has_classical(l))
            cl.push_back(l);
        else if (rho.has_quantum(l))
            qu.push_back(l);
        else
            fail(ErrorCode::BadPartition, "unknown register '" + l + "'");
    };
    for (const auto& l : a) place(l, p.a_classical, p.a_quantum);
    for (const auto& l : b) place(l, p.b_classical, p.b_quantum);
    return p;
}

Labels concat(Labels x, const Labels& y) {
    x.insert(x.end(), y.begin(), y.end());
    return x;
}

// Quantum labels of `s` that belong to `wanted`, in state order, with their positions.
std::vector<std::size_t> quantum_positions(const CqState& s, const Labels& wanted) {
    std::vector<std::size_t> pos;
    const auto& ql = s.quantum_labels();
    for (std::size_t k = 0; k < ql.size(); ++k)
        if (std::find(wanted.begin(), wanted.end(), ql[k]) != wanted.end()) pos.push_back(k);
    return pos;
}

Dims dims_at(const Dims& dims, const std::vector<std::size_t>& pos) {
    Dims d;
    for (auto k : pos) d.push_back(dims[k]);
    return d;
}

double combine_down(const std::vector<double>& p, const std::vector<double>& h, double alpha) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += p[i] * std::exp2((1.0 - alpha) * h[i]);
    return log2_pos(s) / (1.0 - alpha);
}

double combine_up(const std::vector<double>& p, const std::vector<double>& h, double alpha) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += p[i] * std::exp2((1.0 - alpha) / alpha * h[i]);
    return alpha / (1.0 - alpha) * log2_pos(s);
}

[[noreturn]] void no_convergence(const OptimizedEntropy& r) {
    std::ostringstream os;
    os.precision(12);
    os << "H-up solver stopped after " << r.iterations << " iterations; best value " << r.value << ", residual "
       << r.residual;
    fail(ErrorCode::NoConvergence, os.str());
}

}  // namespace

void check_alpha(double alpha) {
    require(std::isfinite(alpha) && alpha > 1.0, ErrorCode::BadAlpha, "alpha must be finite and > 1");
}

ExtendedReal renyi_divergence(const ComplexMatrix& rho, const ComplexMatrix& sigma, double alpha) {
    check_alpha(alpha);
    require(rho.rows() == sigma.rows() && rho.square() && sigma.square(), ErrorCode::DimMismatch,
            "divergence arguments must have equal dimension");
    const double t = rho.real_trace();
    require(t > 0.0, ErrorCode::BadInput, "divergence of a zero operator");
    const auto sp = support_power(sigma, (1.0 - alpha) / (2.0 * alpha));
    if (leaks(rho, sp.perp)) return ExtendedReal::infinity();
    const double q = sandwiched_trace(rho, sp.power, alpha);
    return log2_pos(q / t) / (alpha - 1.0);
}

ExtendedReal renyi_divergence(const DensityOperator& rho, const ComplexMatrix& sigma, double alpha) {
    return renyi_divergence(rho.matrix, sigma, alpha);
}

ExtendedReal divergence_to_identity(const CqState& rho, const Labels& a, const BlockOperator& sigma_b, double alpha) {
    check_alpha(alpha);
    std::vector<std::size_t> b_regs;
    for (std::size_t k = 0; k < rho.registers.size(); ++k)
        if (std::find(a.begin(), a.end(), rho.registers[k].label) == a.end()) b_regs.push_back(k);
    require(b_regs.size() == sigma_b.registers.size(), ErrorCode::AlphabetMismatch,
            "sigma must carry the conditioning classical registers");
    for (std::size_t i = 0; i < b_regs.size(); ++i)
        require(rho.registers[b_regs[i]] == sigma_b.registers[i], ErrorCode::AlphabetMismatch,
                "classical register mismatch between state and sigma");

    const auto& ql = rho.quantum_labels();
    std::vector<std::size_t> bq;
    for (std::size_t k = 0; k < ql.size(); ++k)
        if (std::find(a.begin(), a.end(), ql[k]) == a.end()) bq.push_back(k);
    require(dims_at(rho.quantum_dims(), bq) == sigma_b.dims, ErrorCode::DimMismatch,
            "sigma dims do not match the conditioning quantum registers");

    const double gamma = (1.0 - alpha) / (2.0 * alpha);
    std::vector<SupportPower> powers;
    for (const auto& blk : sigma_b.blocks) {
        auto sp = support_power(blk, gamma);
        powers.push_back({embed(sp.power, bq, rho.quantum_dims()), embed(sp.perp, bq, rho.quantum_dims())});
    }
    const auto cd = rho.classical_dims();
    Dims bdims;
    for (auto k : b_regs) bdims.push_back(cd[k]);

    double total = 0.0, mass = 0.0;
    for (std::size_t x = 0; x < rho.outcomes(); ++x) {
        const double p = rho.weights[x];
        if (p <= 0.0) continue;
        mass += p;
        const auto d = digits_of(x, cd);
        std::vector<std::size_t> bd;
        for (auto k : b_regs) bd.push_back(d[k]);
        const std::size_t bi = index_of(bd, bdims);
        const double q = sigma_b.weights[bi];
        if (q <= 0.0) return ExtendedReal::infinity();
        const auto& rx = rho.conditionals[x].matrix;
        if (leaks(rx, powers[bi].perp)) return ExtendedReal::infinity();
        total += std::pow(p, alpha) * std::pow(q, 1.0 - alpha) * sandwiched_trace(rx, powers[bi].power, alpha);
    }
    require(mass > 0.0, ErrorCode::BadInput, "divergence of a zero state");
    return log2_pos(total / mass) / (alpha - 1.0);
}

ExtendedReal renyi_divergence(const CqState& rho, const BlockOperator& sigma, double alpha) {
    return divergence_to_identity(rho, {}, sigma, alpha);
}

ExtendedReal max_divergence(const ComplexMatrix& rho, const ComplexMatrix& sigma) {
    require(rho.rows() == sigma.rows() && rho.square() && sigma.square(), ErrorCode::DimMismatch,
            "divergence arguments must have equal dimension");
    psd_eig(rho);
    const auto sp = support_power(sigma, -0.5);
    if (leaks(rho, sp.perp)) return ExtendedReal::infinity();
    const auto vals = psd_spectrum((sp.power * rho * sp.power).hermitian_part());
    require(vals.front() > 0.0, ErrorCode::BadInput, "max-divergence of a zero operator");
    return log2_pos(vals.front());
}

ExtendedReal kl_divergence(const Distribution& v, const Distribution& p) {
    require(v.size() == p.size(), ErrorCode::AlphabetMismatch, "distributions over different alphabets");
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] <= 0.0) continue;
        if (p[i] <= 0.0) return ExtendedReal::infinity();
        s += v[i] * log2_pos(v[i] / p[i]);
    }
    return s;
}

double h_down(const CqState& rho, const Labels& a, const Labels& b, double alpha) {
    check_alpha(alpha);
    const auto parts = classify(rho, a, b);
    const auto r = marginal(rho, concat(a, b));
    std::vector<double> probs, values;
    for (const auto& br : split(r, parts.b_classical)) {
        const auto rb = marginal(br.state, parts.b_quantum);
        const auto sigma = BlockOperator::single(rb.conditionals.front().matrix, rb.quantum_dims());
        const auto d = divergence_to_identity(br.state, a, sigma, alpha);
        probs.push_back(br.probability);
        values.push_back(-d.value());
    }
    return combine_down(probs, values, alpha);
}

double h_down(const DensityOperator& rho, const std::vector<std::size_t>& a, const std::vector<std::size_t>& b,
              double alpha) {
    check_alpha(alpha);
    require(!a.empty(), ErrorCode::BadPartition, "the entropy register set is empty");
    std::vector<std::size_t> ab = a;
    ab.insert(ab.end(), b.begin(), b.end());
    const auto r = partial_trace(rho, ab);
    std::vector<std::size_t> bpos(b.size());
    std::iota(bpos.begin(), bpos.end(), a.size());
    const auto rb = partial_trace(r, bpos);
    const auto sigma = embed(rb.matrix, bpos, r.dims);
    return -renyi_divergence(r.matrix, sigma, alpha).value();
}

namespace {

std::vector<double> flatten(const ComplexMatrix& m) {
    std::vector<double> v;
    v.reserve(2 * m.data().size());
    for (const auto& z : m.data()) {
        v.push_back(z.real());
        v.push_back(z.imag());
    }
    return v;
}

ComplexMatrix unflatten(const std::vector<double>& v, std::size_t n) {
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n * n; ++i) m.data()[i] = cplx(v[2 * i], v[2 * i + 1]);
    return m;
}

// Anderson mixing of the fixed-point map x -> g(x) over the stored history (oldest first).
std::vector<double> anderson_mix(const std::deque<std::vector<double>>& xs, const std::deque<std::vector<double>>& gs) {
    const std::size_t k = xs.size() - 1, n = xs.front().size();
    gsl_matrix* df = gsl_matrix_alloc(n, k);
    gsl_vector* f = gsl_vector_alloc(n);
    gsl_vector* gamma = gsl_vector_alloc(k);
    gsl_matrix* cov = gsl_matrix_alloc(k, k);
    gsl_multifit_linear_workspace* work = gsl_multifit_linear_alloc(n, k);
    for (std::size_t i = 0; i < n; ++i) {
        gsl_vector_set(f, i, gs[k][i] - xs[k][i]);
        for (std::size_t j = 0; j < k; ++j)
            gsl_matrix_set(df, i, j, (gs[j + 1][i] - xs[j + 1][i]) - (gs[j][i] - xs[j][i]));
    }
    double chisq = 0.0;
    std::size_t rank = 0;
    gsl_multifit_linear_tsvd(df, f, 1e-12, gamma, cov, &chisq, &rank, work);
    std::vector<double> out = gs[k];
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t i = 0; i < n; ++i) out[i] -= gsl_vector_get(gamma, j) * (gs[j + 1][i] - gs[j][i]);
    gsl_multifit_linear_free(work);
    gsl_matrix_free(cov);
    gsl_vector_free(gamma);
    gsl_vector_free(f);
    gsl_matrix_free(df);
    return out;
}

}  // namespace

OptimizedEntropy solve_h_up_blocks(const std::vector<ComplexMatrix>& blocks, const Dims& dims,
                                   const std::vector<std::size_t>& b, double alpha, const SolverConfig& cfg) {
    check_alpha(alpha);
    const double ap = (alpha - 1.0) / alpha;
    const Dims bdims = dims_at(dims, b);
    const std::size_t nb = product(bdims);

    double mass = 0.0;
    ComplexMatrix start(nb, nb), marginal_b(nb, nb);
    for (const auto& blk : blocks) {
        mass += blk.real_trace();
        start += partial_trace(DensityOperator(matrix_power(blk, alpha), dims), b).matrix;
        marginal_b += partial_trace(DensityOperator(blk, dims), b).matrix;
    }
    require(mass > 0.0, ErrorCode::BadInput, "H-up of a zero state");
    start = matrix_power(start, 1.0 / alpha);
    start *= 1.0 / start.real_trace();
    // The power and root can push small eigenvalues under the support cutoff; mixing in the
    // marginal keeps the support of sigma equal to that of rho_B.
    start = start * cplx(0.5) + marginal_b * cplx(0.5 / mass);

    // Q(sigma) and T(sigma) = sum_k tr_A[(S P_k S)^alpha], S = I (x) sigma^{-ap/2}
    auto evaluate = [&](const ComplexMatrix& sigma, ComplexMatrix& t_out) {
        const auto s = embed(matrix_power(sigma, -ap / 2.0), b, dims);
        double q = 0.0;
        t_out = ComplexMatrix(nb, nb);
        for (const auto& blk : blocks) {
            const auto z = matrix_power((s * blk * s).hermitian_part(), alpha);
            q += z.real_trace();
            t_out += partial_trace(DensityOperator(z, dims), b).matrix;
        }
        return q;
    };
    auto value_of = [&](double q) { return -log2_pos(q / mass) / (alpha - 1.0); };

    // Plain fixed-point steps contract slowly on some states; Anderson mixing with a monotone
    // safeguard falls back to a damped step whenever the mixed iterate does not lower Q.
    constexpr std::size_t kHistory = 6;
    std::deque<std::vector<double>> xs, gs;
    OptimizedEntropy out;
    ComplexMatrix sigma = start.hermitian_part(), t;
    double q = evaluate(sigma, t);
    for (int it = 1; it <= cfg.max_iterations; ++it) {
        out.iterations = it;
        ComplexMatrix cand = (t * cplx(1.0 / q)).hermitian_part();
        cand *= 1.0 / cand.real_trace();
        out.residual = trace_norm((cand - sigma).hermitian_part());
        if (out.residual <= cfg.tolerance) {
            ComplexMatrix tc;
            const double qc = evaluate(cand, tc);
            out.value = value_of(std::min(q, qc));
            out.converged = true;
            return out;
        }
        xs.push_back(flatten(sigma));
        gs.push_back(flatten(cand));
        if (xs.size() > kHistory) {
            xs.pop_front();
            gs.pop_front();
        }
        if (xs.size() >= 2) {
            ComplexMatrix mixed = unflatten(anderson_mix(xs, gs), nb).hermitian_part();
            const double tr = mixed.real_trace();
            if (std::isfinite(tr) && tr > 0.0) {
                mixed *= 1.0 / tr;
                if (hermitian_eig(mixed).values.back() > 1e-14) {
                    ComplexMatrix tm;
                    const double qm = evaluate(mixed, tm);
                    if (qm <= q * (1.0 + 1e-13)) {
                        sigma = mixed;
                        t = tm;
                        q = qm;
                        continue;
                    }
                }
            }
            xs.clear();
            gs.clear();
        }
        const ComplexMatrix base = sigma;
        double step = 1.0;
        bool moved = false;
        while (step >= 1.0 / 1024.0) {
            ComplexMatrix trial = base * cplx(1.0 - step) + cand * cplx(step);
            ComplexMatrix tt;
            const double qt = evaluate(trial, tt);
            if (qt <= q * (1.0 + 1e-15)) {
                sigma = trial.hermitian_part();
                t = tt;
                q = qt;
                moved = true;
                break;
            }
            step /= 2.0;
        }
        if (!moved) {
            // No descent along the fixed-point direction: stationary up to rounding.
            out.value = value_of(q);
            out.converged = out.residual <= std::sqrt(cfg.tolerance);
            return out;
        }
    }
    out.value = value_of(q);
    out.converged = false;
    return out;
}

OptimizedEntropy solve_h_up(const CqState& rho, const Labels& a, const Labels& b, double alpha,
                            const SolverConfig& cfg) {
    check_alpha(alpha);
    const auto parts = classify(rho, a, b);
    const auto r = marginal(rho, concat(a, b));
    std::vector<double> probs, values;
    OptimizedEntropy agg;
    for (const auto& br : split(r, parts.b_classical)) {
        const auto& s = br.state;
        double h = 0.0;
        if (parts.b_quantum.empty()) {
            double q = 0.0;
            for (std::size_t x = 0; x < s.outcomes(); ++x)
                if (s.weights[x] > 0.0)
                    q += std::pow(s.weights[x], alpha) * power_trace(s.conditionals[x].matrix, alpha);
            h = log2_pos(q) / (1.0 - alpha);
        } else {
            std::vector<ComplexMatrix> blocks;
            for (std::size_t x = 0; x < s.outcomes(); ++x)
                if (s.weights[x] > 0.0) blocks.push_back(s.conditionals[x].matrix * cplx(s.weights[x]));
            const auto sol = solve_h_up_blocks(blocks, s.quantum_dims(), quantum_positions(s, parts.b_quantum),
                                               alpha, cfg);
            h = sol.value;
            agg.converged = agg.converged && sol.converged;
            agg.iterations = std::max(agg.iterations, sol.iterations);
            agg.residual = std::max(agg.residual, sol.residual);
        }
        probs.push_back(br.probability);
        values.push_back(h);
    }
    agg.value = combine_up(probs, values, alpha);
    return agg;
}

double h_up(const CqState& rho, const Labels& a, const Labels& b, double alpha, const SolverConfig& cfg) {
    const auto r = solve_h_up(rho, a, b, alpha, cfg);
    if (!r.converged) no_convergence(r);
    return r.value;
}

double h_up(const DensityOperator& rho, const std::vector<std::size_t>& a, const std::vector<std::size_t>& b,
            double alpha, const SolverConfig& cfg) {
    check_alpha(alpha);
    require(!a.empty(), ErrorCode::BadPartition, "the entropy register set is empty");
    std::vector<std::size_t> ab = a;
    ab.insert(ab.end(), b.begin(), b.end());
    const auto r = partial_trace(rho, ab);
    if (b.empty()) return log2_pos(power_trace(r.matrix, alpha) / r.trace()) / (1.0 - alpha);
    std::vector<std::size_t> bpos(b.size());
    std::iota(bpos.begin(), bpos.end(), a.size());
    const auto sol = solve_h_up_blocks({r.matrix}, r.dims, bpos, alpha, cfg);
    if (!sol.converged) no_convergence(sol);
    return sol.value;
}

double h_classical(const JointDistribution& p, double alpha, Variant variant) {
    check_alpha(alpha);
    require(p.p.size() == p.na * p.nb, ErrorCode::BadShape, "joint distribution size mismatch");
    double s = 0.0;
    for (std::size_t b = 0; b < p.nb; ++b) {
        double pb = 0.0, pa = 0.0;
        for (std::size_t a = 0; a < p.na; ++a) {
            const double x = p(a, b);
            pb += x;
            if (x > 0.0) pa += std::pow(x, alpha);
        }
        if (pb <= 0.0) continue;
        if (variant == Variant::Down)
            s += pa * std::pow(pb, 1.0 - alpha);
        else
            s += std::pow(pa, 1.0 / alpha);
    }
    return variant == Variant::Down ? log2_pos(s) / (1.0 - alpha) : alpha / (1.0 - alpha) * log2_pos(s);
}

double h_partial(const CqState& rho, const Labels& a, const Labels& b, const Labels& c, double alpha) {
    check_alpha(alpha);
    for (const auto& l : b)
        require(rho.has_classical(l), rho.has_quantum(l) ? ErrorCode::BNotClassical : ErrorCode::BadPartition,
                "optimized register must be classical: " + l);
    classify(rho, a, concat(b, c));
    const auto r = marginal(rho, concat(concat(a, b), c));
    std::vector<double> probs, values;
    for (const auto& br : split(r, b)) {
        probs.push_back(br.probability);
        values.push_back(h_down(br.state, a, c, alpha));
    }
    return combine_up(probs, values, alpha);
}

double h_partial_objective(const std::vector<double>& p, const std::vector<double>& divergence_terms,
                           const std::vector<double>& q, double alpha) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) continue;
        if (q[i] <= 0.0) return -std::numeric_limits<double>::infinity();
        s += std::pow(p[i], alpha) * std::pow(q[i], 1.0 - alpha) * std::exp2((alpha - 1.0) * divergence_terms[i]);
    }
    return -log2_pos(s) / (alpha - 1.0);
}

namespace {

// min over the open simplex of sum_i w_i q_i^{1-alpha}
double minimize_power_sum(const std::vector<double>& w, double alpha, const VariationalOptions& opts) {
    const std::size_t n = w.size();
    auto f = [&](const std::vector<double>& q) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (q[i] <= 0.0) return std::numeric_limits<double>::infinity();
            s += w[i] * std::pow(q[i], 1.0 - alpha);
        }
        return s;
    };
    if (n == 1) return w[0];

    double best = std::numeric_limits<double>::infinity();
    std::vector<double> arg(n, 1.0 / static_cast<double>(n));
    if (n == 2) {
        const double g = (std::sqrt(5.0) - 1.0) / 2.0;
        double lo = 0.0, hi = 1.0;
        auto f1 = [&](double x) { return f({x, 1.0 - x}); };
        double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
        double f1v = f1(x1), f2v = f1(x2);
        while (hi - lo > 1e-14) {
            if (f1v < f2v) {
                hi = x2;
                x2 = x1;
                f2v = f1v;
                x1 = hi - g * (hi - lo);
                f1v = f1(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1v = f2v;
                x2 = lo + g * (hi - lo);
                f2v = f1(x2);
            }
        }
        best = f1(0.5 * (lo + hi));
        arg = {0.5 * (lo + hi), 1.0 - 0.5 * (lo + hi)};
    } else {
        const int res = std::max(opts.grid_resolution, 2);
        std::vector<double> table(res + 1);
        for (int k = 1; k <= res; ++k) table[k] = std::pow(static_cast<double>(k) / res, 1.0 - alpha);
        std::vector<int> idx(n - 1, 1);
        // enumerate compositions with every coordinate >= 1
        std::function<void(std::size_t, int, double)> rec = [&](std::size_t pos, int left, double acc) {
            if (pos == n - 1) {
                if (left < 1) return;
                const double v = acc + w[n - 1] * table[left];
                if (v < best) {
                    best = v;
                    for (std::size_t i = 0; i + 1 < n; ++i) arg[i] = static_cast<double>(idx[i]) / res;
                    arg[n - 1] = static_cast<double>(left) / res;
                }
                return;
            }
            for (int k = 1; k <= left - static_cast<int>(n - 1 - pos); ++k) {
                idx[pos] = k;
                rec(pos + 1, left - k, acc + w[pos] * table[k]);
            }
        };
        rec(0, res, 0.0);
        if (opts.refine) {
            double h = 1.0 / res;
            const int m = 3;
            std::vector<double> cur = arg;
            while (h > 1e-13) {
                bool improved = false;
                std::vector<int> step(n - 1, -m);
                while (true) {
                    std::vector<double> q(n);
                    double last = 1.0;
                    for (std::size_t i = 0; i + 1 < n; ++i) {
                        q[i] = cur[i] + step[i] * h / m;
                        last -= q[i];
                    }
                    q[n - 1] = last;
                    const double v = f(q);
                    if (v < best) {
                        best = v;
                        arg = q;
                        improved = true;
                    }
                    std::size_t k = 0;
                    while (k < n - 1 && step[k] == m) step[k++] = -m;
                    if (k == n - 1) break;
                    ++step[k];
                }
                cur = arg;
                if (!improved) h /= 2.0;
            }
        }
    }
    if (opts.include_analytic_point) {
        std::vector<double> r(n);
        for (std::size_t i = 0; i < n; ++i) r[i] = w[i];
        best = std::min(best, f(optimal_q(r, alpha)));
    }
    return best;
}

}  // namespace

double h_partial_variational(const CqState& rho, const Labels& a, const Labels& b, const Labels& c, double alpha,
                             const VariationalOptions& opts) {
    check_alpha(alpha);
    for (const auto& l : b)
        require(rho.has_classical(l), rho.has_quantum(l) ? ErrorCode::BNotClassical : ErrorCode::BadPartition,
                "optimized register must be classical: " + l);
    classify(rho, a, concat(b, c));
    const auto r = marginal(rho, concat(concat(a, b), c));
    std::vector<double> w;
    for (const auto& br : split(r, b)) {
        const auto dense = to_dense(br.state);
        std::vector<std::size_t> apos, cpos;
        for (std::size_t k = 0; k < dense.labels.size(); ++k) {
            if (std::find(a.begin(), a.end(), dense.labels[k]) != a.end())
                apos.push_back(k);
            else
                cpos.push_back(k);
        }
        const auto rc = partial_trace(dense, cpos);
        const auto sigma = embed(rc.matrix, cpos, dense.dims);
        const double d = renyi_divergence(dense.matrix, sigma, alpha).value();
        w.push_back(std::pow(br.probability, alpha) * std::exp2((alpha - 1.0) * d));
    }
    return -log2_pos(minimize_power_sum(w, alpha, opts)) / (alpha - 1.0);
}

Distribution optimal_q(const std::vector<double>& r, double alpha) {
    check_alpha(alpha);
    double s = 0.0;
    Distribution q(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        require(r[i] >= 0.0, ErrorCode::BadInput, "weights must be nonnegative");
        q[i] = std::pow(r[i], 1.0 / alpha);
        s += q[i];
    }
    require(s > 0.0, ErrorCode::AllZero, "all weights are zero");
    for (auto& x : q) x /= s;
    return q;
}

double von_neumann(const Distribution& p) {
    double s = 0.0;
    for (double x : p)
        if (x > 0.0) s -= x * log2_pos(x);
    return s;
}

double von_neumann(const DensityOperator& rho) { return von_neumann(psd_spectrum(rho.matrix)); }

double cond_mutual_info(const DensityOperator& rho, const std::vector<std::size_t>& a,
                        const std::vector<std::size_t>& b, const std::vector<std::size_t>& c) {
    std::set<std::size_t> seen;
    for (const auto* v : {&a, &b, &c})
        for (auto k : *v) {
            require(k < rho.dims.size(), ErrorCode::BadPartition, "subsystem index out of range");
            require(seen.insert(k).second, ErrorCode::BadPartition, "subsystem in two parts");
        }
    require(!a.empty() && !b.empty(), ErrorCode::BadPartition, "A and B must be non-empty");
    auto join = [](std::vector<std::size_t> x, const std::vector<std::size_t>& y) {
        x.insert(x.end(), y.begin(), y.end());
        return x;
    };
    auto h = [&](const std::vector<std::size_t>& keep) { return von_neumann(partial_trace(rho, keep)); };
    const double hc = c.empty() ? 0.0 : h(c);
    return h(join(a, c)) + h(join(b, c)) - h(join(join(a, b), c)) - hc;
}

double renyi_entropy(const Distribution& p, double alpha) {
    require(alpha > 0.0 && std::isfinite(alpha), ErrorCode::BadAlpha, "alpha must be positive and finite");
    if (alpha == 1.0) return von_neumann(p);
    double s = 0.0;
    for (double x : p)
        if (x > 0.0) s += std::pow(x, alpha);
    return log2_pos(s) / (1.0 - alpha);
}

double renyi_entropy(const DensityOperator& rho, double alpha) { return renyi_entropy(psd_spectrum(rho.matrix), alpha); }

ExtendedReal f_weighted(const CqState& rho, const std::string& c_label, const Labels& a, const Labels& b,
                        const BlockOperator& sigma_b, const std::vector<double>& f, double alpha) {
    check_alpha(alpha);
    require(rho.has_classical(c_label), ErrorCode::BNotClassical, "weighted register must be classical: " + c_label);
    classify(rho, concat({c_label}, a), b);
    const auto& creg = rho.registers[rho.classical_index(c_label)];
    require(f.size() == creg.size, ErrorCode::AlphabetMismatch, "one weight per score value");
    for (double x : f) require(std::isfinite(x), ErrorCode::BadInput, "weights must be finite");

    const auto r = marginal(rho, concat(concat({c_label}, a), b));
    double s = 0.0;
    for (const auto& br : split(r, {c_label})) {
        const auto d = divergence_to_identity(br.state, a, sigma_b, alpha);
        if (!d.is_finite()) return ExtendedReal::infinity();
        s += std::pow(br.probability, alpha) * std::exp2((alpha - 1.0) * (f[br.outcome[0]] + d.value()));
    }
    return log2_pos(s) / (1.0 - alpha);
}

double f_weighted_sup_qb(const CqState& rho, const Labels& a, const std::string& b_label, const std::string& c_label,
                         const Labels& e, const std::vector<double>& f, double alpha) {
    check_alpha(alpha);
    require(rho.has_classical(b_label), ErrorCode::BNotClassical, "optimized register must be classical: " + b_label);
    require(rho.has_classical(c_label), ErrorCode::BNotClassical, "weighted register must be classical: " + c_label);
    classify(rho, concat({c_label}, a), concat({b_label}, e));
    const auto& creg = rho.registers[rho.classical_index(c_label)];
    require(f.size() == creg.size, ErrorCode::AlphabetMismatch, "one weight per score value");

    const auto r = marginal(rho, concat(concat({b_label, c_label}, a), e));
    double total = 0.0;
    for (const auto& bb : split(r, {b_label})) {
        const auto re = marginal(bb.state, e);
        const Dims edims = re.quantum_dims();
        const auto sigma = BlockOperator::single(re.conditionals.front().matrix, edims);
        double rb = 0.0;
        for (const auto& cb : split(bb.state, {c_label})) {
            const double d = divergence_to_identity(cb.state, a, sigma, alpha).value();
            rb += std::pow(cb.probability, alpha) * std::exp2((alpha - 1.0) * (d + f[cb.outcome[0]]));
        }
        total += bb.probability * std::pow(rb, 1.0 / alpha);
    }
    return alpha / (1.0 - alpha) * log2_pos(total);
}

std::int64_t key_length(double h_up_bits, double epsilon, double alpha) {
    require(std::isfinite(alpha) && alpha > 1.0 && alpha <= 2.0, ErrorCode::BadAlpha, "alpha must lie in (1, 2]");
    require(epsilon > 0.0 && epsilon < 1.0, ErrorCode::BadEpsilon, "epsilon must lie in (0, 1)");
    require(std::isfinite(h_up_bits), ErrorCode::BadInput, "entropy must be finite");
    const double bound = h_up_bits + alpha / (alpha - 1.0) * (std::log2(epsilon) - (2.0 / alpha - 1.0));
    if (bound < 1.0) return 0;
    if (bound >= 9.0e18) return std::numeric_limits<std::int64_t>::max();
    return static_cast<std::int64_t>(std::floor(bound));
}

}  // namespace renyi
