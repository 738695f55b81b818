#include "renyi/verify.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

#include "renyi/counterexample.hpp"
#include "renyi/errors.hpp"
#include "renyi/linalg.hpp"
#include "renyi/random.hpp"

namespace renyi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using Check = std::function<double(Rng&, std::uint64_t, Json&)>;

std::uint64_t name_hash(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t property_seed(std::uint64_t seed, const std::string& name) { return Rng::derive(seed, name_hash(name)).next(); }

struct Sample {
    double margin = 0.0;
    Json instance;
};

PropertyResult run_property(const SuiteConfig& cfg, const std::string& name, double default_tolerance,
                            const Check& check, int default_count = -1) {
    PropertyResult res;
    res.name = name;
    res.seed = property_seed(cfg.seed, name);
    res.tolerance = cfg.tolerance_for(name, default_tolerance);
    const int count = default_count > 0 && !cfg.counts.contains(name) ? default_count : cfg.count_for(name);
    res.instances = count;
    const auto start = std::chrono::steady_clock::now();

    std::vector<Sample> samples(static_cast<std::size_t>(count));
    std::atomic<int> next{0};
    auto work = [&] {
        for (int i = next++; i < count; i = next++) {
            auto rng = Rng::derive(res.seed, static_cast<std::uint64_t>(i));
            Sample s;
            try {
                s.margin = check(rng, static_cast<std::uint64_t>(i), s.instance);
                if (std::isnan(s.margin)) s.margin = -kInf;
            } catch (const std::exception& e) {
                s.margin = -kInf;
                s.instance["error"] = e.what();
            }
            samples[static_cast<std::size_t>(i)] = std::move(s);
        }
    };
    int threads = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    threads = std::min(threads, std::max(1, count));
    {
        std::vector<std::jthread> pool;
        for (int t = 1; t < threads; ++t) pool.emplace_back(work);
        work();
    }

    res.worst_margin = kInf;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        if (s.margin < res.worst_margin) {
            res.worst_margin = s.margin;
            res.worst_index = i;
        }
        if (s.margin < -res.tolerance) {
            ++res.failed;
            if (res.failures.size() < cfg.max_reported_failures) res.failures.push_back({i, s.margin, s.instance});
        }
    }
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return res;
}

void add_if(SuiteReport& rep, const SuiteConfig& cfg, const std::string& name, double tol, const Check& check,
            int default_count = -1) {
    if (cfg.selected(name)) rep.properties.push_back(run_property(cfg, name, tol, check, default_count));
}

std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) { return lo + rng.index(hi - lo + 1); }

// Random channel din -> dout with enough Kraus operators for a Stinespring isometry.
KrausChannel some_channel(std::size_t din, std::size_t dout_max, Rng& rng) {
    const std::size_t dout = pick(rng, 1, dout_max);
    const std::size_t need = (din + dout - 1) / dout;
    return random_channel(din, dout, need + rng.index(3), rng);
}

double partial(const SuiteConfig& cfg, const CqState& rho, const Labels& a, const Labels& b, const Labels& c,
               double alpha) {
    double v = h_partial(rho, a, b, c, alpha);
    if (cfg.fault == Fault::OffByBase) v *= std::log(2.0);
    return v;
}

Json alphas_json(const std::vector<double>& alphas) { return Json(alphas); }

// rho_AB (x) rho_C with B classical: the conditionals are rho_A^{|b} (x) rho_C.
CqState product_with(const CqState& ab, const DensityOperator& c) {
    std::vector<DensityOperator> conds;
    for (const auto& x : ab.conditionals) conds.push_back(tensor(x, c));
    return {ab.registers, ab.weights, conds};
}

JointDistribution joint(std::size_t na, std::size_t nb, std::vector<double> p) { return {na, nb, std::move(p)}; }

// ---------------------------------------------------------------- ordering

double ordering_instance(const SuiteConfig& cfg, Rng& rng, std::uint64_t index, Json& inst) {
    const std::size_t nb = pick(rng, 2, cfg.max_letters);
    const std::size_t dc = pick(rng, 2, cfg.max_quantum_dim);
    CqState rho;
    Labels a{"A"}, b{"B"}, c{"C"};
    const int kind = static_cast<int>(index % 3);
    if (kind == 0) {
        rho = random_cq({{"B", nb}}, {2, dc}, {"A", "C"}, rng, rng.index(2) == 0 ? 0 : pick(rng, 1, 2 * dc));
    } else if (kind == 1) {
        rho = random_cq({{"B", nb}, {"A", pick(rng, 2, cfg.max_letters)}}, {dc}, {"C"}, rng);
    } else {
        const std::size_t na = pick(rng, 2, cfg.max_letters);
        const std::size_t nc = pick(rng, 2, cfg.max_letters);
        rho = CqState::classical({{"B", nb}, {"A", na}, {"C", nc}}, random_distribution(nb * na * nc, rng));
    }
    inst["state"] = to_json(rho);
    inst["alphas"] = alphas_json(cfg.alphas);
    double margin = kInf;
    for (double alpha : cfg.alphas) {
        const double hd = h_down(rho, a, {"B", "C"}, alpha);
        const double hp = partial(cfg, rho, a, b, c, alpha);
        const double hu = h_up(rho, a, {"B", "C"}, alpha);
        margin = std::min({margin, hp - hd, hu - hp});
        if (kind == 2) {
            // p(a, (b, c)) through the classical closed forms
            std::vector<double> p(rho.outcomes());
            const std::size_t na = rho.registers[1].size, nc = rho.registers[2].size;
            for (std::size_t bb = 0; bb < nb; ++bb)
                for (std::size_t aa = 0; aa < na; ++aa)
                    for (std::size_t cc = 0; cc < nc; ++cc)
                        p[aa * nb * nc + bb * nc + cc] = rho.weights[(bb * na + aa) * nc + cc];
            const auto jd = joint(na, nb * nc, p);
            margin = std::min({margin, -std::abs(hd - h_classical(jd, alpha, Variant::Down)),
                               -std::abs(hu - h_classical(jd, alpha, Variant::Up))});
        }
    }
    return margin;
}

double saturation_instance(const SuiteConfig& cfg, Rng& rng, Json& inst) {
    const std::size_t nb = pick(rng, 2, cfg.max_letters);
    const std::size_t dc = pick(rng, 2, cfg.max_quantum_dim);
    const auto ab = random_cq({{"B", nb}}, {2}, {"A"}, rng);
    const auto rc = random_density({dc}, 0, rng, {"C"});
    const auto up_side = product_with(ab, rc);
    const auto ac = random_density({2, dc}, 0, rng, {"A", "C"});
    const auto down_side = CqState({{"B", nb}}, random_distribution(nb, rng), std::vector<DensityOperator>(nb, ac));
    inst["upSide"] = to_json(up_side);
    inst["downSide"] = to_json(down_side);
    double margin = kInf;
    for (double alpha : cfg.alphas) {
        margin = std::min(margin, -std::abs(partial(cfg, up_side, {"A"}, {"B"}, {"C"}, alpha) -
                                            h_up(up_side, {"A"}, {"B", "C"}, alpha)));
        margin = std::min(margin, -std::abs(partial(cfg, down_side, {"A"}, {"B"}, {"C"}, alpha) -
                                            h_down(down_side, {"A"}, {"B", "C"}, alpha)));
    }
    return margin;
}

// ---------------------------------------------------------------- chain rule with memory

struct MemoryChannel {
    std::size_t nr = 0, nb = 0, na = 0;
    Distribution p_b;
    std::vector<double> w;  // w[(r * nb + b) * na + a]
    double at(std::size_t r, std::size_t b, std::size_t a) const { return w[(r * nb + b) * na + a]; }
};

// G(q) = sum_b p(b) (sum_r q_r s_rb)^{1/alpha}, s_rb = sum_a w(a|r,b)^alpha. The partially optimised
// entropy of the output with E an orthogonal copy of r is alpha/(1-alpha) log G(q).
struct ConcaveObjective {
    std::vector<std::vector<double>> s;  // [r][b]
    Distribution p_b;
    double alpha = 2.0;

    double value(const Distribution& q) const {
        double g = 0.0;
        for (std::size_t b = 0; b < p_b.size(); ++b) {
            double inner = 0.0;
            for (std::size_t r = 0; r < q.size(); ++r) inner += q[r] * s[r][b];
            g += p_b[b] * std::pow(inner, 1.0 / alpha);
        }
        return g;
    }
    std::vector<double> gradient(const Distribution& q) const {
        std::vector<double> grad(q.size(), 0.0);
        for (std::size_t b = 0; b < p_b.size(); ++b) {
            if (p_b[b] == 0.0) continue;
            double inner = 0.0;
            for (std::size_t r = 0; r < q.size(); ++r) inner += q[r] * s[r][b];
            const double d = p_b[b] / alpha * std::pow(inner, 1.0 / alpha - 1.0);
            for (std::size_t r = 0; r < q.size(); ++r) grad[r] += d * s[r][b];
        }
        return grad;
    }
};

struct CertifiedMax {
    double value = 0.0;  // G at the best point
    double upper = 0.0;  // value + Frank-Wolfe gap >= sup G
    Distribution q;
};

CertifiedMax maximise_concave(const ConcaveObjective& obj) {
    const std::size_t n = obj.s.size();
    Distribution best(n, 0.0);
    double best_val = -kInf;
    if (n == 1) {
        best = {1.0};
        best_val = obj.value(best);
    } else if (n == 2) {
        // golden section on q_0
        const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
        double lo = 0.0, hi = 1.0;
        auto at = [&](double x) { return obj.value({x, 1.0 - x}); };
        double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
        double f1 = at(x1), f2 = at(x2);
        for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
            if (f1 < f2) {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + phi * (hi - lo);
                f2 = at(x2);
            } else {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - phi * (hi - lo);
                f1 = at(x1);
            }
        }
        for (double x : {0.0, 1.0, 0.5 * (lo + hi)}) {
            const double v = at(x);
            if (v > best_val) {
                best_val = v;
                best = {x, 1.0 - x};
            }
        }
    } else {
        // simplex grid, then local grids with halving steps until the optimum stops moving
        const int res = 60;
        std::vector<int> k(n, 0);
        std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
            if (i + 1 == n) {
                k[i] = left;
                Distribution q(n);
                for (std::size_t j = 0; j < n; ++j) q[j] = static_cast<double>(k[j]) / res;
                const double v = obj.value(q);
                if (v > best_val) {
                    best_val = v;
                    best = q;
                }
                return;
            }
            for (int a = 0; a <= left; ++a) {
                k[i] = a;
                rec(i + 1, left - a);
            }
        };
        rec(0, res);
        double h = 1.0 / res;
        double previous = best_val;
        for (int level = 0; level < 60; ++level, h *= 0.5) {
            for (int moves = 0; moves < 200; ++moves) {
                Distribution centre = best;
                bool improved = false;
                std::vector<int> off(n - 1, -2);
                while (true) {
                    Distribution q = centre;
                    double last = centre[n - 1];
                    for (std::size_t j = 0; j + 1 < n; ++j) {
                        q[j] += off[j] * h;
                        last -= off[j] * h;
                    }
                    q[n - 1] = last;
                    if (std::all_of(q.begin(), q.end(), [](double x) { return x >= 0.0; })) {
                        const double v = obj.value(q);
                        if (v > best_val) {
                            best_val = v;
                            best = q;
                            improved = true;
                        }
                    }
                    std::size_t j = 0;
                    while (j + 1 < n && off[j] == 2) off[j++] = -2;
                    if (j + 1 >= n) break;
                    ++off[j];
                }
                if (!improved) break;
            }
            if (level > 4 && std::abs(best_val - previous) < 1e-8 * 1e-4) break;
            previous = best_val;
        }
    }
    const auto g = obj.gradient(best);
    double along = 0.0;
    for (std::size_t r = 0; r < n; ++r) along += best[r] * g[r];
    const double top = *std::max_element(g.begin(), g.end());
    return {best_val, best_val + std::max(0.0, top - along), best};
}

// Certified lower bound on inf over inputs of H(A2 | B2^up E^down) for a classical channel.
struct InfTerm {
    double lower = 0.0;
    double at_best = 0.0;
    double certificate_gap = 0.0;
    Distribution q;
};

InfTerm memory_channel_inf(const MemoryChannel& ch, double alpha) {
    ConcaveObjective obj;
    obj.alpha = alpha;
    obj.p_b = ch.p_b;
    obj.s.assign(ch.nr, std::vector<double>(ch.nb, 0.0));
    for (std::size_t r = 0; r < ch.nr; ++r)
        for (std::size_t b = 0; b < ch.nb; ++b)
            for (std::size_t a = 0; a < ch.na; ++a) obj.s[r][b] += std::pow(ch.at(r, b, a), alpha);
    const auto m = maximise_concave(obj);
    const double k = alpha / (1.0 - alpha);
    return {k * std::log2(m.upper), k * std::log2(m.value), k * std::log2(m.value) - k * std::log2(m.upper), m.q};
}

struct ChainInstance {
    std::size_t na1 = 0, nb1 = 0;
    std::vector<double> p1;  // p(a1, b1, r) at (a1 * nb1 + b1) * nr + r
    MemoryChannel ch;
};

ChainInstance counterexample_chain() {
    const auto& ce = counterexample_instance();
    ChainInstance c;
    c.na1 = 2;
    c.nb1 = 2;
    c.ch.nr = 2;
    c.ch.nb = 2;
    c.ch.na = 2;
    c.p1.assign(8, 0.0);
    for (std::size_t a1 = 0; a1 < 2; ++a1)
        for (std::size_t b1 = 0; b1 < 2; ++b1) c.p1[(a1 * 2 + b1) * 2 + a1] = ce.p_b1[b1].value() * ce.p_a1_given_b1[b1][a1].value();
    c.ch.p_b = {ce.p_b2[0].value(), ce.p_b2[1].value()};
    c.ch.w.assign(8, 0.0);
    for (std::size_t r = 0; r < 2; ++r)
        for (std::size_t b = 0; b < 2; ++b)
            for (std::size_t a = 0; a < 2; ++a) c.ch.w[(r * 2 + b) * 2 + a] = ce.p_a2[r][b][a].value();
    return c;
}

std::vector<double> random_conditional(std::size_t n, Rng& rng) {
    // occasionally deterministic, to reach the boundary of the simplex
    if (rng.index(4) == 0) {
        std::vector<double> p(n, 0.0);
        p[rng.index(n)] = 1.0;
        return p;
    }
    return random_distribution(n, rng);
}

ChainInstance random_chain(const SuiteConfig& cfg, Rng& rng, bool product) {
    ChainInstance c;
    const std::size_t cap = std::min<std::size_t>(3, cfg.max_letters);
    c.na1 = pick(rng, 2, cap);
    c.nb1 = pick(rng, 2, cap);
    c.ch.nr = pick(rng, 2, 3);
    c.ch.nb = pick(rng, 2, cap);
    c.ch.na = pick(rng, 2, cap);
    if (product) {
        const auto pab = random_distribution(c.na1 * c.nb1, rng);
        const auto pr = random_distribution(c.ch.nr, rng);
        c.p1.resize(pab.size() * c.ch.nr);
        for (std::size_t i = 0; i < pab.size(); ++i)
            for (std::size_t r = 0; r < c.ch.nr; ++r) c.p1[i * c.ch.nr + r] = pab[i] * pr[r];
    } else {
        c.p1 = random_distribution(c.na1 * c.nb1 * c.ch.nr, rng);
    }
    c.ch.p_b = random_distribution(c.ch.nb, rng);
    c.ch.w.clear();
    std::vector<std::vector<double>> shared;
    for (std::size_t b = 0; b < c.ch.nb; ++b) shared.push_back(random_conditional(c.ch.na, rng));
    for (std::size_t r = 0; r < c.ch.nr; ++r)
        for (std::size_t b = 0; b < c.ch.nb; ++b) {
            const auto row = product ? shared[b] : random_conditional(c.ch.na, rng);
            c.ch.w.insert(c.ch.w.end(), row.begin(), row.end());
        }
    return c;
}

Json chain_json(const ChainInstance& c) {
    return {{"na1", c.na1},        {"nb1", c.nb1},    {"memory", c.ch.nr}, {"nb2", c.ch.nb},
            {"na2", c.ch.na},      {"pA1B1R", c.p1},  {"pB2", c.ch.p_b},   {"response", c.ch.w}};
}

struct ChainTerms {
    double lhs = 0.0;
    double first = 0.0;
    InfTerm inf;
};

ChainTerms chain_terms(const ChainInstance& c, double alpha) {
    const auto& ch = c.ch;
    // p(a1 a2, b1 b2)
    std::vector<double> p(c.na1 * ch.na * c.nb1 * ch.nb, 0.0);
    std::vector<double> p1(c.na1 * c.nb1, 0.0);
    for (std::size_t a1 = 0; a1 < c.na1; ++a1)
        for (std::size_t b1 = 0; b1 < c.nb1; ++b1)
            for (std::size_t r = 0; r < ch.nr; ++r) {
                const double w = c.p1[(a1 * c.nb1 + b1) * ch.nr + r];
                p1[a1 * c.nb1 + b1] += w;
                for (std::size_t b2 = 0; b2 < ch.nb; ++b2)
                    for (std::size_t a2 = 0; a2 < ch.na; ++a2)
                        p[(a1 * ch.na + a2) * (c.nb1 * ch.nb) + b1 * ch.nb + b2] += w * ch.p_b[b2] * ch.at(r, b2, a2);
            }
    ChainTerms t;
    t.lhs = h_classical(joint(c.na1 * ch.na, c.nb1 * ch.nb, p), alpha, Variant::Up);
    t.first = h_classical(joint(c.na1, c.nb1, p1), alpha, Variant::Up);
    t.inf = memory_channel_inf(ch, alpha);
    return t;
}

// ---------------------------------------------------------------- f-weighted helpers

std::vector<double> random_weights(std::size_t n, Rng& rng) {
    std::vector<double> f(n);
    for (auto& x : f) x = rng.uniform(-1.0, 1.0);
    return f;
}

SamplingProtocol random_protocol(std::size_t outcomes, std::size_t settings, Rng& rng) {
    SamplingProtocol p;
    p.gamma = rng.uniform(0.05, 0.95);
    p.outcomes = outcomes;
    p.settings = settings;
    p.score_bits = 1;
    p.p_gen = rng.index(3) == 0 ? random_conditional(settings, rng) : random_distribution(settings, rng);
    p.p_test = random_distribution(settings, rng);
    p.score.resize(outcomes * settings);
    for (auto& s : p.score) s = static_cast<std::uint32_t>(rng.index(2));
    return p;
}

double fweighted_on_channel(const Instrument& ins, const DensityOperator& omega, const std::vector<double>& f,
                            double alpha) {
    const auto psi = purify(omega, "E");
    const auto out = apply(ins, psi, {0});
    return f_weighted_sup_qb(out, {"A"}, "B", "C", {"E"}, f, alpha);
}

// ---------------------------------------------------------------- two rounds

double gen_entropy_classical(const SamplingProtocol& proto, const ClassicalAttack& at, const Distribution& q,
                             double alpha) {
    double total = 0.0;
    for (std::size_t b = 0; b < proto.settings; ++b) {
        if (proto.p_gen[b] == 0.0) continue;
        double inner = 0.0;
        for (std::size_t r = 0; r < at.memory; ++r) {
            if (q[r] == 0.0) continue;
            double s = 0.0;
            for (std::size_t a = 0; a < proto.outcomes; ++a) s += std::pow(at.p(r, b, a, proto.settings, proto.outcomes), alpha);
            inner += q[r] * s;
        }
        total += proto.p_gen[b] * std::pow(inner, 1.0 / alpha);
    }
    return alpha / (1.0 - alpha) * std::log2(total);
}

Distribution score_marginal(const SamplingProtocol& proto, const ClassicalAttack& at, const Distribution& q) {
    Distribution pc(proto.score_alphabet(), 0.0);
    pc[proto.bottom()] = 1.0 - proto.gamma;
    for (std::size_t b = 0; b < proto.settings; ++b)
        for (std::size_t r = 0; r < at.memory; ++r)
            for (std::size_t a = 0; a < proto.outcomes; ++a)
                pc[proto.score_of(a, b)] +=
                    proto.gamma * proto.p_test[b] * q[r] * at.p(r, b, a, proto.settings, proto.outcomes);
    return pc;
}

}  // namespace

// ---------------------------------------------------------------- config and report

int SuiteConfig::count_for(const std::string& property) const {
    if (auto it = counts.find(property); it != counts.end()) return it->second;
    const auto dot = property.find('.');
    if (dot != std::string::npos)
        if (auto it = counts.find(property.substr(0, dot)); it != counts.end()) return it->second;
    return count;
}

double SuiteConfig::tolerance_for(const std::string& property, double fallback) const {
    if (auto it = tolerances.find(property); it != tolerances.end()) return it->second;
    return fallback;
}

bool SuiteConfig::selected(const std::string& property) const {
    if (only.empty()) return true;
    return std::any_of(only.begin(), only.end(), [&](const std::string& p) { return property.rfind(p, 0) == 0; });
}

void SuiteConfig::validate() const {
    require(count >= 1, ErrorCode::BadInput, "instance count must be at least 1");
    for (const auto& [k, v] : counts) require(v >= 1, ErrorCode::BadInput, "instance count must be at least 1: " + k);
    require(!alphas.empty(), ErrorCode::BadInput, "alpha list is empty");
    for (double a : alphas) check_alpha(a);
    require(max_quantum_dim >= 2, ErrorCode::BadInput, "quantum dimension cap must be at least 2");
    require(max_letters >= 2, ErrorCode::BadInput, "letter cap must be at least 2");
    for (const auto& [k, v] : tolerances) require(v >= 0.0, ErrorCode::BadInput, "negative tolerance: " + k);
}

bool SuiteReport::passed() const {
    return std::all_of(properties.begin(), properties.end(), [](const PropertyResult& p) { return p.passed(); });
}

void SuiteReport::merge(const SuiteReport& other) {
    properties.insert(properties.end(), other.properties.begin(), other.properties.end());
}

const PropertyResult* SuiteReport::find(const std::string& name) const {
    for (const auto& p : properties)
        if (p.name == name) return &p;
    return nullptr;
}

Json to_json(const SuiteReport& r) {
    Json props = Json::array();
    for (const auto& p : r.properties) {
        Json fails = Json::array();
        for (const auto& f : p.failures) fails.push_back({{"index", f.index}, {"margin", f.margin}, {"instance", f.instance}});
        Json j{{"name", p.name},
               {"passed", p.passed()},
               {"seed", p.seed},
               {"instances", p.instances},
               {"tolerance", p.tolerance},
               {"worstMargin", std::isfinite(p.worst_margin) ? Json(p.worst_margin) : Json(nullptr)},
               {"worstIndex", p.worst_index},
               {"failed", p.failed},
               {"seconds", p.seconds},
               {"failures", fails}};
        if (!p.note.empty()) j["note"] = p.note;
        props.push_back(j);
    }
    return {{"schema", kSchemaVersion},
            {"seed", r.seed},
            {"alphas", r.alphas},
            {"passed", r.passed()},
            {"reproduce", "instance i of a property is drawn from Rng::derive(property seed, i)"},
            {"properties", props}};
}

std::vector<std::string> property_names() {
    return {"ordering",
            "ordering.saturation",
            "partial.consistency",
            "partial.data_processing",
            "partial.isometry",
            "partial.subadditivity",
            "variational",
            "decomposition.two_term",
            "decomposition.nu",
            "chain_rule",
            "classical_chain",
            "fweighted.read_and_prepare",
            "fweighted.concavity",
            "fweighted.continuity",
            "fweighted.mixing",
            "fweighted.max_divergence",
            "fweighted.data_processing",
            "two_rounds"};
}

// ---------------------------------------------------------------- checks

SuiteReport check_ordering(const SuiteConfig& cfg) {
    cfg.validate();
    SuiteReport rep;
    rep.seed = cfg.seed;
    rep.alphas = cfg.alphas;
    add_if(rep, cfg, "ordering", 1e-9,
           [&](Rng& rng, std::uint64_t i, Json& inst) { return ordering_instance(cfg, rng, i, inst); });
    add_if(rep, cfg, "ordering.saturation", 1e-9,
           [&](Rng& rng, std::uint64_t, Json& inst) { return saturation_instance(cfg, rng, inst); });
    return rep;
}

SuiteReport check_partial_entropy_properties(const SuiteConfig& cfg) {
    cfg.validate();
    SuiteReport rep;
    rep.seed = cfg.seed;
    rep.alphas = cfg.alphas;
    add_if(rep, cfg, "partial.consistency", 1e-9, [&](Rng& rng, std::uint64_t, Json& inst) {
        const std::size_t nb = pick(rng, 2, cfg.max_letters);
        const std::size_t dc = pick(rng, 2, cfg.max_quantum_dim);
        const auto ab = random_cq({{"B", nb}}, {2}, {"A"}, rng);
        const auto rc = random_density({dc}, 0, rng, {"C"});
        const auto ac = random_density({2, dc}, 0, rng, {"A", "C"});
        const auto pb = random_distribution(nb, rng);
        const auto first = product_with(ab, rc);
        const auto second = CqState({{"B", nb}}, pb, std::vector<DensityOperator>(nb, ac));
        inst["first"] = to_json(first);
        inst["second"] = to_json(second);
        double margin = kInf;
        for (double alpha : cfg.alphas) {
            margin = std::min(margin, -std::abs(partial(cfg, first, {"A"}, {"B"}, {"C"}, alpha) -
                                                h_up(ab, {"A"}, {"B"}, alpha)));
            margin = std::min(margin, -std::abs(partial(cfg, second, {"A"}, {"B"}, {"C"}, alpha) -
                                                h_down(ac, {0}, {1}, alpha)));
        }
        return margin;
    });
    add_if(rep, cfg, "partial.data_processing", 1e-9, [&](Rng& rng, std::uint64_t, Json& inst) {
        const std::size_t nb = pick(rng, 2, cfg.max_letters);
        const std::size_t dc = pick(rng, 2, cfg.max_quantum_dim);
        const auto rho = random_cq({{"B", nb}}, {2, dc}, {"A", "C"}, rng);
        const auto ch = some_channel(dc, cfg.max_quantum_dim, rng);
        const auto out = apply_on(ch, rho, {"C"}, {"C"});
        inst["state"] = to_json(rho);
        inst["channel"] = to_json(ch);
        double margin = kInf;
        for (double alpha : cfg.alphas)
            margin = std::min(margin, partial(cfg, out, {"A"}, {"B"}, {"C"}, alpha) -
                                          partial(cfg, rho, {"A"}, {"B"}, {"C"}, alpha));
        return margin;
    });
    add_if(rep, cfg, "partial.isometry", 1e-9, [&](Rng& rng, std::uint64_t, Json& inst) {
        const std::size_t nb = pick(rng, 2, cfg.max_letters);
        const std::size_t dc = pick(rng, 2, cfg.max_quantum_dim);
        const std::size_t dout = dc + pick(rng, 0, 2);
        const auto rho = random_cq({{"B", nb}}, {2, dc}, {"A", "C"}, rng);
        const auto ch = KrausChannel::isometry(random_isometry(dc, dout, rng), {dc}, {dout});
        const auto out = apply_on(ch, rho, {"C"}, {"C"});
        inst["state"] = to_json(rho);
        inst["channel"] = to_json(ch);
        double margin = kInf;
        for (double alpha : cfg.alphas)
            margin = std::min(margin, -std::abs(partial(cfg, out, {"A"}, {"B"}, {"C"}, alpha) -
                                                partial(cfg, rho, {"A"}, {"B"}, {"C"}, alpha)));
        return margin;
    });
    add_if(rep, cfg, "partial.subadditivity", 1e-9, [&](Rng& rng, std::uint64_t, Json& inst) {
        const std::size_t nb = pick(rng, 2, cfg.max_letters);
        const std::size_t nd = pick(rng, 2, cfg.max_letters);
        const auto rho = random_cq({{"B", nb}, {"D", nd}}, {2, 2}, {"A", "C"}, rng);
        inst["state"] = to_json(rho);
        double margin = kInf;
        for (double alpha : cfg.alphas) {
            const double mid = partial(cfg, rho, {"A"}, {"B"}, {"C"}, alpha);
            const double with_d = partial(cfg, rho, {"A", "D"}, {"B"}, {"C"}, alpha);
            const double cond_d = partial(cfg, rho, {"A"}, {"B"}, {"C", "D"}, alpha);
            margin = std::min({margin, with_d - mid, mid - cond_d});
        }
        return margin;
    });
    return rep;
}

SuiteReport check_variational(const SuiteConfig& cfg) {
    cfg.validate();
    SuiteReport rep;
    rep.seed = cfg.seed;
    rep.alphas = cfg.alphas;
    add_if(rep, cfg, "variational", 1e-6, [&](Rng& rng, std::uint64_t i, Json& inst) {
        const std::size_t nb = pick(rng, 2, 3);
        const auto rho = random_cq({{"B", nb}}, {2, 2}, {"A", "C"}, rng);
        const double alpha = cfg.alphas[i % cfg.alphas.size()];
        inst["state"] = to_json(rho);
        inst["alpha"] = alpha;
        return -std::abs(h_partial(rho, {"A"}, {"B"}, {"C"}, alpha) -
                         h_partial_variational(rho, {"A"}, {"B"}, {"C"}, alpha));
    });
    return rep;
}

SuiteReport check_decomposition(const SuiteConfig& cfg) {
    cfg.validate();
    SuiteReport rep;
    rep.seed = cfg.seed;
    rep.alphas = cfg.alphas;
    add_if(rep, cfg, "decomposition.two_term", 1e-8, [&](Rng& rng, std::uint64_t i, Json& inst) {
        static const std::vector<Dims> shapes{{2, 2, 2}, {1, 2, 2}, {2, 1, 2}, {2, 2, 4}, {2, 4, 2}, {4, 2, 2}, {2, 2, 3}, {3, 2, 2}};
        const auto& d = shapes[i % shapes.size()];
        const auto rho = random_density(d, 0, rng, {"A1", "A2", "B"});
        const auto sigma = random_density({d[2]}, 0, rng).matrix;
        const double alpha = cfg.alphas[rng.index(cfg.alphas.size())];
        inst["state"] = to_json(rho);
        inst["sigma"] = to_json(sigma);
        inst["alpha"] = alpha;
        return -two_term_decomposition_gap(rho, {"A1"}, {"A2"}, {"B"}, sigma, alpha);
    });
    add_if(rep, cfg, "decomposition.nu", 1e-9, [&](Rng& rng, std::uint64_t i, Json& inst) {
        static const std::vector<Dims> shapes{{2, 2, 2}, {2, 2, 3}, {1, 2, 4}, {2, 3, 2}};
        const auto& d = shapes[i % shapes.size()];
        const auto rho = random_density(d, 0, rng, {"A1", "B1", "A2"});
        const auto sigma = random_density({d[1]}, 0, rng).matrix;
        const double alpha = cfg.alphas[rng.index(cfg.alphas.size())];
        inst["state"] = to_json(rho);
        inst["sigma"] = to_json(sigma);
        inst["alpha"] = alpha;
        const auto nu = nu_state(rho, {"A1", "B1"}, {"B1"}, sigma, alpha);
        return -(conditional_operator(nu, {0, 1}) - conditional_operator(rho, {0, 1})).max_abs();
    });
    return rep;
}

SuiteReport check_partial_chain_rule(const SuiteConfig& cfg) {
    cfg.validate();
    SuiteReport rep;
    rep.seed = cfg.seed;
    rep.alphas = cfg.alphas;
    if (!cfg.selected("chain_rule")) return rep;
    std::mutex mu;
    double worst_certificate = 0.0;
    add_if(rep, cfg, "chain_rule", 1e-9, [&](Rng& rng, std::uint64_t i, Json& inst) {
        const auto c = i == 0 ? counterexample_chain() : random_chain(cfg, rng, i % 10 == 1);
        inst = chain_json(c);
        double margin = kInf;
        for (double alpha : cfg.alphas) {
            const auto t = chain_terms(c, alpha);
            margin = std::min(margin, t.lhs - t.first - t.inf.lower);
            std::lock_guard lock(mu);
            worst_certificate = std::max(worst_certificate, t.inf.certificate_gap);
        }
        return margin;
    });
    rep.properties.back().note = "largest certificate gap on the infimum term: " + std::to_string(worst_certificate);
    return rep;
}

SuiteReport check_classical_chain_rule(const SuiteConfig& cfg) {
    cfg.validate();
    SuiteReport rep;
    rep.seed = cfg.seed;
    rep.alphas = cfg.alphas;
    add_if(rep, cfg, "classical_chain", 1e-9, [&](Rng& rng, std::uint64_t i, Json& inst) {
        const bool xor_case = i % 10 == 1;
        const std::size_t na1 = xor_case ? 2 : pick(rng, 2, cfg.max_letters);
        const std::size_t nb1 = pick(rng, 2, cfg.max_letters);
        const std::size_t nb2 = xor_case ? 2 : pick(rng, 2, cfg.max_letters);
        const std::size_t na2 = xor_case ? 2 : pick(rng, 2, cfg.max_letters);
        const auto p1 = random_distribution(na1 * nb1, rng);
        const auto pb2 = random_distribution(nb2, rng);
        // w[((a1 * nb1 + b1) * nb2 + b2) * na2 + a2]
        std::vector<double> w;
        std::vector<std::vector<double>> independent;
        for (std::size_t b2 = 0; b2 < nb2; ++b2) independent.push_back(random_conditional(na2, rng));
        for (std::size_t a1 = 0; a1 < na1; ++a1)
            for (std::size_t b1 = 0; b1 < nb1; ++b1)
                for (std::size_t b2 = 0; b2 < nb2; ++b2) {
                    std::vector<double> row;
                    if (xor_case) {
                        row.assign(2, 0.0);
                        row[a1 ^ b2] = 1.0;
                    } else if (i % 10 == 0) {
                        row = independent[b2];
                    } else {
                        row = random_conditional(na2, rng);
                    }
                    w.insert(w.end(), row.begin(), row.end());
                }
        inst = {{"pA1B1", p1}, {"pB2", pb2}, {"response", w}, {"na1", na1}, {"nb1", nb1}, {"nb2", nb2}, {"na2", na2}};
        std::vector<double> p(na1 * na2 * nb1 * nb2, 0.0);
        for (std::size_t a1 = 0; a1 < na1; ++a1)
            for (std::size_t b1 = 0; b1 < nb1; ++b1)
                for (std::size_t b2 = 0; b2 < nb2; ++b2)
                    for (std::size_t a2 = 0; a2 < na2; ++a2)
                        p[(a1 * na2 + a2) * (nb1 * nb2) + b1 * nb2 + b2] =
                            p1[a1 * nb1 + b1] * pb2[b2] * w[((a1 * nb1 + b1) * nb2 + b2) * na2 + a2];
        double margin = kInf;
        for (double alpha : cfg.alphas) {
            const double lhs = h_classical(joint(na1 * na2, nb1 * nb2, p), alpha, Variant::Down);
            const double first = h_classical(joint(na1, nb1, p1), alpha, Variant::Down);
            double worst_branch = kInf;
            for (std::size_t a1 = 0; a1 < na1; ++a1)
                for (std::size_t b1 = 0; b1 < nb1; ++b1) {
                    if (p1[a1 * nb1 + b1] == 0.0) continue;
                    std::vector<double> q(na2 * nb2);
                    for (std::size_t b2 = 0; b2 < nb2; ++b2)
                        for (std::size_t a2 = 0; a2 < na2; ++a2)
                            q[a2 * nb2 + b2] = pb2[b2] * w[((a1 * nb1 + b1) * nb2 + b2) * na2 + a2];
                    worst_branch = std::min(worst_branch, h_classical(joint(na2, nb2, q), alpha, Variant::Down));
                }
            margin = std::min(margin, lhs - first - worst_branch);
        }
        return margin;
    });
    return rep;
}

SuiteReport check_fweighted_props(const SuiteConfig& cfg) {
    cfg.validate();
    SuiteReport rep;
    rep.seed = cfg.seed;
    rep.alphas = cfg.alphas;
    add_if(rep, cfg, "fweighted.read_and_prepare", 1e-8, [&](Rng& rng, std::uint64_t, Json& inst) {
        const double alpha = cfg.alphas[rng.index(cfg.alphas.size())];
        const std::size_t nc = pick(rng, 2, cfg.max_letters);
        const auto rho = random_cq({{"C", nc}}, {2, 2}, {"A", "B"}, rng);
        const auto f = random_weights(nc, rng);
        const double top = *std::max_element(f.begin(), f.end());
        const double cap = std::max(0.0, 2.0 * top) + 0.2 + rng.uniform(0.0, 1.5);
        const auto sigma = BlockOperator::single(random_density({2}, 0, rng).matrix, {2});
        inst = {{"state", to_json(rho)}, {"f", f}, {"cap", cap}, {"sigma", to_json(sigma.blocks[0])}, {"alpha", alpha}};
        const auto hf = f_weighted(rho, "C", {"A"}, {"B"}, sigma, f, alpha);
        const auto rp = build_read_and_prepare(f, cap, alpha);
        const auto out = apply_read_and_prepare(rp, rho, "C");
        const auto d = divergence_to_identity(out, {"C", "A", "D"}, sigma, alpha);
        return -std::abs(hf.value() + d.value() + cap);
    });
    add_if(rep, cfg, "fweighted.concavity", 1e-9, [&](Rng& rng, std::uint64_t i, Json& inst) {
        const std::size_t nb = pick(rng, 2, 3), nc = pick(rng, 2, 3);
        const auto rho = random_cq({{"B", nb}, {"C", nc}}, {2, 2}, {"A", "E"}, rng);
        auto f1 = random_weights(nc, rng);
        auto f2 = random_weights(nc, rng);
        if (i % 10 == 0) f1.assign(nc, f1[0]), f2.assign(nc, f2[0]);
        std::vector<double> mid(nc);
        for (std::size_t c = 0; c < nc; ++c) mid[c] = 0.5 * (f1[c] + f2[c]);
        inst = {{"state", to_json(rho)}, {"f1", f1}, {"f2", f2}};
        double margin = kInf;
        for (double alpha : cfg.alphas) {
            const double h1 = f_weighted_sup_qb(rho, {"A"}, "B", "C", {"E"}, f1, alpha);
            const double h2 = f_weighted_sup_qb(rho, {"A"}, "B", "C", {"E"}, f2, alpha);
            const double hm = f_weighted_sup_qb(rho, {"A"}, "B", "C", {"E"}, mid, alpha);
            margin = std::min(margin, hm - 0.5 * (h1 + h2));
        }
        return margin;
    });
    add_if(rep, cfg, "fweighted.continuity", 1e-9, [&](Rng& rng, std::uint64_t i, Json& inst) {
        const std::size_t nc = pick(rng, 2, 3);
        const auto rho = random_cq({{"C", nc}}, {2, 2}, {"A", "B"}, rng);
        const auto other = random_cq({{"C", nc}}, {2, 2}, {"A", "B"}, rng);
        const double t = i % 10 == 0 ? 0.0 : std::pow(10.0, -rng.uniform(0.0, 4.0));
        std::vector<double> w(nc);
        std::vector<DensityOperator> conds;
        for (std::size_t c = 0; c < nc; ++c) {
            w[c] = (1 - t) * rho.weights[c] + t * other.weights[c];
            auto m = rho.conditionals[c].matrix * cplx((1 - t) * rho.weights[c]) +
                     other.conditionals[c].matrix * cplx(t * other.weights[c]);
            conds.emplace_back(m * cplx(1.0 / w[c]), rho.quantum_dims(), rho.quantum_labels());
        }
        const CqState tau(rho.registers, w, conds);
        const auto sigma_m = random_density({2}, 0, rng).matrix;
        const auto sigma = BlockOperator::single(sigma_m, {2});
        const auto f = random_weights(nc, rng);
        double cap = 0.0;
        for (double x : f) cap = std::max({cap, 2.0 * x, -x});
        cap += 0.05 + rng.uniform(0.0, 1.0);
        const double eps = trace_distance(rho, tau);
        const double m_sigma = psd_spectrum(sigma_m).back();
        inst = {{"rho", to_json(rho)}, {"tau", to_json(tau)}, {"sigma", to_json(sigma_m)}, {"f", f}, {"M", cap}, {"epsilon", eps}};
        double margin = kInf;
        for (double alpha : cfg.alphas) {
            const double k = 2.0 * static_cast<double>(nc) * std::exp2(std::ceil(2.0 * cap)) / m_sigma;
            const double bound = alpha / (alpha - 1.0) * std::log2(1.0 + eps * std::pow(k, (alpha - 1.0) / alpha));
            const double diff = std::abs(f_weighted(rho, "C", {"A"}, {"B"}, sigma, f, alpha).value() -
                                         f_weighted(tau, "C", {"A"}, {"B"}, sigma, f, alpha).value());
            margin = std::min(margin, bound - diff);
        }
        return margin;
    });
    add_if(rep, cfg, "fweighted.mixing", 1e-9, [&](Rng& rng, std::uint64_t, Json& inst) {
        const std::size_t outcomes = pick(rng, 2, 3), settings = pick(rng, 2, 3);
        const auto family = random_family(outcomes, settings, 2, 1, rng, pick(rng, 1, 2));
        const auto proto = random_protocol(outcomes, settings, rng);
        const auto ins = build_sampling_channel(family, proto);
        const auto w1 = random_density({2}, 0, rng, {"R"});
        const auto w2 = random_density({2}, pick(rng, 1, 2), rng, {"R"});
        const double lambda = rng.uniform();
        const DensityOperator mix(w1.matrix * cplx(lambda) + w2.matrix * cplx(1.0 - lambda), {2}, {"R"});
        const auto f = random_weights(proto.score_alphabet(), rng);
        Json maps = Json::array();
        for (const auto& m : family.maps) maps.push_back(to_json(m));
        inst = {{"family", maps}, {"protocol", to_json(proto)}, {"omega1", to_json(w1)}, {"omega2", to_json(w2)},
                {"lambda", lambda}, {"f", f}};
        double margin = kInf;
        for (double alpha : cfg.alphas) {
            const double h1 = fweighted_on_channel(ins, w1, f, alpha);
            const double h2 = fweighted_on_channel(ins, w2, f, alpha);
            const double hm = fweighted_on_channel(ins, mix, f, alpha);
            margin = std::min(margin, lambda * h1 + (1.0 - lambda) * h2 - hm);
        }
        return margin;
    });
    add_if(rep, cfg, "fweighted.max_divergence", 1e-9, [&](Rng& rng, std::uint64_t, Json& inst) {
        const std::size_t na = pick(rng, 2, cfg.max_letters);
        const std::size_t nb = pick(rng, 1, cfg.max_letters);
        const std::size_t de = pick(rng, 1, cfg.max_quantum_dim);
        const auto rho = random_cq({{"A", na}, {"B", nb}}, {de}, {"E"}, rng, rng.index(2) == 0 ? 0 : pick(rng, 1, de));
        inst["state"] = to_json(rho);
        ComplexMatrix rho_e(de, de);
        for (std::size_t x = 0; x < rho.outcomes(); ++x) rho_e = rho_e + rho.conditionals[x].matrix * cplx(rho.weights[x]);
        const auto ref = kron(ComplexMatrix::identity(nb), rho_e);
        double margin = kInf;
        for (std::size_t a = 0; a < na; ++a) {
            double pa = 0.0;
            for (std::size_t b = 0; b < nb; ++b) pa += rho.weights[a * nb + b];
            if (pa == 0.0) continue;
            // rho_BE^{|a}, block diagonal in b
            ComplexMatrix cond(nb * de, nb * de);
            for (std::size_t b = 0; b < nb; ++b)
                for (std::size_t i = 0; i < de; ++i)
                    for (std::size_t j = 0; j < de; ++j)
                        cond(b * de + i, b * de + j) = rho.weights[a * nb + b] / pa * rho.conditionals[a * nb + b].matrix(i, j);
            const auto dmax = max_divergence(cond, ref);
            margin = std::min(margin, dmax.is_finite() ? -std::log2(pa) - dmax.value() : -kInf);
            for (double alpha : cfg.alphas) {
                const auto d = renyi_divergence(cond, ref, alpha);
                const double lhs = d.is_finite() ? std::exp2((alpha - 1.0) * d.value()) : kInf;
                margin = std::min(margin, std::pow(pa, 1.0 - alpha) - lhs);
            }
        }
        return margin;
    }, 200);
    add_if(rep, cfg, "fweighted.data_processing", 1e-9, [&](Rng& rng, std::uint64_t, Json& inst) {
        const std::size_t nb = pick(rng, 2, 3), nc = pick(rng, 2, 3), de = pick(rng, 2, 3);
        const auto rho = random_cq({{"B", nb}, {"C", nc}}, {2, de}, {"A", "E"}, rng);
        const auto ch = some_channel(de, 3, rng);
        const auto out = apply_on(ch, rho, {"E"}, {"E"});
        const auto f = random_weights(nc, rng);
        inst = {{"state", to_json(rho)}, {"channel", to_json(ch)}, {"f", f}};
        double margin = kInf;
        for (double alpha : cfg.alphas)
            // the divergences shrink under the channel, so the entropy can only grow
            margin = std::min(margin, f_weighted_sup_qb(out, {"A"}, "B", "C", {"E"}, f, alpha) -
                                          f_weighted_sup_qb(rho, {"A"}, "B", "C", {"E"}, f, alpha));
        return margin;
    });
    return rep;
}

// ---------------------------------------------------------------- two rounds

void ClassicalAttack::validate(const SamplingProtocol& proto) const {
    require(memory >= 1, ErrorCode::BadInput, "attack needs at least one memory state");
    require(initial.size() == memory, ErrorCode::AlphabetMismatch, "initial memory distribution has the wrong size");
    require(response.size() == memory * proto.settings * proto.outcomes, ErrorCode::AlphabetMismatch,
            "response table has the wrong size");
    require(update.size() == memory * proto.outcomes * proto.settings, ErrorCode::AlphabetMismatch,
            "memory update table has the wrong size");
    for (auto u : update) require(u < memory, ErrorCode::BadIndex, "memory update out of range");
    double total = 0.0;
    for (double x : initial) {
        require(x >= 0.0, ErrorCode::BadProbability, "negative probability");
        total += x;
    }
    require(std::abs(total - 1.0) < 1e-9, ErrorCode::BadProbability, "initial memory distribution must sum to 1");
    for (std::size_t r = 0; r < memory; ++r)
        for (std::size_t b = 0; b < proto.settings; ++b) {
            double s = 0.0;
            for (std::size_t a = 0; a < proto.outcomes; ++a) {
                const double x = p(r, b, a, proto.settings, proto.outcomes);
                require(x >= 0.0, ErrorCode::BadProbability, "negative response probability");
                s += x;
            }
            require(std::abs(s - 1.0) < 1e-9, ErrorCode::BadProbability, "responses must sum to 1 per memory and setting");
        }
}

Json to_json(const ClassicalAttack& at) {
    return {{"schema", kSchemaVersion}, {"memory", at.memory}, {"initial", at.initial}, {"response", at.response}, {"update", at.update}};
}

ClassicalAttack attack_from_json(const Json& j) {
    try {
        ClassicalAttack at;
        at.memory = j.at("memory").get<std::size_t>();
        at.initial = j.at("initial").get<Distribution>();
        at.response = j.at("response").get<std::vector<double>>();
        at.update = j.at("update").get<std::vector<std::size_t>>();
        return at;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::BadInput, std::string("malformed attack: ") + e.what());
    }
}

Json to_json(const TwoRoundResult& r) {
    return {{"schema", kSchemaVersion}, {"lhsExact", r.lhs_exact}, {"bound", r.bound}, {"hRound", r.h_round},
            {"pOmega", r.p_event}, {"holds", r.holds}};
}

MemoryInfimum memory_infimum(const SamplingProtocol& proto, const ClassicalAttack& attack, const ConstraintSet& cs,
                             double alpha) {
    check_alpha(alpha);
    proto.validate();
    attack.validate(proto);
    require(cs.alphabet == proto.score_alphabet(), ErrorCode::AlphabetMismatch, "constraints must live on the score alphabet");
    const std::size_t m = attack.memory;
    MemoryInfimum best;
    best.value = kInf;
    auto eval = [&](const Distribution& q) {
        const auto pc = score_marginal(proto, attack, q);
        const double hg = gen_entropy_classical(proto, attack, q, alpha);
        double v = kInf;
        try {
            v = inner_inf_v(pc, hg, cs, alpha, proto.bottom()).value;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::Infeasible) throw;
        }
        if (v < best.value) best = {v, q, hg, pc};
        return v;
    };
    if (m == 1) {
        eval({1.0});
    } else {
        const int res = m == 2 ? 200 : m == 3 ? 40 : 16;
        std::vector<int> k(m, 0);
        std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
            if (i + 1 == m) {
                k[i] = left;
                Distribution q(m);
                for (std::size_t j = 0; j < m; ++j) q[j] = static_cast<double>(k[j]) / res;
                eval(q);
                return;
            }
            for (int a = 0; a <= left; ++a) {
                k[i] = a;
                rec(i + 1, left - a);
            }
        };
        rec(0, res);
        double h = 1.0 / res;
        for (; h > 1e-7; h *= 0.5) {
            for (int moves = 0; moves < 100; ++moves) {
                const auto centre = best.q;
                const double before = best.value;
                std::vector<int> off(m - 1, -1);
                while (true) {
                    Distribution q = centre;
                    double last = centre[m - 1];
                    for (std::size_t j = 0; j + 1 < m; ++j) {
                        q[j] += off[j] * h;
                        last -= off[j] * h;
                    }
                    q[m - 1] = last;
                    if (std::all_of(q.begin(), q.end(), [](double x) { return x >= 0.0; })) eval(q);
                    std::size_t j = 0;
                    while (j + 1 < m && off[j] == 1) off[j++] = -1;
                    if (j + 1 >= m) break;
                    ++off[j];
                }
                if (!(best.value < before)) break;
            }
        }
    }
    require(std::isfinite(best.value), ErrorCode::Infeasible, "no memory distribution meets the constraints");
    return best;
}

TwoRoundResult simulate_two_rounds(const SamplingProtocol& proto, const ClassicalAttack& attack, const ConstraintSet& cs,
                                   double alpha) {
    check_alpha(alpha);
    proto.validate();
    attack.validate(proto);
    cs.validate();
    require(cs.alphabet == proto.score_alphabet(), ErrorCode::AlphabetMismatch, "constraints must live on the score alphabet");
    const std::size_t na = proto.outcomes, nb = proto.settings, nc = proto.score_alphabet(), m = attack.memory;
    // A side: (a1, c1, a2, c2); conditioning side: (t1, b1, t2, b2, r0)
    const std::size_t x_size = na * nc * na * nc;
    const std::size_t y_size = 2 * nb * 2 * nb * m;
    std::vector<double> p(x_size * y_size, 0.0);
    auto round = [&](std::size_t r, auto&& emit) {
        for (std::size_t t = 0; t < 2; ++t) {
            const double pt = t == 0 ? 1.0 - proto.gamma : proto.gamma;
            if (pt == 0.0) continue;
            const auto& pb = t == 0 ? proto.p_gen : proto.p_test;
            for (std::size_t b = 0; b < nb; ++b) {
                if (pb[b] == 0.0) continue;
                for (std::size_t a = 0; a < na; ++a) {
                    const double pa = attack.p(r, b, a, nb, na);
                    if (pa == 0.0) continue;
                    const std::size_t c = t == 0 ? proto.bottom() : proto.score_of(a, b);
                    emit(pt * pb[b] * pa, t, b, a, c, attack.update[(r * na + a) * nb + b]);
                }
            }
        }
    };
    double p_event = 0.0;
    for (std::size_t r0 = 0; r0 < m; ++r0) {
        if (attack.initial[r0] == 0.0) continue;
        round(r0, [&](double w1, std::size_t t1, std::size_t b1, std::size_t a1, std::size_t c1, std::size_t r1) {
            round(r1, [&](double w2, std::size_t t2, std::size_t b2, std::size_t a2, std::size_t c2, std::size_t) {
                Distribution freq(nc, 0.0);
                freq[c1] += 0.5;
                freq[c2] += 0.5;
                if (cs.violation(freq) > 1e-12) return;
                const double w = attack.initial[r0] * w1 * w2;
                const std::size_t x = ((a1 * nc + c1) * na + a2) * nc + c2;
                const std::size_t y = (((t1 * nb + b1) * 2 + t2) * nb + b2) * m + r0;
                p[x * y_size + y] += w;
                p_event += w;
            });
        });
    }
    require(p_event > 0.0, ErrorCode::EmptyEvent, "the event has probability zero");
    p_event = std::min(p_event, 1.0);
    for (auto& x : p) x /= p_event;
    TwoRoundResult res;
    res.p_event = p_event;
    res.lhs_exact = h_classical(joint(x_size, y_size, p), alpha, Variant::Up);
    res.h_round = memory_infimum(proto, attack, cs, alpha).value;
    res.bound = finite_size_bound(2.0, res.h_round, p_event, alpha);
    res.holds = res.lhs_exact >= res.bound - 1e-9;
    return res;
}

SuiteReport check_two_rounds(const SuiteConfig& cfg) {
    cfg.validate();
    SuiteReport rep;
    rep.seed = cfg.seed;
    rep.alphas = cfg.alphas;
    add_if(rep, cfg, "two_rounds", 1e-9, [&](Rng& rng, std::uint64_t i, Json& inst) {
        const std::size_t cap = std::min<std::size_t>(cfg.max_letters, 4);
        const std::size_t outcomes = pick(rng, 2, cap);
        const std::size_t settings = pick(rng, 2, cap);
        const auto proto = random_protocol(outcomes, settings, rng);
        ClassicalAttack at;
        at.memory = i % 7 == 0 ? 1 : pick(rng, 1, cap);
        at.initial = random_distribution(at.memory, rng);
        for (std::size_t r = 0; r < at.memory; ++r)
            for (std::size_t b = 0; b < settings; ++b) {
                const auto row = random_conditional(outcomes, rng);
                at.response.insert(at.response.end(), row.begin(), row.end());
            }
        at.update.resize(at.memory * outcomes * settings);
        for (auto& u : at.update) u = rng.index(at.memory);
        auto cs = ConstraintSet::full(proto.score_alphabet());
        if (i % 5 != 0) {
            // a threshold on one score letter, at a level a pair of rounds can reach
            const std::size_t letter = rng.index(2);
            const double level = 0.5 * static_cast<double>(pick(rng, 1, 2)) - 0.25 * rng.uniform();
            if (rng.index(2) == 0) cs.at_least(letter, level);
            else cs.at_most(letter, 1.0 - level);
        }
        const double alpha = cfg.alphas[rng.index(cfg.alphas.size())];
        inst = {{"protocol", to_json(proto)}, {"attack", to_json(at)}, {"constraints", to_json(cs)}, {"alpha", alpha}};
        TwoRoundResult r;
        try {
            r = simulate_two_rounds(proto, at, cs, alpha);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::EmptyEvent && e.code() != ErrorCode::Infeasible) throw;
            cs = ConstraintSet::full(proto.score_alphabet());
            inst["constraints"] = to_json(cs);
            inst["note"] = "event empty under the drawn constraint; the full simplex was used";
            r = simulate_two_rounds(proto, at, cs, alpha);
        }
        inst["lhs"] = r.lhs_exact;
        inst["bound"] = r.bound;
        return r.lhs_exact - r.bound;
    });
    return rep;
}

SuiteReport run_property_suite(const SuiteConfig& cfg) {
    cfg.validate();
    SuiteReport rep;
    rep.seed = cfg.seed;
    rep.alphas = cfg.alphas;
    rep.merge(check_ordering(cfg));
    rep.merge(check_partial_entropy_properties(cfg));
    rep.merge(check_variational(cfg));
    rep.merge(check_decomposition(cfg));
    rep.merge(check_partial_chain_rule(cfg));
    rep.merge(check_classical_chain_rule(cfg));
    rep.merge(check_fweighted_props(cfg));
    rep.merge(check_two_rounds(cfg));
    return rep;
}

}  // namespace renyi
