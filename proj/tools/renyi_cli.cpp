// renyi: command-line front end. Exit status 0 on success, 1 when a checked property fails,
// 2 on usage or input errors.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "CLI11.hpp"
#include "renyi/counterexample.hpp"
#include "renyi/eatrate.hpp"
#include "renyi/errors.hpp"
#include "renyi/io.hpp"
#include "renyi/verify.hpp"

using namespace renyi;

namespace {

constexpr int kPropertyFailure = 1;
constexpr int kUsage = 2;

enum class Format { Table, Json, Csv };

struct Output {
    bool json = false;
    bool csv = false;
    std::string out_path;

    Format format() const { return json ? Format::Json : csv ? Format::Csv : Format::Table; }
    // Writes the document to --out when given, and to stdout in JSON mode.
    void document(const Json& j) const {
        if (!out_path.empty()) write_json_file(out_path, j);
        if (json) std::cout << j.dump(2) << '\n';
    }
};

void add_output_flags(CLI::App* cmd, Output& out) {
    auto* j = cmd->add_flag("--json", out.json, "Print the JSON report instead of a table");
    auto* c = cmd->add_flag("--csv", out.csv, "Print CSV instead of a table");
    j->excludes(c);
    cmd->add_option("--out", out.out_path, "Also write the JSON report to this file");
}

void check_alphas(const std::vector<double>& alphas) {
    require(!alphas.empty(), ErrorCode::BadAlpha, "no alpha given");
    for (double a : alphas) check_alpha(a);
}

// "from:to:points", inclusive
std::vector<double> parse_grid(const std::string& spec) {
    double from = 0, to = 0;
    int points = 0;
    char tail = 0;
    require(std::sscanf(spec.c_str(), "%lf:%lf:%d%c", &from, &to, &points, &tail) == 3, ErrorCode::BadInput,
            "grid must look like from:to:points, got '" + spec + "'");
    require(points >= 1 && points <= 10000, ErrorCode::BadInput, "grid needs 1 to 10000 points");
    std::vector<double> out;
    for (int i = 0; i < points; ++i) out.push_back(points == 1 ? from : from + (to - from) * i / (points - 1));
    return out;
}

// "c=value" with c a score letter or "bottom"
std::pair<std::size_t, double> parse_letter_bound(const std::string& spec, const SamplingProtocol& proto) {
    const auto eq = spec.find('=');
    require(eq != std::string::npos, ErrorCode::BadInput, "expected letter=value, got '" + spec + "'");
    const auto letter = spec.substr(0, eq);
    std::size_t c = 0;
    if (letter == "bottom") {
        c = proto.bottom();
    } else {
        try {
            c = std::stoul(letter);
        } catch (const std::exception&) {
            fail(ErrorCode::BadInput, "bad score letter '" + letter + "'");
        }
    }
    require(c < proto.score_alphabet(), ErrorCode::BadIndex, "score letter out of range: " + letter);
    double v = 0;
    try {
        v = std::stod(spec.substr(eq + 1));
    } catch (const std::exception&) {
        fail(ErrorCode::BadInput, "bad bound in '" + spec + "'");
    }
    return {c, v};
}

struct ConstraintFlags {
    std::string file;
    std::vector<std::string> at_least, at_most;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--constraints", file, "Constraint set JSON for the score frequencies")->check(CLI::ExistingFile);
        cmd->add_option("--at-least", at_least, "Frequency lower bound letter=value (repeatable)");
        cmd->add_option("--at-most", at_most, "Frequency upper bound letter=value (repeatable)");
    }

    // --constraints, else a "constraints" block in the protocol file, else the full simplex; bounds add rows.
    ConstraintSet build(const SamplingProtocol& proto, const Json& proto_doc) const {
        ConstraintSet cs = ConstraintSet::full(proto.score_alphabet());
        if (!file.empty()) {
            cs = constraints_from_json(read_json_file(file));
        } else if (proto_doc.contains("constraints")) {
            Json c = proto_doc.at("constraints");
            if (!c.contains("alphabet")) c["alphabet"] = proto.score_alphabet();
            cs = constraints_from_json(c);
        }
        require(cs.alphabet == proto.score_alphabet(), ErrorCode::AlphabetMismatch,
                "constraints must live on the score alphabet of the protocol");
        for (const auto& s : at_least) {
            const auto [c, v] = parse_letter_bound(s, proto);
            cs.at_least(c, v);
        }
        for (const auto& s : at_most) {
            const auto [c, v] = parse_letter_bound(s, proto);
            cs.at_most(c, v);
        }
        check_nonempty(cs);
        return cs;
    }
};

Labels all_registers(const CqState& s) {
    Labels out;
    for (const auto& r : s.registers) out.push_back(r.label);
    for (const auto& l : s.quantum_labels()) out.push_back(l);
    return out;
}

std::string join(const Labels& l) {
    std::string s;
    for (std::size_t i = 0; i < l.size(); ++i) s += (i ? "," : "") + l[i];
    return s;
}

BellFunctional load_functional(const std::string& name) {
    if (name == "chsh" || name == "CHSH") return chsh_functional();
    return bell_from_json(read_json_file(name));
}

// ---------------------------------------------------------------- entropy

struct EntropyArgs {
    std::string state;
    Labels target, cond, down;
    std::vector<double> alphas{2.0};
    std::string kind = "all";
    Output out;
};

int run_entropy(const EntropyArgs& a) {
    check_alphas(a.alphas);
    const auto rho = state_from_json(read_json_file(a.state));
    const auto regs = all_registers(rho);
    auto has = [&](const std::string& l) { return std::find(regs.begin(), regs.end(), l) != regs.end(); };
    Labels target = a.target;
    if (target.empty()) {
        require(has("A"), ErrorCode::BadPartition, "no register named A; pass --target");
        target = {"A"};
    }
    Labels down = a.down;
    if (down.empty()) {
        for (const auto& l : regs)
            if (std::find(target.begin(), target.end(), l) == target.end() &&
                std::find(a.cond.begin(), a.cond.end(), l) == a.cond.end())
                down.push_back(l);
    }
    Labels conditioning = a.cond;
    conditioning.insert(conditioning.end(), down.begin(), down.end());

    std::vector<std::string> kinds;
    if (a.kind == "all") kinds = {"down", "partial", "up"};
    else kinds = {a.kind};

    Json rows = Json::array();
    for (double alpha : a.alphas)
        for (const auto& k : kinds) {
            double v = 0;
            if (k == "down") v = h_down(rho, target, conditioning, alpha);
            else if (k == "up") v = h_up(rho, target, conditioning, alpha);
            else v = h_partial(rho, target, a.cond, down, alpha);
            rows.push_back({{"alpha", alpha}, {"kind", k}, {"value", v}});
        }
    const Json doc{{"schema", kSchemaVersion}, {"state", a.state},          {"target", target},
                   {"up", a.cond},             {"down", down},              {"rows", rows}};
    a.out.document(doc);
    if (a.out.format() == Format::Csv) {
        std::cout << "alpha,kind,value\n";
        for (const auto& r : rows) fmt::print("{},{},{:.12g}\n", r["alpha"].get<double>(), r["kind"].get<std::string>(), r["value"].get<double>());
    } else if (a.out.format() == Format::Table) {
        fmt::print("H({} | {}) with {} optimised and {} fixed\n", join(target), join(conditioning),
                   a.cond.empty() ? "-" : join(a.cond), down.empty() ? "-" : join(down));
        fmt::print("{:>8}  {:<8}  {:>14}\n", "alpha", "kind", "bits");
        for (const auto& r : rows)
            fmt::print("{:>8.4g}  {:<8}  {:>14.10f}\n", r["alpha"].get<double>(), r["kind"].get<std::string>(), r["value"].get<double>());
    }
    return 0;
}

// ---------------------------------------------------------------- counterexample

struct CounterexampleArgs {
    std::vector<double> alphas{1.5};
    std::string grid;
    Output out;
};

int run_counterexample(const CounterexampleArgs& a) {
    std::vector<double> alphas = a.grid.empty() ? a.alphas : parse_grid(a.grid);
    check_alphas(alphas);
    std::vector<CounterexampleReport> reports;
    Json rows = Json::array();
    for (double alpha : alphas) {
        reports.push_back(ce_report(alpha));
        rows.push_back(to_json(reports.back()));
    }
    a.out.document({{"schema", kSchemaVersion}, {"reports", rows}});
    if (a.out.format() == Format::Csv) {
        std::cout << "alpha,lhs,first_term,inf_up,rhs,violated,h_down_lhs,h_down_rhs,saturation_gap\n";
        for (const auto& r : reports)
            fmt::print("{},{:.12g},{:.12g},{:.12g},{:.12g},{},{:.12g},{:.12g},{:.3g}\n", r.alpha, r.lhs, r.first_term,
                       r.inf_up, r.rhs, r.violated ? 1 : 0, r.h_down_lhs, r.h_down_rhs, r.saturation_gap);
    } else if (a.out.format() == Format::Table) {
        std::cout << "Two-round chain rule with the optimised entropy (bits)\n";
        fmt::print("{:>7}  {:>9}  {:>9}  {:>9}  {:>9}  {:<9}  {:>12}\n", "alpha", "lhs", "first", "inf", "sum",
                   "verdict", "H-down gap");
        for (const auto& r : reports)
            fmt::print("{:>7.4g}  {:>9.5f}  {:>9.5f}  {:>9.5f}  {:>9.5f}  {:<9}  {:>12.3e}\n", r.alpha, r.lhs,
                       r.first_term, r.inf_up, r.rhs, r.violated ? "VIOLATED" : "holds", r.saturation_gap);
    }
    return 0;
}

// ---------------------------------------------------------------- verify

struct VerifyArgs {
    SuiteConfig cfg;
    std::vector<std::string> only;
    std::string fault = "none";
    Output out;
};

int run_verify(VerifyArgs a) {
    a.cfg.only = a.only;
    if (a.fault == "off-by-base") a.cfg.fault = Fault::OffByBase;
    for (const auto& o : a.only) {
        const auto names = property_names();
        const bool known = std::any_of(names.begin(), names.end(), [&](const std::string& n) { return n.rfind(o, 0) == 0; });
        require(known, ErrorCode::BadInput, "no property starts with '" + o + "'");
    }
    a.cfg.validate();
    const auto rep = run_property_suite(a.cfg);
    Json doc = to_json(rep);
    doc["config"] = {{"count", a.cfg.count},
                     {"maxQuantumDim", a.cfg.max_quantum_dim},
                     {"maxLetters", a.cfg.max_letters},
                     {"only", a.only},
                     {"fault", a.fault}};
    a.out.document(doc);
    if (a.out.format() == Format::Csv) {
        std::cout << "property,instances,failed,worst_margin,tolerance,seconds\n";
        for (const auto& p : rep.properties)
            fmt::print("{},{},{},{:.6g},{:.3g},{:.3f}\n", p.name, p.instances, p.failed, p.worst_margin, p.tolerance, p.seconds);
    } else if (a.out.format() == Format::Table) {
        fmt::print("seed {}\n", rep.seed);
        fmt::print("{:<28}  {:>6}  {:>6}  {:>12}  {:>8}  {:>8}  {}\n", "property", "count", "failed", "worst margin",
                   "tol", "seconds", "");
        for (const auto& p : rep.properties) {
            fmt::print("{:<28}  {:>6}  {:>6}  {:>12.3e}  {:>8.1e}  {:>8.2f}  {}\n", p.name, p.instances, p.failed,
                       p.worst_margin, p.tolerance, p.seconds, p.passed() ? "ok" : "FAIL");
            for (const auto& f : p.failures) {
                std::string why = f.instance.contains("error") ? f.instance["error"].get<std::string>() : "";
                fmt::print("    instance {} margin {:.3e} {}\n", f.index, f.margin, why);
            }
        }
        fmt::print("{}\n", rep.passed() ? "all properties hold" : "some properties FAILED (reproducers in the JSON report)");
    }
    return rep.passed() ? 0 : kPropertyFailure;
}

// ---------------------------------------------------------------- rate

struct RateArgs {
    std::string proto;
    std::vector<double> alphas{2.0};
    double n = 1e6;
    double p_omega = 0.99;
    double epsilon = 1e-10;
    std::string curve;
    std::string model = "mixed";
    SearchOptions search;
    ConstraintFlags constraints;
    Output out;
};

int run_rate(RateArgs a) {
    check_alphas(a.alphas);
    require(a.n >= 1, ErrorCode::BadInput, "--n must be at least 1");
    require(a.p_omega > 0 && a.p_omega <= 1, ErrorCode::BadProbability, "--pomega must lie in (0, 1]");
    require(a.epsilon > 0 && a.epsilon < 1, ErrorCode::BadEpsilon, "--epsilon must lie in (0, 1)");
    const Json doc = read_json_file(a.proto);
    const auto proto = protocol_from_json(doc);
    const auto cs = a.constraints.build(proto, doc);
    a.search.model = a.model == "pure" ? StateModel::Pure : StateModel::Mixed;

    auto solve = [&](double alpha) {
        auto r = optimize_strategy(proto, cs, alpha, a.search);
        r.finite_size = finite_size(a.n, r.h_alpha, a.p_omega, alpha, a.epsilon);
        return r;
    };
    std::vector<RateReport> reports;
    for (double alpha : a.alphas) reports.push_back(solve(alpha));
    std::vector<RateReport> curve;
    if (!a.curve.empty() || a.out.format() == Format::Csv) {
        const auto grid = parse_grid(a.curve.empty() ? "1.1:3:8" : a.curve);
        check_alphas(grid);
        for (double alpha : grid) curve.push_back(solve(alpha));
    }

    Json rows = Json::array();
    for (const auto& r : reports) rows.push_back(to_json(r));
    Json curve_rows = Json::array();
    for (const auto& r : curve)
        curve_rows.push_back({{"alpha", r.alpha}, {"hAlpha", r.h_alpha}, {"totalBits", r.finite_size->total_bits},
                              {"keyLength", r.finite_size->key_length}});
    a.out.document({{"schema", kSchemaVersion},
                    {"protocol", to_json(proto)},
                    {"constraints", to_json(cs)},
                    {"seed", a.search.seed},
                    {"restarts", a.search.restarts},
                    {"model", a.model},
                    {"reports", rows},
                    {"curve", curve_rows}});
    if (a.out.format() == Format::Csv) {
        std::cout << "alpha,h_alpha,total_bits,key_length\n";
        for (const auto& r : curve)
            fmt::print("{},{:.12g},{:.12g},{}\n", r.alpha, r.h_alpha, r.finite_size->total_bits, r.finite_size->key_length);
    } else if (a.out.format() == Format::Table) {
        fmt::print("best attack found over {} restarts (seed {}); h is an upper bound on the infimum\n",
                   a.search.restarts, a.search.seed);
        fmt::print("{:>7}  {:>10}  {:>10}  {:>10}  {:>14}  {:>12}  {:>9}\n", "alpha", "h", "h gen", "CHSH", "n h - penalty",
                   "key bits", "KKT");
        for (const auto& r : reports)
            fmt::print("{:>7.4g}  {:>10.6f}  {:>10.6f}  {:>10.6f}  {:>14.6g}  {:>12}  {:>9.1e}\n", r.alpha, r.h_alpha,
                       r.h_gen, r.chsh_value, r.finite_size->total_bits, r.finite_size->key_length, r.kkt_residual);
        if (!curve.empty()) {
            std::cout << "\nalpha grid\n";
            for (const auto& r : curve) fmt::print("{:>7.4g}  {:>10.6f}\n", r.alpha, r.h_alpha);
        }
    }
    return 0;
}

// ---------------------------------------------------------------- compare

struct CompareArgs {
    std::string strategy;
    std::string bell;
    std::vector<double> alphas{1.5, 2.0, 3.0};
    std::vector<double> p_b;
    std::string outputs = "alice";
    int restarts = 16;
    std::uint64_t seed = 7;
    Output out;
};

int run_compare(const CompareArgs& a) {
    check_alphas(a.alphas);
    require(!a.strategy.empty() || !a.bell.empty(), ErrorCode::BadInput, "pass --strategy or --bell");
    TwoQubitStrategy s;
    Json source;
    if (!a.strategy.empty()) {
        s = strategy_from_json(read_json_file(a.strategy));
        source = {{"strategy", a.strategy}};
    } else {
        const auto f = load_functional(a.bell);
        s = best_bell_strategy(f, a.restarts, a.seed);
        source = {{"bell", f.name}, {"bellValue", bell_value(s, f)}, {"restarts", a.restarts}, {"seed", a.seed}};
    }
    Distribution p_b = a.p_b;
    if (p_b.empty()) p_b.assign(s.nx() * s.ny(), 1.0 / static_cast<double>(s.nx() * s.ny()));
    const auto outputs = a.outputs == "both" ? OutputSelection::Both : OutputSelection::Alice;
    const auto rows = compare_entropies(s, p_b, a.alphas, outputs);
    Json jr = Json::array();
    for (const auto& r : rows) jr.push_back(to_json(r));
    a.out.document({{"schema", kSchemaVersion}, {"source", source}, {"strategy", to_json(s)}, {"pB", p_b}, {"outputs", a.outputs}, {"rows", jr}});
    if (a.out.format() == Format::Csv) {
        std::cout << "alpha,h_down,h_partial,gap,asymmetry\n";
        for (const auto& r : rows) fmt::print("{},{:.12g},{:.12g},{:.6g},{:.6g}\n", r.alpha, r.h_down, r.h_partial, r.gap, r.asymmetry);
    } else if (a.out.format() == Format::Table) {
        if (source.contains("bellValue")) fmt::print("{} value of the strategy: {:.6f}\n", source["bell"].get<std::string>(), source["bellValue"].get<double>());
        fmt::print("{:>7}  {:>12}  {:>12}  {:>11}  {:>11}\n", "alpha", "H-down", "optimised B", "gap", "asymmetry");
        for (const auto& r : rows)
            fmt::print("{:>7.4g}  {:>12.8f}  {:>12.8f}  {:>11.3e}  {:>11.3e}\n", r.alpha, r.h_down, r.h_partial, r.gap, r.asymmetry);
    }
    return 0;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
    std::string proto, attack;
    double alpha = 2.0;
    bool random = false;
    int count = 200;
    std::uint64_t seed = 1;
    ConstraintFlags constraints;
    Output out;
};

int run_simulate(const SimulateArgs& a) {
    check_alpha(a.alpha);
    if (a.random) {
        SuiteConfig cfg;
        cfg.seed = a.seed;
        cfg.count = a.count;
        cfg.alphas = {a.alpha};
        cfg.only = {"two_rounds"};
        const auto rep = check_two_rounds(cfg);
        a.out.document(to_json(rep));
        const auto& p = rep.properties.front();
        if (a.out.format() == Format::Table)
            fmt::print("{} random attacks, {} with bound above the exact entropy, smallest slack {:.4e}\n", p.instances,
                       p.failed, p.worst_margin);
        else if (a.out.format() == Format::Csv)
            fmt::print("instances,failed,worst_margin\n{},{},{:.6g}\n", p.instances, p.failed, p.worst_margin);
        return rep.passed() ? 0 : kPropertyFailure;
    }
    require(!a.proto.empty() && !a.attack.empty(), ErrorCode::BadInput, "pass --proto and --attack, or --random");
    const Json doc = read_json_file(a.proto);
    const auto proto = protocol_from_json(doc);
    const auto attack = attack_from_json(read_json_file(a.attack));
    const auto cs = a.constraints.build(proto, doc);
    const auto r = simulate_two_rounds(proto, attack, cs, a.alpha);
    Json j = to_json(r);
    j["alpha"] = a.alpha;
    j["constraints"] = to_json(cs);
    a.out.document(j);
    if (a.out.format() == Format::Csv) {
        fmt::print("alpha,lhs_exact,bound,h_round,p_omega,holds\n{},{:.12g},{:.12g},{:.12g},{:.12g},{}\n", a.alpha,
                   r.lhs_exact, r.bound, r.h_round, r.p_event, r.holds ? 1 : 0);
    } else if (a.out.format() == Format::Table) {
        fmt::print("exact two-round entropy  {:.8f}\n", r.lhs_exact);
        fmt::print("accumulated bound        {:.8f}  (2 x {:.8f}, p_omega {:.6g})\n", r.bound, r.h_round, r.p_event);
        fmt::print("{}\n", r.holds ? "bound holds" : "BOUND EXCEEDS THE EXACT ENTROPY");
    }
    return r.holds ? 0 : kPropertyFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Renyi conditional entropies, chain-rule checks and device-independent rates"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("renyi ") + RENYI_VERSION + ", schema " + kSchemaVersion);

    const auto seed_help = "Seed (defaults to $RENYI_SEED)";

    EntropyArgs ent;
    auto* c_ent = app.add_subcommand("entropy", "Conditional entropies of a state file");
    c_ent->add_option("--state", ent.state, "State JSON (density operator or cq state)")->required()->check(CLI::ExistingFile);
    c_ent->add_option("--target", ent.target, "Registers whose entropy is measured (default A)")->delimiter(',');
    c_ent->add_option("--cond", ent.cond, "Classical conditioning registers optimised over (the up side)")->delimiter(',');
    c_ent->add_option("--down", ent.down, "Conditioning registers kept fixed (default: all others)")->delimiter(',');
    c_ent->add_option("--alpha", ent.alphas, "Orders, comma separated")->delimiter(',');
    c_ent->add_option("--kind", ent.kind, "up, down, partial or all")->check(CLI::IsMember({"up", "down", "partial", "all"}));
    add_output_flags(c_ent, ent.out);

    CounterexampleArgs ce;
    auto* c_ce = app.add_subcommand("counterexample", "Two-round chain-rule counterexample");
    auto* ce_alpha = c_ce->add_option("--alpha", ce.alphas, "Orders, comma separated")->delimiter(',');
    c_ce->add_option("--grid", ce.grid, "Alpha grid from:to:points")->excludes(ce_alpha);
    add_output_flags(c_ce, ce.out);

    VerifyArgs ver;
    auto* c_ver = app.add_subcommand("verify", "Seeded property suite");
    c_ver->add_option("--seed", ver.cfg.seed, seed_help)->envname("RENYI_SEED");
    c_ver->add_option("--count", ver.cfg.count, "Instances per property")->check(CLI::Range(1, 1000000));
    c_ver->add_option("--alpha", ver.cfg.alphas, "Orders, comma separated")->delimiter(',');
    c_ver->add_option("--only", ver.only, "Run properties with these name prefixes")->delimiter(',');
    c_ver->add_option("--threads", ver.cfg.threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
    c_ver->add_option("--max-dim", ver.cfg.max_quantum_dim, "Largest quantum conditioning dimension")->check(CLI::Range(2, 8));
    c_ver->add_option("--max-letters", ver.cfg.max_letters, "Largest classical alphabet")->check(CLI::Range(2, 8));
    c_ver->add_option("--fault", ver.fault, "Inject a known bug to check that the suite catches it")
        ->check(CLI::IsMember({"none", "off-by-base"}))
        ->group("");
    add_output_flags(c_ver, ver.out);

    RateArgs rate;
    auto* c_rate = app.add_subcommand("rate", "Single-round rate of a sampling protocol and the finite-size bound");
    c_rate->add_option("--proto", rate.proto, "Protocol JSON")->required()->check(CLI::ExistingFile);
    c_rate->add_option("--alpha", rate.alphas, "Orders, comma separated")->delimiter(',');
    c_rate->add_option("--n", rate.n, "Number of rounds");
    c_rate->add_option("--pomega", rate.p_omega, "Probability of not aborting");
    c_rate->add_option("--epsilon", rate.epsilon, "Security parameter of the key length");
    c_rate->add_option("--restarts", rate.search.restarts, "Random restarts of the attack search")->check(CLI::Range(1, 100000));
    c_rate->add_option("--seed", rate.search.seed, seed_help)->envname("RENYI_SEED");
    c_rate->add_option("--model", rate.model, "Attack state model: pure or mixed")->check(CLI::IsMember({"pure", "mixed"}));
    c_rate->add_option("--threads", rate.search.threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
    c_rate->add_option("--curve", rate.curve, "Alpha grid from:to:points for the CSV rate curve");
    rate.constraints.add_to(c_rate);
    add_output_flags(c_rate, rate.out);

    CompareArgs cmp;
    auto* c_cmp = app.add_subcommand("compare", "H-down against the optimised-B entropy for a strategy");
    auto* cmp_s = c_cmp->add_option("--strategy", cmp.strategy, "Strategy JSON")->check(CLI::ExistingFile);
    c_cmp->add_option("--bell", cmp.bell, "chsh or a functional JSON; compares the best strategy found")->excludes(cmp_s);
    c_cmp->add_option("--alpha", cmp.alphas, "Orders, comma separated")->delimiter(',');
    c_cmp->add_option("--pb", cmp.p_b, "Setting distribution, comma separated (default uniform)")->delimiter(',');
    c_cmp->add_option("--outputs", cmp.outputs, "alice or both")->check(CLI::IsMember({"alice", "both"}));
    c_cmp->add_option("--restarts", cmp.restarts, "Restarts of the Bell-value search")->check(CLI::Range(1, 100000));
    c_cmp->add_option("--seed", cmp.seed, seed_help)->envname("RENYI_SEED");
    add_output_flags(c_cmp, cmp.out);

    SimulateArgs sim;
    auto* c_sim = app.add_subcommand("simulate", "Exact two-round check of the accumulated bound");
    c_sim->add_option("--proto", sim.proto, "Protocol JSON")->check(CLI::ExistingFile);
    c_sim->add_option("--attack", sim.attack, "Classical attack JSON")->check(CLI::ExistingFile);
    c_sim->add_option("--alpha", sim.alpha, "Order");
    c_sim->add_flag("--random", sim.random, "Check random protocols and attacks instead");
    c_sim->add_option("--count", sim.count, "Random instances")->check(CLI::Range(1, 1000000));
    c_sim->add_option("--seed", sim.seed, seed_help)->envname("RENYI_SEED");
    sim.constraints.add_to(c_sim);
    add_output_flags(c_sim, sim.out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kUsage;
    }

    try {
        if (c_ent->parsed()) return run_entropy(ent);
        if (c_ce->parsed()) return run_counterexample(ce);
        if (c_ver->parsed()) return run_verify(ver);
        if (c_rate->parsed()) return run_rate(rate);
        if (c_cmp->parsed()) return run_compare(cmp);
        if (c_sim->parsed()) return run_simulate(sim);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        switch (e.code()) {
            case ErrorCode::NoConvergence:
                return kPropertyFailure;
            default:
                return kUsage;
        }
    }
    return kUsage;
}
