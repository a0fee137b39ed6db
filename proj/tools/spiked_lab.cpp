// spiked_lab: theory calculators, single-instance demos and experiment runs.
//
// Exit codes: 0 success, 1 usage error, 2 runtime failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spiked/estimators.hpp"
#include "spiked/harness/config.hpp"
#include "spiked/harness/records.hpp"
#include "spiked/harness/runner.hpp"
#include "spiked/model.hpp"
#include "spiked/rng.hpp"
#include "spiked/theory.hpp"

namespace th = spiked::theory;
namespace hs = spiked::harness;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

int g_precision = 6;

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", g_precision, x);
    return buf;
}

// "3..5,10,100" -> {3,4,5,10,100}
std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) throw UsageError("empty entry in list '" + s + "'");
        try {
            const auto dots = item.find("..");
            if (dots == std::string::npos) {
                std::size_t used = 0;
                out.push_back(std::stoi(item, &used));
                if (used != item.size()) throw std::invalid_argument(item);
            } else {
                const int a = std::stoi(item.substr(0, dots));
                const int b = std::stoi(item.substr(dots + 2));
                if (b < a) throw std::invalid_argument(item);
                for (int v = a; v <= b; ++v) out.push_back(v);
            }
        } catch (const std::logic_error&) {
            throw UsageError("bad integer list entry '" + item + "'");
        }
    }
    return out;
}

std::vector<double> parse_real_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size() || !std::isfinite(out.back())) throw std::invalid_argument(item);
        } catch (const std::logic_error&) {
            throw UsageError("bad number '" + item + "'");
        }
    }
    if (out.empty()) throw UsageError("empty list");
    return out;
}

void check_k(int k, int lo = 2, int hi = 1000) {
    if (k < lo || k > hi)
        throw UsageError("k = " + std::to_string(k) + " out of range [" + std::to_string(lo) + ", " +
                         std::to_string(hi) + "]");
}

void check_beta(double beta) {
    if (!(beta >= 0) || !std::isfinite(beta)) throw UsageError("beta must be finite and >= 0");
}

int default_workers() {
    if (const char* env = std::getenv("SPIKED_LAB_WORKERS")) {
        const int w = std::atoi(env);
        if (w > 0) return w;
    }
    return 1;
}

struct TheoryArgs {
    std::string k = "3";
    std::string beta = "3";
    double gamma = 0.0;
    int steps = 50;
    double n = 100;
    double dot = 0.0;
    double xmin = 0.0;
    double xmax = 6.0;
    int points = 121;
};

void cmd_mu(const TheoryArgs& a) {
    std::cout << "k,mu_k\n";
    for (int k : parse_int_list(a.k)) {
        check_k(k);
        std::cout << k << ',' << fmt(th::mu_k(k)) << '\n';
    }
}

void cmd_omega(const TheoryArgs& a) {
    std::cout << "k,omega_k\n";
    for (int k : parse_int_list(a.k)) {
        check_k(k, 3);
        std::cout << k << ',' << fmt(th::omega_k(k)) << '\n';
    }
}

std::string opt_fmt(const std::optional<double>& x) { return x ? fmt(*x) : ""; }

void cmd_fixed_points(const TheoryArgs& a) {
    std::cout << "k,beta,x_lo,x_hi,x_star,omega\n";
    for (int k : parse_int_list(a.k)) {
        check_k(k, 3);
        for (double beta : parse_real_list(a.beta)) {
            check_beta(beta);
            const th::FixedPoints fp = th::fixed_points(beta, k);
            std::cout << k << ',' << fmt(beta) << ',' << opt_fmt(fp.x_lo) << ','
                      << opt_fmt(fp.x_hi) << ',' << fmt(fp.x_star) << ',' << fmt(fp.omega) << '\n';
        }
    }
}

void cmd_gamma_star(const TheoryArgs& a) {
    std::vector<std::string> rows;
    for (int k : parse_int_list(a.k)) {
        check_k(k, 3);
        for (double beta : parse_real_list(a.beta)) {
            check_beta(beta);
            rows.push_back(std::to_string(k) + ',' + fmt(beta) + ',' + fmt(th::gamma_star(beta, k)));
        }
    }
    std::cout << "k,beta,gamma_star\n";
    for (const auto& r : rows) std::cout << r << '\n';
}

void cmd_se(const TheoryArgs& a) {
    if (a.steps < 1) throw UsageError("--steps must be >= 1");
    if (!(a.gamma >= 0)) throw UsageError("--gamma must be >= 0");
    const auto ks = parse_int_list(a.k);
    const auto betas = parse_real_list(a.beta);
    std::cout << "k,beta,t,tau,correlation\n";
    for (int k : ks) {
        check_k(k);
        for (double beta : betas) {
            check_beta(beta);
            const th::SETrajectory se = th::state_evolution(beta, k, a.gamma, a.steps);
            for (std::size_t t = 0; t < se.taus.size(); ++t)
                std::cout << k << ',' << fmt(beta) << ',' << t << ',' << fmt(se.taus[t]) << ','
                          << fmt(se.correlation(t)) << '\n';
        }
    }
}

void cmd_sf_bound(const TheoryArgs& a) {
    std::cout << "k,beta,sf_upper\n";
    for (int k : parse_int_list(a.k)) {
        check_k(k);
        for (double beta : parse_real_list(a.beta)) {
            check_beta(beta);
            std::cout << k << ',' << fmt(beta) << ',' << fmt(th::sudakov_fernique_upper(beta, k))
                      << '\n';
        }
    }
}

void cmd_kl_bound(const TheoryArgs& a) {
    if (!(a.n >= 1)) throw UsageError("--n must be >= 1");
    if (std::abs(a.dot) > 1) throw UsageError("--dot must lie in [-1, 1]");
    std::cout << "k,n,beta,dot,kl_bound\n";
    for (int k : parse_int_list(a.k)) {
        check_k(k);
        for (double beta : parse_real_list(a.beta)) {
            check_beta(beta);
            std::cout << k << ',' << fmt(a.n) << ',' << fmt(beta) << ',' << fmt(a.dot) << ','
                      << fmt(th::kl_bound(beta, a.n, k, a.dot)) << '\n';
        }
    }
}

void cmd_g_plot(const TheoryArgs& a) {
    if (a.points < 2) throw UsageError("--points must be >= 2");
    if (!(a.xmax > a.xmin)) throw UsageError("--xmax must exceed --xmin");
    const auto ks = parse_int_list(a.k);
    std::cout << "k,x,g_k\n";
    for (int k : ks) {
        check_k(k);
        for (int i = 0; i < a.points; ++i) {
            const double x = a.xmin + (a.xmax - a.xmin) * i / (a.points - 1);
            std::cout << k << ',' << fmt(x) << ',' << fmt(th::g_k(x, k)) << '\n';
        }
    }
}

struct DemoArgs {
    int k = 3;
    std::size_t n = 50;
    double beta = 3.0;
    std::string algo = "rec-unfold";
    std::uint64_t seed = 1;
    double gamma = 0.0;
    int max_iter = 100;
    double tol = 1e-8;
    int restarts = 10;
};

int cmd_demo(const DemoArgs& a) {
    check_k(a.k, 2, 6);
    check_beta(a.beta);
    if (a.n < 1) throw UsageError("--n must be >= 1");
    const auto algo = hs::parse_algorithm(a.algo);
    if (!algo) throw UsageError("unknown algorithm '" + a.algo + "'");
    const bool psd_based = *algo == hs::Algorithm::psd || *algo == hs::Algorithm::power_psd;
    if (psd_based && a.k != 3) throw UsageError("psd algorithms require k = 3");

    spiked::Rng rng(a.seed);
    const auto start = std::chrono::steady_clock::now();
    const spiked::SpikedInstance inst = spiked::sample_spiked(a.k, a.n, a.beta, rng);
    const spiked::IterOptions opt{a.max_iter, a.tol};
    const std::span<const double> truth = inst.v0;
    spiked::EstimatorResult r;
    using spiked::Initializer;
    using spiked::Iterator;
    switch (*algo) {
        case hs::Algorithm::unfold: r = spiked::unfold(inst.x, rng, truth); break;
        case hs::Algorithm::rec_unfold: r = spiked::recursive_unfold(inst.x, rng, truth); break;
        case hs::Algorithm::psd: r = spiked::psd_constrained_pca(inst.x, rng, opt, truth); break;
        case hs::Algorithm::power_random:
            r = spiked::warm_start(inst.x, Initializer::random, Iterator::power, rng, opt, truth);
            break;
        case hs::Algorithm::power_unfold:
            r = spiked::warm_start(inst.x, Initializer::unfold, Iterator::power, rng, opt, truth);
            break;
        case hs::Algorithm::power_rec_unfold:
            r = spiked::warm_start(inst.x, Initializer::rec_unfold, Iterator::power, rng, opt, truth);
            break;
        case hs::Algorithm::power_psd:
            r = spiked::warm_start(inst.x, Initializer::psd, Iterator::power, rng, opt, truth);
            break;
        case hs::Algorithm::amp: {
            const spiked::SideInfo y = spiked::sample_side_info(inst.v0, a.gamma, rng);
            r = spiked::amp(inst.x, y.y, opt, truth);
            break;
        }
        case hs::Algorithm::ml: r = spiked::ml_bruteforce(inst.x, a.restarts, rng, opt, truth); break;
    }
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    std::cout << "algorithm " << hs::algorithm_name(*algo) << '\n'
              << "correlation " << fmt(r.correlation) << '\n'
              << "loss " << fmt(r.loss) << '\n'
              << "iterations " << r.iterations << '\n'
              << "rayleigh " << fmt(r.rayleigh) << '\n'
              << "converged " << (r.converged ? 1 : 0) << '\n';
    // Timing varies run to run; keep it off stdout so reports compare equal.
    std::cerr << "wall_ms " << fmt(ms) << '\n';
    return 0;
}

int cmd_run(const std::string& config_path, const std::string& out_override, int workers) {
    hs::ExperimentConfig cfg;
    try {
        cfg = hs::load_config(config_path);
    } catch (const hs::ConfigError& e) {
        std::cerr << "invalid config " << config_path << ":\n";
        for (const auto& p : e.problems) std::cerr << "  " << p << '\n';
        return 1;
    }
    if (!out_override.empty()) cfg.output = out_override;
    if (workers > 0) cfg.workers = workers;
    if (cfg.output.empty()) throw UsageError("no output path: set \"output\" or pass --out");

    const auto records = hs::run(cfg);
    hs::write_raw_csv(cfg.output, records, cfg.timing);
    const nlohmann::json summary = hs::summary_json(cfg, records);
    if (!cfg.summary.empty()) {
        std::ofstream s(cfg.summary);
        if (!s) throw std::runtime_error("cannot write " + cfg.summary);
        s << summary.dump(2) << '\n';
    }
    std::cout << "records " << summary["records"].get<std::size_t>() << " failed "
              << summary["failed"].get<std::size_t>() << " -> " << cfg.output << '\n';
    return 0;
}

int cmd_aggregate(const std::string& in, const std::string& out) {
    const auto records = hs::read_raw_csv(in);
    const auto rows = hs::aggregate(records);
    hs::write_aggregate_csv(out, rows);
    std::cout << "records " << records.size() << " cells " << rows.size() << " -> " << out << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spiked tensor PCA lab"};
    app.require_subcommand(1);
    app.add_option("--precision", g_precision, "Significant digits in printed numbers")
        ->check(CLI::Range(1, 17));

    TheoryArgs ta;
    auto* theory = app.add_subcommand("theory", "Closed-form calculators");
    theory->require_subcommand(1);
    auto add_k = [&](CLI::App* c, const char* def) {
        ta.k = def;
        c->add_option("--k", ta.k, "Tensor order(s), e.g. 3..5,10");
    };
    auto* mu = theory->add_subcommand("mu", "Operator-norm constant mu_k");
    add_k(mu, "3");
    auto* omega = theory->add_subcommand("omega", "AMP threshold omega_k");
    add_k(omega, "3");
    auto* fp = theory->add_subcommand("fixed-points", "State-evolution fixed points");
    add_k(fp, "3");
    fp->add_option("--beta", ta.beta, "Signal strength(s)");
    auto* gs = theory->add_subcommand("gamma-star", "Side-information threshold");
    add_k(gs, "3");
    gs->add_option("--beta", ta.beta, "Signal strength(s)");
    auto* se = theory->add_subcommand("se", "State-evolution trajectory");
    add_k(se, "3");
    se->add_option("--beta", ta.beta, "Signal strength(s)");
    se->add_option("--gamma", ta.gamma, "Initial tau");
    se->add_option("--steps", ta.steps, "Number of steps");
    auto* sf = theory->add_subcommand("sf-bound", "Sudakov-Fernique upper bound on the max");
    add_k(sf, "3");
    sf->add_option("--beta", ta.beta, "Signal strength(s)");
    auto* kl = theory->add_subcommand("kl-bound", "KL divergence upper bound");
    add_k(kl, "3");
    kl->add_option("--beta", ta.beta, "Signal strength(s)");
    kl->add_option("--n", ta.n, "Dimension");
    kl->add_option("--dot", ta.dot, "Inner product of the two spikes");
    auto* gp = theory->add_subcommand("g-plot", "Complexity function samples as CSV");
    add_k(gp, "3,4,5");
    gp->add_option("--xmin", ta.xmin);
    gp->add_option("--xmax", ta.xmax);
    gp->add_option("--points", ta.points);
    ta.k = "3";

    DemoArgs da;
    auto* demo = app.add_subcommand("demo", "Sample one instance and run one estimator");
    demo->add_option("--k", da.k);
    demo->add_option("--n", da.n);
    demo->add_option("--beta", da.beta);
    demo->add_option("--algo", da.algo, "unfold, rec-unfold, psd, power-random, power-unfold, ...");
    demo->add_option("--seed", da.seed);
    demo->add_option("--gamma", da.gamma, "Side-information strength for amp");
    demo->add_option("--max-iter", da.max_iter);
    demo->add_option("--tol", da.tol);
    demo->add_option("--restarts", da.restarts, "Restarts for ml");

    std::string config_path, run_out;
    int workers = default_workers();
    auto* run = app.add_subcommand("run", "Run an experiment config");
    run->add_option("--config", config_path)->required();
    run->add_option("--out", run_out, "Raw CSV path (overrides the config)");
    run->add_option("--workers", workers)->check(CLI::PositiveNumber);

    std::string agg_in, agg_out;
    auto* agg = app.add_subcommand("aggregate", "Aggregate a raw CSV");
    agg->add_option("--in", agg_in)->required();
    agg->add_option("--out", agg_out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help();
        return 1;
    }

    // The k default differs per theory subcommand; restore g-plot's when untouched.
    if (gp->parsed() && gp->count("--k") == 0) ta.k = "3,4,5";

    try {
        if (theory->parsed()) {
            if (mu->parsed()) cmd_mu(ta);
            else if (omega->parsed()) cmd_omega(ta);
            else if (fp->parsed()) cmd_fixed_points(ta);
            else if (gs->parsed()) cmd_gamma_star(ta);
            else if (se->parsed()) cmd_se(ta);
            else if (sf->parsed()) cmd_sf_bound(ta);
            else if (kl->parsed()) cmd_kl_bound(ta);
            else if (gp->parsed()) cmd_g_plot(ta);
            return 0;
        }
        if (demo->parsed()) return cmd_demo(da);
        if (run->parsed()) return cmd_run(config_path, run_out, workers);
        if (agg->parsed()) return cmd_aggregate(agg_in, agg_out);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const hs::ConfigError& e) {
        std::cerr << "invalid config:\n";
        for (const auto& p : e.problems) std::cerr << "  " << p << '\n';
        return 1;
    } catch (const th::NotApplicable& e) {
        std::cerr << "not applicable: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
