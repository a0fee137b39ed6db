#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "spiked/harness/config.hpp"
#include "spiked/harness/records.hpp"
#include "spiked/harness/runner.hpp"
#include "spiked/theory.hpp"

using namespace spiked;
using namespace spiked::harness;
using nlohmann::json;

namespace {

ExperimentConfig toy(int replicates = 3) {
    return parse_config(json{{"kind", "comparison"},
                             {"experiment_id", "toy"},
                             {"n_list", {12}},
                             {"beta_spec", {4.0}},
                             {"algorithms", {"rec_unfold"}},
                             {"replicates", replicates}});
}

std::string raw_csv(const std::vector<RunRecord>& rs, bool wall = false) {
    std::ostringstream os;
    write_raw_csv(os, rs, wall);
    return os.str();
}

std::vector<std::string> problems_of(const json& j) {
    try {
        parse_config(j);
    } catch (const ConfigError& e) {
        return e.problems;
    }
    return {};
}

bool mentions(const std::vector<std::string>& ps, const std::string& field) {
    for (const auto& p : ps)
        if (p.rfind(field, 0) == 0) return true;
    return false;
}

RunRecord rec(std::string alg, double beta, int rep, double corr, bool failed = false) {
    RunRecord r;
    r.experiment_id = "e";
    r.algorithm = std::move(alg);
    r.k = 3;
    r.n = 16;
    r.beta = beta;
    r.replicate = rep;
    r.correlation = corr;
    r.loss = 2 - 2 * corr;
    r.failed = failed;
    r.converged = !failed;
    return r;
}

}  // namespace

TEST(Config, Defaults) {
    const ExperimentConfig c = default_config(ExperimentKind::comparison);
    EXPECT_EQ(c.n_list, (std::vector<std::size_t>{25, 50, 100, 200}));
    const auto grid = c.beta.grid();
    ASSERT_EQ(grid.size(), 17u);
    EXPECT_EQ(grid.front(), 2.0);
    EXPECT_EQ(grid.back(), 10.0);
    EXPECT_EQ(c.replicates, 50);
    EXPECT_EQ(c.algorithms.size(), 7u);
    EXPECT_EQ(default_config(ExperimentKind::comparison, true).n_list.back(), 800u);
    const ExperimentConfig s = default_config(ExperimentKind::side_info);
    EXPECT_EQ(s.lambda_list.size(), 21u);
    EXPECT_EQ(s.lambda_list.back(), 2.0);
}

TEST(Config, ParsesAllForms) {
    const ExperimentConfig c = parse_config(json{{"kind", "scaling-collapse"},
                                                 {"beta_spec", {{"min", 1}, {"max", 16},
                                                                {"steps", 5}, {"scale", "geometric"}}},
                                                 {"algorithms", {"rec-unfold", "power_psd"}},
                                                 {"gamma", 0.5},
                                                 {"master_seed", 99}});
    EXPECT_EQ(c.kind, ExperimentKind::scaling_collapse);
    const auto g = c.beta.grid();
    ASSERT_EQ(g.size(), 5u);
    EXPECT_NEAR(g[1], 2.0, 1e-12);
    EXPECT_NEAR(g[2], 4.0, 1e-12);
    EXPECT_EQ(c.algorithms[1], Algorithm::power_psd);
    EXPECT_EQ(c.gamma_list, std::vector<double>{0.5});
    EXPECT_EQ(c.master_seed, 99u);
}

TEST(Config, RejectsAndListsEveryProblem) {
    const auto ps = problems_of(json{{"kind", "comparison"},
                                     {"colour", "red"},
                                     {"k", 9},
                                     {"replicates", 0},
                                     {"n_list", {1}},
                                     {"beta_spec", {-1.0}},
                                     {"algorithms", {"magic"}}});
    EXPECT_TRUE(mentions(ps, "colour"));
    EXPECT_TRUE(mentions(ps, "k"));
    EXPECT_TRUE(mentions(ps, "replicates"));
    EXPECT_TRUE(mentions(ps, "n_list"));
    EXPECT_TRUE(mentions(ps, "beta_spec"));
    EXPECT_TRUE(mentions(ps, "algorithms"));
    EXPECT_TRUE(mentions(problems_of(json{{"k", 3}}), "kind"));
    EXPECT_TRUE(mentions(problems_of(json{{"kind", "side_info"}, {"k", 4}}), "k"));
    EXPECT_TRUE(mentions(problems_of(json{{"kind", "side_info"}, {"algorithms", {"amp"}}}),
                         "algorithms"));
    EXPECT_TRUE(mentions(problems_of(json{{"kind", "comparison"}, {"k", 4},
                                          {"algorithms", {"psd"}}}),
                         "algorithms"));
    EXPECT_TRUE(mentions(problems_of(json{{"kind", "comparison"}, {"beta_spec", {{"bogus", 1}}}}),
                         "beta_spec.bogus"));
    EXPECT_THROW(parse_config(json::array()), ConfigError);
}

TEST(Config, JsonRoundTrip) {
    for (ExperimentKind k : {ExperimentKind::comparison, ExperimentKind::scaling_collapse,
                             ExperimentKind::side_info, ExperimentKind::amp_vs_se}) {
        const ExperimentConfig a = default_config(k);
        const ExperimentConfig b = parse_config(to_json(a));
        EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
    }
}

TEST(Csv, QuotingAndSplitting) {
    EXPECT_EQ(quote_csv("plain"), "plain");
    EXPECT_EQ(quote_csv("a,b"), "\"a,b\"");
    EXPECT_EQ(quote_csv("say \"hi\""), "\"say \"\"hi\"\"\"");
    const auto f = split_csv_line("x,\"a,b\",\"q\"\"q\",,end");
    ASSERT_EQ(f.size(), 5u);
    EXPECT_EQ(f[1], "a,b");
    EXPECT_EQ(f[2], "q\"q");
    EXPECT_EQ(f[3], "");
}

TEST(Csv, RealFormatting) {
    EXPECT_EQ(format_real(0.5), "0.5");
    EXPECT_EQ(format_real(3.0), "3");
    EXPECT_EQ(std::stod(format_real(0.1 + 0.2)), 0.1 + 0.2);
}

TEST(Csv, RawRoundTrip) {
    const auto records = run(toy());
    std::istringstream in(raw_csv(records, true));
    const auto back = read_raw_csv(in);
    ASSERT_EQ(back.size(), records.size());
    EXPECT_EQ(raw_csv(back, true), raw_csv(records, true));
    RunRecord odd = rec("needs,\"quote\"", 2.0, 0, 0.25);
    odd.experiment_id = "id with, comma";
    odd.gamma = 0.5;
    odd.t = 3;
    std::istringstream in2(raw_csv({odd}));
    const auto b2 = read_raw_csv(in2);
    ASSERT_EQ(b2.size(), 1u);
    EXPECT_EQ(b2[0].algorithm, odd.algorithm);
    EXPECT_EQ(b2[0].experiment_id, odd.experiment_id);
    EXPECT_EQ(b2[0].gamma, 0.5);
    EXPECT_EQ(b2[0].t, 3);
    EXPECT_FALSE(b2[0].lambda.has_value());
}

TEST(Csv, RejectsAggregateInputAndUnknownHeader) {
    std::ostringstream agg;
    write_aggregate_csv(agg, aggregate({rec("a", 2, 0, 0.5)}));
    std::istringstream a(agg.str());
    EXPECT_THROW(read_raw_csv(a), CsvError);
    std::istringstream junk("foo,bar\n1,2\n");
    EXPECT_THROW(read_raw_csv(junk), CsvError);
}

TEST(Aggregate, MeansAndStdError) {
    std::vector<RunRecord> rs = {rec("a", 2, 0, 0.5), rec("a", 2, 1, 0.5), rec("a", 2, 2, 0.5),
                                 rec("b", 2, 0, 0.2), rec("b", 2, 1, 0.4), rec("b", 2, 2, 0.9, true)};
    const auto agg = aggregate(rs);
    ASSERT_EQ(agg.size(), 2u);
    EXPECT_EQ(agg[0].algorithm, "a");
    EXPECT_EQ(agg[0].std_error, 0.0);
    EXPECT_EQ(agg[0].n_reps, 3);
    EXPECT_NEAR(agg[1].mean_correlation, 0.3, 1e-15);
    EXPECT_NEAR(agg[1].std_error, std::sqrt(0.02) / std::sqrt(2.0), 1e-15);
    EXPECT_EQ(agg[1].n_reps, 2);
    EXPECT_EQ(agg[1].n_failed, 1);
    EXPECT_NEAR(agg[0].beta_over_n_quarter, 2.0 / 2.0, 1e-12);
    EXPECT_NEAR(agg[0].beta_over_n_half, 2.0 / 4.0, 1e-12);

    std::ostringstream os;
    write_aggregate_csv(os, agg);
    EXPECT_EQ(os.str().substr(0, os.str().find('\n')),
              "algorithm,k,n,beta,gamma,lambda,t,mean_correlation,stderr,n_reps,n_failed,"
              "mean_loss,mean_iterations,mean_predicted,beta_over_n_quarter,beta_over_n_half");
}

TEST(Aggregate, GroupsByFullKey) {
    std::vector<RunRecord> rs = {rec("a", 2, 0, 0.5), rec("a", 3, 0, 0.5)};
    rs[1].n = 32;
    RunRecord g = rec("a", 2, 0, 0.1);
    g.gamma = 1.0;
    rs.push_back(g);
    EXPECT_EQ(aggregate(rs).size(), 3u);
}

TEST(Runner, Cardinality) {
    const auto rs = run(toy(3));
    ASSERT_EQ(rs.size(), 3u);
    for (const auto& r : rs) {
        EXPECT_EQ(r.algorithm, "rec_unfold");
        EXPECT_NEAR(r.loss, 2 - 2 * r.correlation, 1e-9);
        EXPECT_FALSE(r.failed);
        EXPECT_FALSE(r.wall_ms.has_value());
    }
    EXPECT_EQ(aggregate(rs).size(), 1u);
}

TEST(Runner, DeterministicAcrossRunsAndWorkers) {
    ExperimentConfig c = parse_config(json{{"kind", "comparison"},
                                           {"n_list", {10, 14}},
                                           {"beta_spec", {3.0, 6.0}},
                                           {"algorithms", {"unfold", "power_random", "psd", "amp"}},
                                           {"gamma", {0.0, 1.0}},
                                           {"replicates", 3}});
    const std::string a = raw_csv(run(c));
    EXPECT_EQ(a, raw_csv(run(c)));
    c.workers = 4;
    EXPECT_EQ(a, raw_csv(run(c)));
}

TEST(Runner, PairedInstancesAndDistinctSeeds) {
    const ExperimentConfig c = parse_config(json{{"kind", "comparison"},
                                                 {"n_list", {10}},
                                                 {"beta_spec", {5.0}},
                                                 {"algorithms", {"unfold", "rec_unfold", "ml"}},
                                                 {"replicates", 4}});
    const auto rs = run(c);
    ASSERT_EQ(rs.size(), 12u);
    std::map<int, std::set<std::uint64_t>> hashes;
    std::set<std::uint64_t> seeds;
    for (const auto& r : rs) {
        hashes[r.replicate].insert(r.instance_hash);
        seeds.insert(r.seed);
    }
    for (const auto& [rep, h] : hashes) EXPECT_EQ(h.size(), 1u) << rep;
    EXPECT_EQ(seeds.size(), 4u);
    EXPECT_EQ(rs[0].seed, instance_seed(c.master_seed, 10, 5.0, rs[0].replicate));
}

TEST(Runner, OrderingAtLargeBeta) {
    const ExperimentConfig c = parse_config(json{{"kind", "comparison"},
                                                 {"n_list", {50}},
                                                 {"beta_spec", {10.0}},
                                                 {"algorithms", {"rec_unfold", "power_random"}},
                                                 {"replicates", 50}});
    const auto agg = aggregate(run(c));
    ASSERT_EQ(agg.size(), 2u);
    const auto& pr = agg[0].algorithm == "power_random" ? agg[0] : agg[1];
    const auto& ru = agg[0].algorithm == "rec_unfold" ? agg[0] : agg[1];
    EXPECT_GT(ru.mean_correlation, pr.mean_correlation);
}

TEST(Runner, TimingColumnOnlyWhenRequested) {
    ExperimentConfig c = toy(1);
    c.timing = true;
    const auto rs = run(c);
    ASSERT_TRUE(rs[0].wall_ms.has_value());
    EXPECT_GE(*rs[0].wall_ms, 0);
    const std::string csv = raw_csv(rs, true);
    EXPECT_NE(csv.substr(0, csv.find('\n')).find("wall_ms"), std::string::npos);
}

TEST(Runner, SideInfoRows) {
    const ExperimentConfig c = parse_config(json{{"kind", "side_info"},
                                                 {"n_list", {40}},
                                                 {"lambda_list", {0.0, 2.0}},
                                                 {"replicates", 2}});
    const auto rs = run(c);
    ASSERT_EQ(rs.size(), 12u);
    std::set<std::string> algs;
    for (const auto& r : rs) {
        algs.insert(r.algorithm);
        ASSERT_TRUE(r.lambda.has_value());
        ASSERT_TRUE(r.predicted.has_value());
        if (r.algorithm == "matrix") {
            EXPECT_NEAR(*r.predicted, theory::matrix_pca_correlation(*r.lambda), 1e-15);
        }
    }
    EXPECT_EQ(algs, (std::set<std::string>{"matrix", "simultaneous", "tensor"}));
}

TEST(Runner, AmpVsSeRows) {
    const ExperimentConfig c = parse_config(json{{"kind", "amp_vs_se"},
                                                 {"n_list", {60}},
                                                 {"gamma", {0.0, 1.0}},
                                                 {"max_iter", 5},
                                                 {"replicates", 2}});
    const auto rs = run(c);
    ASSERT_EQ(rs.size(), 2u * 2u * 6u);
    for (const auto& r : rs) {
        ASSERT_TRUE(r.t.has_value());
        ASSERT_TRUE(r.gamma.has_value());
        const auto se = theory::state_evolution(3.0, 3, *r.gamma, 5);
        EXPECT_EQ(*r.predicted, se.correlation(*r.t));
        if (*r.gamma == 0.0) {
            EXPECT_EQ(*r.predicted, 0.0);
        }
    }
}

TEST(Runner, SummaryJson) {
    const ExperimentConfig c = toy(2);
    const auto rs = run(c);
    const json s = summary_json(c, rs);
    EXPECT_EQ(s["records"], 2);
    EXPECT_EQ(s["failed"], 0);
    EXPECT_EQ(s["config"]["experiment_id"], "toy");
}
