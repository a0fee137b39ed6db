#include "spiked/harness/runner.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <mutex>
#include <thread>

#include "spiked/estimators.hpp"
#include "spiked/rng.hpp"
#include "spiked/spectral.hpp"
#include "spiked/theory.hpp"

namespace spiked::harness {

namespace {

using Cell = std::function<std::vector<RunRecord>()>;

// Runs cells on `workers` threads; output order follows cell order.
std::vector<RunRecord> execute(const std::vector<Cell>& cells, int workers) {
    std::vector<std::vector<RunRecord>> results(cells.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mu;
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            try {
                results[i] = cells[i]();
            } catch (...) {
                std::lock_guard lock(error_mu);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    const int w = std::max(1, std::min<int>(workers, static_cast<int>(cells.size())));
    if (w == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int i = 0; i < w; ++i) pool.emplace_back(worker);
    }
    if (first_error) std::rethrow_exception(first_error);
    std::vector<RunRecord> all;
    for (auto& r : results)
        for (auto& rec : r) all.push_back(std::move(rec));
    sort_records(all);
    return all;
}

// Each worker thread recycles one tensor allocation across cells.
std::vector<double>& thread_buffer() {
    thread_local std::vector<double> buf;
    return buf;
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    long long ms() const {
        return std::chrono::duration_cast<std::chrono::milliseconds>(
                   std::chrono::steady_clock::now() - start)
            .count();
    }
};

RunRecord base_record(const ExperimentConfig& c, std::string algorithm, const SpikedInstance& inst,
                      int replicate, std::uint64_t hash) {
    RunRecord r;
    r.experiment_id = c.experiment_id;
    r.algorithm = std::move(algorithm);
    r.k = inst.k;
    r.n = inst.n;
    r.beta = inst.beta;
    r.replicate = replicate;
    r.seed = inst.seed;
    r.instance_hash = hash;
    return r;
}

void fill_result(RunRecord& r, const EstimatorResult& e) {
    r.correlation = e.correlation;
    r.loss = e.loss;
    r.iterations = e.iterations;
    r.rayleigh = e.rayleigh;
    r.converged = e.converged;
}

void mark_failed(RunRecord& r) {
    r.failed = true;
    r.correlation = 0.0;
    r.loss = 2.0;
    r.iterations = 0;
    r.rayleigh = 0.0;
    r.converged = false;
}

std::uint64_t algorithm_seed(std::uint64_t master, std::string_view name, std::size_t n,
                             double beta, int replicate) {
    return derive_seed(master, {tag_key("algorithm"), tag_key(name), n, double_key(beta),
                                static_cast<std::uint64_t>(replicate)});
}

std::uint64_t side_seed(std::uint64_t master, std::size_t n, double beta, double gamma,
                        int replicate) {
    return derive_seed(master, {tag_key("side"), n, double_key(beta), double_key(gamma),
                                static_cast<std::uint64_t>(replicate)});
}

EstimatorResult run_algorithm(Algorithm a, const SpikedInstance& inst, const ExperimentConfig& c,
                              Rng& rng, std::span<const double> y) {
    const IterOptions opt{c.max_iter, c.tol};
    const DenseTensor& x = inst.x;
    const std::span<const double> truth = inst.v0;
    switch (a) {
        case Algorithm::unfold: return unfold(x, rng, truth);
        case Algorithm::rec_unfold: return recursive_unfold(x, rng, truth);
        case Algorithm::psd: return psd_constrained_pca(x, rng, opt, truth);
        case Algorithm::power_random:
            return warm_start(x, Initializer::random, Iterator::power, rng, opt, truth);
        case Algorithm::power_unfold:
            return warm_start(x, Initializer::unfold, Iterator::power, rng, opt, truth);
        case Algorithm::power_rec_unfold:
            return warm_start(x, Initializer::rec_unfold, Iterator::power, rng, opt, truth);
        case Algorithm::power_psd:
            return warm_start(x, Initializer::psd, Iterator::power, rng, opt, truth);
        case Algorithm::amp: return amp(x, y, opt, truth, c.amp_memory);
        case Algorithm::ml: return ml_bruteforce(x, c.restarts, rng, opt, truth);
    }
    throw std::logic_error("unhandled algorithm");
}

SpikedInstance sample_cell(const ExperimentConfig& c, std::size_t n, double beta, int rep) {
    Rng rng(instance_seed(c.master_seed, n, beta, rep));
    return sample_spiked_with(c.k, beta, sample_v0(n, rng), rng, c.noise,
                              std::move(thread_buffer()));
}

void recycle(SpikedInstance& inst) { thread_buffer() = std::move(inst.x).release(); }

std::vector<RunRecord> grid_cell(const ExperimentConfig& c, std::size_t n, double beta, int rep) {
    std::vector<RunRecord> out;
    SpikedInstance inst;
    std::uint64_t hash = 0;
    bool sampled = false;
    try {
        inst = sample_cell(c, n, beta, rep);
        hash = instance_hash(inst);
        sampled = true;
    } catch (const std::exception&) {
        inst.k = c.k;
        inst.n = n;
        inst.beta = beta;
        inst.seed = instance_seed(c.master_seed, n, beta, rep);
    }
    const std::vector<double> gammas = c.gamma_list.empty() ? std::vector<double>{0.0} : c.gamma_list;
    for (Algorithm a : c.algorithms) {
        const std::string name(algorithm_name(a));
        const std::size_t variants = a == Algorithm::amp ? gammas.size() : 1;
        for (std::size_t g = 0; g < variants; ++g) {
            RunRecord r = base_record(c, name, inst, rep, hash);
            if (a == Algorithm::amp) r.gamma = gammas[g];
            if (!sampled) {
                mark_failed(r);
                out.push_back(std::move(r));
                continue;
            }
            try {
                const Timer timer;
                Rng rng(algorithm_seed(c.master_seed, name, n, beta, rep));
                Vec y;
                if (a == Algorithm::amp) {
                    Rng srng(side_seed(c.master_seed, n, beta, gammas[g], rep));
                    y = sample_side_info(inst.v0, gammas[g], srng).y;
                }
                const EstimatorResult e = run_algorithm(a, inst, c, rng, y);
                fill_result(r, e);
                if (c.timing) r.wall_ms = timer.ms();
            } catch (const std::exception&) {
                mark_failed(r);
            }
            out.push_back(std::move(r));
        }
    }
    if (sampled) recycle(inst);
    return out;
}

std::vector<RunRecord> side_info_cell(const ExperimentConfig& c, std::size_t n, double beta,
                                      int rep) {
    std::vector<RunRecord> out;
    SpikedInstance inst = sample_cell(c, n, beta, rep);
    const std::uint64_t hash = instance_hash(inst);
    const IterOptions opt{c.max_iter, c.tol};

    // Tensor alone: AMP from an uninformative start, shared by every lambda.
    RunRecord tensor_only = base_record(c, "tensor", inst, rep, hash);
    try {
        const Timer timer;
        Rng srng(side_seed(c.master_seed, n, beta, 0.0, rep));
        const Vec y = sample_side_info(inst.v0, 0.0, srng).y;
        fill_result(tensor_only, amp(inst.x, y, opt, inst.v0, c.amp_memory));
        if (c.timing) tensor_only.wall_ms = timer.ms();
    } catch (const std::exception&) {
        mark_failed(tensor_only);
    }
    tensor_only.predicted = theory::amp_limit_correlation(beta, c.k, 0.0);

    for (double lambda : c.lambda_list) {
        RunRecord mat = base_record(c, "matrix", inst, rep, hash);
        RunRecord sim = base_record(c, "simultaneous", inst, rep, hash);
        RunRecord ten = tensor_only;
        mat.lambda = sim.lambda = ten.lambda = lambda;
        const double c_mat = theory::matrix_pca_correlation(lambda);
        mat.predicted = c_mat;
        sim.predicted = theory::amp_limit_correlation(beta, c.k, c_mat);
        try {
            const Timer timer;
            Rng mrng(derive_seed(c.master_seed, {tag_key("matrix"), n, double_key(beta),
                                                 double_key(lambda),
                                                 static_cast<std::uint64_t>(rep)}));
            const MatrixObservation obs = sample_matrix_observation(inst.v0, lambda, mrng);
            Vec v = leading_eigenvector(obs.m, mrng);
            EstimatorResult em;
            em.vhat = v;
            em.iterations = 0;
            finalize(em, inst.x, inst.v0);
            fill_result(mat, em);
            if (c.timing) mat.wall_ms = timer.ms();
            try {
                fill_result(sim, amp(inst.x, v, opt, inst.v0, c.amp_memory));
                if (c.timing) sim.wall_ms = timer.ms();
            } catch (const std::exception&) {
                mark_failed(sim);
            }
        } catch (const std::exception&) {
            mark_failed(mat);
            mark_failed(sim);
        }
        out.push_back(std::move(mat));
        out.push_back(std::move(sim));
        out.push_back(std::move(ten));
    }
    recycle(inst);
    return out;
}

std::vector<RunRecord> amp_se_cell(const ExperimentConfig& c, std::size_t n, double beta,
                                   int rep) {
    std::vector<RunRecord> out;
    SpikedInstance inst = sample_cell(c, n, beta, rep);
    const std::uint64_t hash = instance_hash(inst);
    // Fixed horizon: every replicate contributes a row for every t.
    const IterOptions opt{c.max_iter, 0.0};
    for (double gamma : c.gamma_list) {
        Rng srng(side_seed(c.master_seed, n, beta, gamma, rep));
        const Vec y = sample_side_info(inst.v0, gamma, srng).y;
        const theory::SETrajectory se = theory::state_evolution(beta, c.k, gamma, c.max_iter);
        try {
            const EstimatorResult e = amp(inst.x, y, opt, inst.v0, c.amp_memory);
            for (std::size_t t = 0; t < e.trajectory.size(); ++t) {
                RunRecord r = base_record(c, "amp", inst, rep, hash);
                r.gamma = gamma;
                r.t = static_cast<int>(t);
                r.correlation = std::min(1.0, std::abs(e.trajectory[t]));
                r.loss = 2.0 - 2.0 * r.correlation;
                r.predicted = se.correlation(t);
                r.iterations = static_cast<int>(t);
                r.rayleigh = e.rayleigh;
                r.converged = e.converged;
                out.push_back(std::move(r));
            }
        } catch (const std::exception&) {
            RunRecord r = base_record(c, "amp", inst, rep, hash);
            r.gamma = gamma;
            r.t = 0;
            mark_failed(r);
            out.push_back(std::move(r));
        }
    }
    recycle(inst);
    return out;
}

template <class F>
std::vector<Cell> make_cells(const ExperimentConfig& c, F fn) {
    std::vector<Cell> cells;
    for (std::size_t n : c.n_list)
        for (double beta : c.beta.grid())
            for (int rep = 0; rep < c.replicates; ++rep)
                cells.push_back([&c, fn, n, beta, rep] { return fn(c, n, beta, rep); });
    return cells;
}

}  // namespace

std::uint64_t instance_seed(std::uint64_t master, std::size_t n, double beta, int replicate) {
    return derive_seed(master, {tag_key("instance"), n, double_key(beta),
                                static_cast<std::uint64_t>(replicate)});
}

std::uint64_t instance_hash(const SpikedInstance& inst) {
    std::uint64_t h = derive_seed(static_cast<std::uint64_t>(inst.k), {inst.n, double_key(inst.beta)});
    for (double v : inst.v0) h = splitmix64(h ^ double_key(v));
    const auto d = inst.x.data();
    const std::size_t stride = std::max<std::size_t>(1, d.size() / 4096);
    for (std::size_t i = 0; i < d.size(); i += stride) h = splitmix64(h ^ double_key(d[i]));
    return h;
}

std::vector<RunRecord> run_grid(const ExperimentConfig& c) {
    return execute(make_cells(c, grid_cell), c.workers);
}

std::vector<RunRecord> run_side_info(const ExperimentConfig& c) {
    if (c.k != 3) throw std::invalid_argument("run_side_info: requires k = 3");
    return execute(make_cells(c, side_info_cell), c.workers);
}

std::vector<RunRecord> run_amp_vs_se(const ExperimentConfig& c) {
    return execute(make_cells(c, amp_se_cell), c.workers);
}

std::vector<RunRecord> run(const ExperimentConfig& c) {
    switch (c.kind) {
        case ExperimentKind::comparison:
        case ExperimentKind::scaling_collapse: return run_grid(c);
        case ExperimentKind::side_info: return run_side_info(c);
        case ExperimentKind::amp_vs_se: return run_amp_vs_se(c);
    }
    throw std::logic_error("unhandled experiment kind");
}

nlohmann::json summary_json(const ExperimentConfig& config, const std::vector<RunRecord>& records) {
    std::size_t failed = 0, unconverged = 0;
    for (const RunRecord& r : records) {
        failed += r.failed;
        unconverged += !r.failed && !r.converged;
    }
    nlohmann::json j;
    j["config"] = to_json(config);
    j["records"] = records.size();
    j["failed"] = failed;
    j["unconverged"] = unconverged;
    return j;
}

}  // namespace spiked::harness
