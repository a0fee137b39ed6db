#pragma once

// Measurement rows, their aggregation, and the CSV formats.
//
// Raw header:
//   experiment_id,algorithm,k,n,beta,gamma,lambda,replicate,seed,
//   instance_hash,t,correlation,predicted,loss,iterations,rayleigh,
//   converged,failed[,wall_ms]
// Aggregate header:
//   algorithm,k,n,beta,gamma,lambda,t,mean_correlation,stderr,n_reps,
//   n_failed,mean_loss,mean_iterations,mean_predicted,beta_over_n_quarter,
//   beta_over_n_half
// Empty cells mean "not applicable". Reals are written in shortest
// round-trip form with '.' as decimal separator.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace spiked::harness {

struct RunRecord {
    std::string experiment_id;
    std::string algorithm;
    int k = 0;
    std::size_t n = 0;
    double beta = 0.0;
    std::optional<double> gamma;
    std::optional<double> lambda;
    int replicate = 0;
    std::uint64_t seed = 0;
    std::uint64_t instance_hash = 0;
    std::optional<int> t;             // iteration index for per-iteration rows
    double correlation = 0.0;
    std::optional<double> predicted;  // theory value where one exists
    double loss = 2.0;
    int iterations = 0;
    double rayleigh = 0.0;
    bool converged = false;
    bool failed = false;
    std::optional<long long> wall_ms;
};

struct AggregateRecord {
    std::string algorithm;
    int k = 0;
    std::size_t n = 0;
    double beta = 0.0;
    std::optional<double> gamma;
    std::optional<double> lambda;
    std::optional<int> t;
    double mean_correlation = 0.0;
    double std_error = 0.0;  // written as the "stderr" column
    int n_reps = 0;
    int n_failed = 0;
    double mean_loss = 0.0;
    double mean_iterations = 0.0;
    std::optional<double> mean_predicted;
    double beta_over_n_quarter = 0.0;
    double beta_over_n_half = 0.0;
};

struct CsvError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Total order used for deterministic output.
bool record_less(const RunRecord& a, const RunRecord& b);
void sort_records(std::vector<RunRecord>& records);

/// Groups by (algorithm, k, n, beta, gamma, lambda, t). Failed rows are
/// counted in n_failed and excluded from the means. stderr is the sample
/// standard deviation over sqrt(n_reps) (0 for a single replicate).
std::vector<AggregateRecord> aggregate(const std::vector<RunRecord>& records);

std::string format_real(double x);

void write_raw_csv(std::ostream& out, const std::vector<RunRecord>& records, bool with_wall_ms);
void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRecord>& rows);
void write_raw_csv(const std::string& path, const std::vector<RunRecord>& records,
                   bool with_wall_ms);
void write_aggregate_csv(const std::string& path, const std::vector<AggregateRecord>& rows);

/// Parses a raw-record CSV. Rejects aggregate files and unknown headers.
std::vector<RunRecord> read_raw_csv(std::istream& in);
std::vector<RunRecord> read_raw_csv(const std::string& path);

/// RFC 4180 field splitting of one record (no embedded newlines).
std::vector<std::string> split_csv_line(const std::string& line);
std::string quote_csv(const std::string& field);

}  // namespace spiked::harness
