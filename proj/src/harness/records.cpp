#include "spiked/harness/records.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

namespace spiked::harness {

namespace {

const std::vector<std::string> kRawHeader = {
    "experiment_id", "algorithm", "k",           "n",    "beta",        "gamma",
    "lambda",        "replicate", "seed",        "instance_hash", "t",  "correlation",
    "predicted",     "loss",      "iterations",  "rayleigh",      "converged", "failed"};

const std::vector<std::string> kAggHeader = {
    "algorithm",      "k",         "n",          "beta",       "gamma",
    "lambda",         "t",         "mean_correlation", "stderr", "n_reps",
    "n_failed",       "mean_loss", "mean_iterations",  "mean_predicted",
    "beta_over_n_quarter", "beta_over_n_half"};

// Orders nullopt before any value.
template <class T>
int cmp_opt(const std::optional<T>& a, const std::optional<T>& b) {
    if (a.has_value() != b.has_value()) return a.has_value() ? 1 : -1;
    if (!a) return 0;
    return *a < *b ? -1 : (*b < *a ? 1 : 0);
}

template <class T>
int cmp(const T& a, const T& b) {
    return a < b ? -1 : (b < a ? 1 : 0);
}

struct GroupKey {
    std::string algorithm;
    int k;
    std::size_t n;
    double beta;
    std::optional<double> gamma, lambda;
    std::optional<int> t;

    bool operator<(const GroupKey& o) const {
        if (int c = cmp(algorithm, o.algorithm)) return c < 0;
        if (int c = cmp(k, o.k)) return c < 0;
        if (int c = cmp(n, o.n)) return c < 0;
        if (int c = cmp(beta, o.beta)) return c < 0;
        if (int c = cmp_opt(gamma, o.gamma)) return c < 0;
        if (int c = cmp_opt(lambda, o.lambda)) return c < 0;
        return cmp_opt(t, o.t) < 0;
    }
};

GroupKey key_of(const RunRecord& r) {
    return {r.algorithm, r.k, r.n, r.beta, r.gamma, r.lambda, r.t};
}

std::string opt_real(const std::optional<double>& x) { return x ? format_real(*x) : std::string(); }

template <class T>
std::string opt_int(const std::optional<T>& x) {
    return x ? std::to_string(*x) : std::string();
}

std::string hex64(std::uint64_t x) {
    char buf[17];
    auto res = std::to_chars(buf, buf + 16, x, 16);
    std::string s(buf, res.ptr);
    return std::string(16 - s.size(), '0') + s;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << ',';
        out << quote_csv(fields[i]);
    }
    out << '\n';
}

double parse_real(const std::string& s, const char* col) {
    double v = 0.0;
    const char* b = s.data();
    const char* e = s.data() + s.size();
    auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc() || res.ptr != e)
        throw CsvError(std::string("bad real in column ") + col + ": '" + s + "'");
    return v;
}

template <class T>
T parse_int(const std::string& s, const char* col, int base = 10) {
    T v{};
    const char* b = s.data();
    const char* e = s.data() + s.size();
    auto res = std::from_chars(b, e, v, base);
    if (res.ec != std::errc() || res.ptr != e)
        throw CsvError(std::string("bad integer in column ") + col + ": '" + s + "'");
    return v;
}

std::optional<double> parse_opt_real(const std::string& s, const char* col) {
    if (s.empty()) return std::nullopt;
    return parse_real(s, col);
}

bool parse_flag(const std::string& s, const char* col) {
    if (s == "0") return false;
    if (s == "1") return true;
    throw CsvError(std::string("bad flag in column ") + col + ": '" + s + "'");
}

}  // namespace

bool record_less(const RunRecord& a, const RunRecord& b) {
    const GroupKey ka = key_of(a), kb = key_of(b);
    if (ka < kb) return true;
    if (kb < ka) return false;
    if (a.replicate != b.replicate) return a.replicate < b.replicate;
    return a.experiment_id < b.experiment_id;
}

void sort_records(std::vector<RunRecord>& records) {
    std::stable_sort(records.begin(), records.end(), record_less);
}

std::vector<AggregateRecord> aggregate(const std::vector<RunRecord>& records) {
    if (records.empty()) throw std::invalid_argument("aggregate: no records");
    std::map<GroupKey, std::vector<const RunRecord*>> groups;
    for (const RunRecord& r : records) groups[key_of(r)].push_back(&r);

    std::vector<AggregateRecord> out;
    out.reserve(groups.size());
    for (const auto& [key, rows] : groups) {
        AggregateRecord a;
        a.algorithm = key.algorithm;
        a.k = key.k;
        a.n = key.n;
        a.beta = key.beta;
        a.gamma = key.gamma;
        a.lambda = key.lambda;
        a.t = key.t;
        double sum = 0.0, sum_loss = 0.0, sum_it = 0.0, sum_pred = 0.0;
        int n_pred = 0;
        for (const RunRecord* r : rows) {
            if (r->failed) {
                ++a.n_failed;
                continue;
            }
            ++a.n_reps;
            sum += r->correlation;
            sum_loss += r->loss;
            sum_it += r->iterations;
            if (r->predicted) {
                sum_pred += *r->predicted;
                ++n_pred;
            }
        }
        if (a.n_reps > 0) {
            a.mean_correlation = sum / a.n_reps;
            a.mean_loss = sum_loss / a.n_reps;
            a.mean_iterations = sum_it / a.n_reps;
        }
        if (a.n_reps > 1) {
            double ss = 0.0;
            for (const RunRecord* r : rows)
                if (!r->failed) ss += (r->correlation - a.mean_correlation) * (r->correlation - a.mean_correlation);
            a.std_error = std::sqrt(ss / (a.n_reps - 1)) / std::sqrt(static_cast<double>(a.n_reps));
        }
        if (n_pred > 0) a.mean_predicted = sum_pred / n_pred;
        const double n = static_cast<double>(a.n);
        a.beta_over_n_quarter = a.beta / std::pow(n, 0.25);
        a.beta_over_n_half = a.beta / std::sqrt(n);
        out.push_back(std::move(a));
    }
    return out;
}

std::string format_real(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::string quote_csv(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string q = "\"";
    for (char c : field) {
        if (c == '"') q += '"';
        q += c;
    }
    q += '"';
    return q;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    if (quoted) throw CsvError("unterminated quoted field");
    fields.push_back(std::move(cur));
    return fields;
}

void write_raw_csv(std::ostream& out, const std::vector<RunRecord>& records, bool with_wall_ms) {
    std::vector<std::string> header = kRawHeader;
    if (with_wall_ms) header.push_back("wall_ms");
    write_row(out, header);
    for (const RunRecord& r : records) {
        std::vector<std::string> f = {r.experiment_id,
                                      r.algorithm,
                                      std::to_string(r.k),
                                      std::to_string(r.n),
                                      format_real(r.beta),
                                      opt_real(r.gamma),
                                      opt_real(r.lambda),
                                      std::to_string(r.replicate),
                                      std::to_string(r.seed),
                                      hex64(r.instance_hash),
                                      opt_int(r.t),
                                      format_real(r.correlation),
                                      opt_real(r.predicted),
                                      format_real(r.loss),
                                      std::to_string(r.iterations),
                                      format_real(r.rayleigh),
                                      r.converged ? "1" : "0",
                                      r.failed ? "1" : "0"};
        if (with_wall_ms) f.push_back(opt_int(r.wall_ms));
        write_row(out, f);
    }
    if (!out) throw CsvError("write failed");
}

void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRecord>& rows) {
    write_row(out, kAggHeader);
    for (const AggregateRecord& a : rows) {
        write_row(out, {a.algorithm, std::to_string(a.k), std::to_string(a.n), format_real(a.beta),
                        opt_real(a.gamma), opt_real(a.lambda), opt_int(a.t),
                        format_real(a.mean_correlation), format_real(a.std_error),
                        std::to_string(a.n_reps), std::to_string(a.n_failed),
                        format_real(a.mean_loss), format_real(a.mean_iterations),
                        opt_real(a.mean_predicted), format_real(a.beta_over_n_quarter),
                        format_real(a.beta_over_n_half)});
    }
    if (!out) throw CsvError("write failed");
}

void write_raw_csv(const std::string& path, const std::vector<RunRecord>& records,
                   bool with_wall_ms) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CsvError("cannot open " + path + " for writing");
    write_raw_csv(out, records, with_wall_ms);
    out.close();
    if (!out) throw CsvError("write to " + path + " failed");
}

void write_aggregate_csv(const std::string& path, const std::vector<AggregateRecord>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CsvError("cannot open " + path + " for writing");
    write_aggregate_csv(out, rows);
    out.close();
    if (!out) throw CsvError("write to " + path + " failed");
}

std::vector<RunRecord> read_raw_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw CsvError("empty input");
    const std::vector<std::string> header = split_csv_line(line);
    if (header == kAggHeader) throw CsvError("input is an aggregate file, expected raw records");
    bool with_wall = false;
    if (header.size() == kRawHeader.size() + 1 && header.back() == "wall_ms") {
        with_wall = true;
        if (!std::equal(kRawHeader.begin(), kRawHeader.end(), header.begin()))
            throw CsvError("unrecognized header");
    } else if (header != kRawHeader) {
        throw CsvError("unrecognized header");
    }

    std::vector<RunRecord> out;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto f = split_csv_line(line);
        if (f.size() != header.size())
            throw CsvError("line " + std::to_string(lineno) + ": expected " +
                           std::to_string(header.size()) + " fields, got " + std::to_string(f.size()));
        RunRecord r;
        r.experiment_id = f[0];
        r.algorithm = f[1];
        r.k = parse_int<int>(f[2], "k");
        r.n = parse_int<std::size_t>(f[3], "n");
        r.beta = parse_real(f[4], "beta");
        r.gamma = parse_opt_real(f[5], "gamma");
        r.lambda = parse_opt_real(f[6], "lambda");
        r.replicate = parse_int<int>(f[7], "replicate");
        r.seed = parse_int<std::uint64_t>(f[8], "seed");
        r.instance_hash = parse_int<std::uint64_t>(f[9], "instance_hash", 16);
        if (!f[10].empty()) r.t = parse_int<int>(f[10], "t");
        r.correlation = parse_real(f[11], "correlation");
        r.predicted = parse_opt_real(f[12], "predicted");
        r.loss = parse_real(f[13], "loss");
        r.iterations = parse_int<int>(f[14], "iterations");
        r.rayleigh = parse_real(f[15], "rayleigh");
        r.converged = parse_flag(f[16], "converged");
        r.failed = parse_flag(f[17], "failed");
        if (with_wall && !f[18].empty()) r.wall_ms = parse_int<long long>(f[18], "wall_ms");
        out.push_back(std::move(r));
    }
    if (out.empty()) throw CsvError("no data rows");
    return out;
}

std::vector<RunRecord> read_raw_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CsvError("cannot open " + path);
    return read_raw_csv(in);
}

}  // namespace spiked::harness
