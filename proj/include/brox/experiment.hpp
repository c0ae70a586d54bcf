// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace brox::experiment {

enum class Experiment {
    hitting_law,
    maxlocal_law,
    bianeyor_k,
    bianeyor_c,
    borodin_check,
    exit_check,
    c1_table,
    theta_avg,
    jacobi_stationary,
    lil_track,
    bracket_l,
    bracket_i,
};

/// Command-line spelling, e.g. "hitting-law".
std::string_view name(Experiment e) noexcept;
/// Throws InvalidArgument for an unknown name.
Experiment parse_experiment(std::string_view text);
std::vector<Experiment> all_experiments();

/// Largest kappa * r / 2 accepted by the experiments that hit a level r.
inline constexpr double kMaxDriftExponent = 600.0;

struct ExperimentConfig {
    Experiment experiment = Experiment::hitting_law;
    double kappa = 2.0;
    /// Level r, or the time t for theta-avg and jacobi-stationary.
    double r_or_t = 100.0;
    std::size_t replicas = 1000;
    std::uint64_t seed = 1;
    double env_step = 1e-3;
    double space_step = 1e-3;
    double dt = 1e-4;
    std::string out_path;
    /// exit-check: one environment for every replica.
    bool quenched = false;
    /// Worker threads; 0 picks the hardware concurrency.
    unsigned threads = 0;

    /// Acceptance level of the DKW bands.
    double alpha = 0.01;
    /// Bracket slack.
    double epsilon = 0.3;
    double delta1 = 1.0;
    double c6 = 0.0;
    /// Path backend used by exit-check.
    std::string scheme = "lattice";
    /// Left end of the exit interval (exit-check); the right end is r_or_t.
    double exit_low = -1.0;
    /// KS thresholds; defaults depend on the experiment when unset.
    std::optional<double> ks_threshold;

    /// Throws InvalidArgument on a violated invariant.
    void validate() const;
};

/// Overrides the fields named in a JSON object. Unknown keys are an error.
void apply_json(ExperimentConfig& config, std::string_view json_text);

struct Row {
    std::size_t replica = 0;
    double kappa = 0.0;
    double r_or_t = 0.0;
    double value = 0.0;
    double normalized_value = 0.0;
    bool truncated = false;
    std::uint64_t seed = 0;

    friend bool operator==(const Row&, const Row&) = default;
};

struct Criterion {
    std::string name;
    double statistic = 0.0;
    double threshold = 0.0;
    bool pass = false;
};

struct Summary {
    std::string experiment;
    std::size_t replicas = 0;
    std::size_t truncated = 0;
    std::map<std::string, double> metrics;
    std::vector<Criterion> criteria;

    [[nodiscard]] bool all_pass() const noexcept;
    [[nodiscard]] std::string to_json() const;
};

struct ExperimentResult {
    std::vector<Row> rows;
    Summary summary;
};

/// Replica i draws from Stream(seed).split(i); rows come out in replica
/// order whatever the thread count. Errors of a replica are rethrown with
/// its index.
ExperimentResult run_experiment(const ExperimentConfig& config);

inline constexpr std::string_view kCsvHeader =
    "replica,kappa,r_or_t,value,normalized_value,truncated_flag,seed";

void write_csv(std::ostream& out, const std::vector<Row>& rows);
std::string format_csv(const std::vector<Row>& rows);
/// Throws IoError when the file cannot be written.
void export_csv(const std::vector<Row>& rows, const std::string& path);
/// Inverse of format_csv. Throws InvalidArgument on malformed input.
std::vector<Row> parse_csv(std::string_view text);

}  // namespace brox::experiment
