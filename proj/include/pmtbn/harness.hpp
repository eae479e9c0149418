#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pmtbn/model.hpp"
#include "pmtbn/pmt.hpp"

namespace pmtbn {

inline constexpr std::size_t kDefaultTrainRows = 3840;
inline constexpr std::size_t kDefaultTestRows = 960;
inline constexpr double kDefaultGamma = 2.0;
inline constexpr std::size_t kDefaultSeedCount = 20;

/// Seeds 1..count.
std::vector<std::uint64_t> default_seeds(std::size_t count = kDefaultSeedCount);

struct StudyConfig {
    /// Fixed structure; the shipped default network when unset.
    std::optional<std::filesystem::path> structure_path;
    /// Ground-truth model; a random one per seed when unset.
    std::optional<std::filesystem::path> ground_truth_path;
    /// Whitelist for the audit; the fixed structure's own edges when unset.
    std::optional<std::filesystem::path> whitelist_path;
    std::size_t n_train = kDefaultTrainRows;
    std::size_t n_test = kDefaultTestRows;
    std::vector<std::uint64_t> seeds = default_seeds();
    double alpha = 1.0;
    /// Falls back to the structure file's class line.
    std::optional<std::string> class_name;
    double gamma = kDefaultGamma;
    /// Run seeds on worker threads. Results do not depend on it.
    bool parallel = true;

    /// Throws InvalidArgumentError on an out-of-range field.
    void validate() const;
};

/// Ground truth over (schema, dag): each CPT row takes one u in (0, 1) per
/// state, raises it to `gamma` and normalizes. Nodes are filled in schema
/// order, rows in row-major order, from a single SplitMix64(seed) stream.
NetworkModel random_ground_truth(const Schema& schema, const Dag& dag, std::uint64_t seed,
                                 double gamma);

struct ExperimentData {
    Dataset train;
    Dataset test;
};

/// One ancestral_sample(seed, n_train + n_test) stream; the first n_train
/// rows are the training split.
ExperimentData generate_experiment_data(const NetworkModel& ground_truth, std::uint64_t seed,
                                        std::size_t n_train, std::size_t n_test);

/// Fraction of rows whose class is predicted correctly from every other
/// observed variable. Throws EmptyDatasetError on an empty test set.
double evaluate_accuracy(const NetworkModel& model, const Dataset& test,
                         std::string_view class_name);

/// Accuracy of always predicting the training split's most frequent class
/// (lowest index on ties).
double majority_class_accuracy(const Dataset& train, const Dataset& test,
                               std::string_view class_name);

/// Seeds for the ground-truth and sampling streams of one study seed.
struct SeedStreams {
    std::uint64_t ground_truth;
    std::uint64_t data;
};
SeedStreams derive_seed_streams(std::uint64_t seed) noexcept;

struct SeedResult {
    std::uint64_t seed = 0;
    double tan_accuracy = 0.0;
    double fixed_accuracy = 0.0;
    double oracle_accuracy = 0.0;
    double majority_accuracy = 0.0;
    std::size_t tan_edges = 0;
    std::vector<Edge> flagged;
};

struct AccuracySummary {
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation; 0 for a single seed
};

struct ComparisonReport {
    std::string structure_source;
    std::string ground_truth_source;
    std::string class_name;
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    double alpha = 0.0;
    double gamma = 0.0;
    /// Pair scores computed during structure search (CMI evaluations).
    std::size_t tan_structure_scores = 0;
    std::size_t fixed_structure_scores = 0;

    std::vector<SeedResult> seeds;  // ascending by seed
    AccuracySummary tan;
    AccuracySummary fixed;
    AccuracySummary oracle;
    AccuracySummary majority;
    /// fixed.mean - tan.mean
    double gap = 0.0;
    /// Flagged TAN edge -> number of seeds where it was learned.
    std::map<Edge, std::size_t> flagged_edge_seeds;
};

AccuracySummary summarize(const std::vector<double>& values);

/// Both competitors per seed: TAN learned on the training split, and the
/// fixed structure with estimated CPTs. Both are scored on the same test
/// split, as is the ground truth itself (Bayes-optimal reference). A
/// failing seed aborts the study with a StudyError naming it.
ComparisonReport run_comparison(const StudyConfig& config);

/// Two-row accuracy table plus summary lines, for humans.
std::string render_comparison_table(const ComparisonReport& report);

/// Machine-readable report: key/value lines then a per-seed CSV block.
/// Identical reports produce identical bytes.
std::string emit_report(const ComparisonReport& report);

}  // namespace pmtbn
