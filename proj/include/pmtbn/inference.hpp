#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pmtbn/factor.hpp"
#include "pmtbn/model.hpp"

namespace pmtbn {

/// Partial assignment: variable name -> observed state index.
using Evidence = std::map<std::string, StateIndex, std::less<>>;

/// Evidence from one dataset row: every observed variable except `exclude`.
Evidence evidence_from_row(const Schema& schema, std::span<const StateIndex> row,
                           std::string_view exclude = {});

enum class EliminationOrder {
    /// Next variable is the one with fewest neighbours in the current
    /// interaction graph; ties go to the lexicographically smallest name.
    MinDegree,
    /// Reverse of the model's deterministic topological order.
    ReverseTopological,
};

/// Normalization mass below which evidence is treated as impossible.
inline constexpr double kImpossibleEvidenceMass = 1e-300;

/// P(query | evidence) by variable elimination. The working product is
/// renormalized after every elimination step, so the result is exact up to
/// rounding without ever forming tiny intermediate masses.
std::vector<double> posterior(const NetworkModel& model, const Evidence& evidence,
                              std::string_view query,
                              EliminationOrder order = EliminationOrder::MinDegree);

/// Largest joint table brute_force_posterior() will enumerate.
inline constexpr std::uint64_t kBruteForceLimit = std::uint64_t{1} << 22;

/// P(query | evidence) by summing joint_probability over every full
/// assignment consistent with the evidence. Test oracle for posterior().
std::vector<double> brute_force_posterior(const NetworkModel& model, const Evidence& evidence,
                                          std::string_view query);

/// First index of the largest entry.
StateIndex argmax_state(std::span<const double> distribution);

struct Classification {
    StateIndex state;
    std::vector<double> distribution;
};

Classification classify(const NetworkModel& model, const Evidence& evidence,
                        std::string_view class_name);

/// Smallest k with u < p_0 + ... + p_k. If rounding leaves u above the
/// final cumulative sum, the last state with positive mass is returned.
StateIndex inverse_cdf(std::span<const double> distribution, double u);

/// n complete rows drawn node by node in topological order. Each draw uses
/// u = next_u64 / 2^64 from SplitMix64(seed) and the inverse CDF of the
/// CPT row. Identical (model, seed, n) give identical datasets.
Dataset ancestral_sample(const NetworkModel& model, std::uint64_t seed, std::size_t n);

}  // namespace pmtbn
