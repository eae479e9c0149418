#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pmtbn/model.hpp"

namespace pmtbn {

/// Non-negative table over the joint states of an ordered scope, stored
/// row-major (last scope variable varies fastest).
class Factor {
  public:
    /// The scopeless unit factor [1.0].
    Factor() : values_{1.0} {}
    Factor(std::vector<std::string> scope, std::vector<std::size_t> cardinalities,
           std::vector<double> values);

    /// P(child | parents) as a factor over [parents..., child].
    static Factor from_cpt(const Cpt& cpt);

    const std::vector<std::string>& scope() const noexcept { return scope_; }
    const std::vector<std::size_t>& cardinalities() const noexcept { return cards_; }
    const std::vector<double>& values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }

    std::optional<std::size_t> position(std::string_view var) const noexcept;
    bool contains(std::string_view var) const noexcept { return position(var).has_value(); }

    /// Entry for the given states, one per scope variable.
    double at(std::span<const StateIndex> states) const;

    double sum() const noexcept;

    /// Copy divided by `divisor`.
    Factor scaled(double divisor) const;

    bool operator==(const Factor&) const = default;

  private:
    std::vector<std::string> scope_;
    std::vector<std::size_t> cards_;
    std::vector<double> values_;
};

/// Pointwise product. Scope is f1's scope followed by f2's new variables.
/// Throws CardinalityMismatchError when a shared variable disagrees.
Factor factor_product(const Factor& f1, const Factor& f2);

/// Sums `var` out. Throws VariableNotInScopeError.
Factor factor_marginalize(const Factor& f, std::string_view var);

/// Keeps the slice var = state and drops var from the scope.
Factor factor_reduce(const Factor& f, std::string_view var, StateIndex state);

}  // namespace pmtbn
