#include "pmtbn/factor.hpp"

#include <cmath>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "pmtbn/errors.hpp"

namespace pmtbn {

namespace {

std::vector<std::size_t> strides_of(const std::vector<std::size_t>& cards) {
    std::vector<std::size_t> strides(cards.size());
    std::size_t s = 1;
    for (std::size_t i = cards.size(); i-- > 0;) {
        strides[i] = s;
        s *= cards[i];
    }
    return strides;
}

/// Walks every joint state of `cards` in row-major order, calling
/// fn(linear, a, b) where a and b are the linear offsets obtained with the
/// per-dimension strides `sa` and `sb` (0 for dimensions a source lacks).
template <typename Fn>
void odometer(const std::vector<std::size_t>& cards, const std::vector<std::size_t>& sa,
              const std::vector<std::size_t>& sb, Fn&& fn) {
    const std::size_t total =
        std::accumulate(cards.begin(), cards.end(), std::size_t{1}, std::multiplies<>());
    std::vector<std::size_t> digit(cards.size(), 0);
    std::size_t a = 0;
    std::size_t b = 0;
    for (std::size_t linear = 0; linear < total; ++linear) {
        fn(linear, a, b);
        for (std::size_t d = cards.size(); d-- > 0;) {
            if (++digit[d] < cards[d]) {
                a += sa[d];
                b += sb[d];
                break;
            }
            digit[d] = 0;
            a -= sa[d] * (cards[d] - 1);
            b -= sb[d] * (cards[d] - 1);
        }
    }
}

std::size_t require_position(const Factor& f, std::string_view var) {
    auto pos = f.position(var);
    if (!pos) {
        throw VariableNotInScopeError(fmt::format("variable '{}' not in factor scope [{}]", var,
                                                  fmt::join(f.scope(), ", ")));
    }
    return *pos;
}

}  // namespace

Factor::Factor(std::vector<std::string> scope, std::vector<std::size_t> cardinalities,
               std::vector<double> values)
    : scope_(std::move(scope)), cards_(std::move(cardinalities)), values_(std::move(values)) {
    if (scope_.size() != cards_.size()) {
        throw InvalidArgumentError("factor scope and cardinality lists differ in length");
    }
    std::set<std::string_view> seen;
    std::size_t expected = 1;
    for (std::size_t i = 0; i < scope_.size(); ++i) {
        if (!seen.insert(scope_[i]).second) {
            throw DuplicateError(fmt::format("variable '{}' repeated in factor scope", scope_[i]));
        }
        if (cards_[i] == 0) throw InvalidArgumentError("zero cardinality in factor");
        expected *= cards_[i];
    }
    if (values_.size() != expected) {
        throw InvalidArgumentError(
            fmt::format("factor table has {} entries, scope needs {}", values_.size(), expected));
    }
    for (double v : values_) {
        if (!std::isfinite(v) || v < 0.0) {
            throw InvalidArgumentError(fmt::format("factor entry {} is not finite and >= 0", v));
        }
    }
}

Factor Factor::from_cpt(const Cpt& cpt) {
    auto scope = cpt.parents();
    scope.push_back(cpt.child());
    auto cards = cpt.parent_cardinalities();
    cards.push_back(cpt.cardinality());
    return Factor(std::move(scope), std::move(cards), cpt.table());
}

std::optional<std::size_t> Factor::position(std::string_view var) const noexcept {
    for (std::size_t i = 0; i < scope_.size(); ++i) {
        if (scope_[i] == var) return i;
    }
    return std::nullopt;
}

double Factor::at(std::span<const StateIndex> states) const {
    if (states.size() != scope_.size()) {
        throw InvalidArgumentError("state list does not match factor scope");
    }
    std::size_t idx = 0;
    for (std::size_t i = 0; i < states.size(); ++i) {
        if (states[i] < 0 || static_cast<std::size_t>(states[i]) >= cards_[i]) {
            throw InvalidArgumentError(fmt::format("state {} out of range for '{}'", states[i], scope_[i]));
        }
        idx = idx * cards_[i] + static_cast<std::size_t>(states[i]);
    }
    return values_[idx];
}

double Factor::sum() const noexcept {
    double s = 0.0;
    for (double v : values_) s += v;
    return s;
}

Factor Factor::scaled(double divisor) const {
    Factor out = *this;
    for (double& v : out.values_) v /= divisor;
    return out;
}

Factor factor_product(const Factor& f1, const Factor& f2) {
    auto scope = f1.scope();
    auto cards = f1.cardinalities();
    for (std::size_t j = 0; j < f2.scope().size(); ++j) {
        auto pos = f1.position(f2.scope()[j]);
        if (pos) {
            if (f1.cardinalities()[*pos] != f2.cardinalities()[j]) {
                throw CardinalityMismatchError(fmt::format(
                    "variable '{}' has cardinality {} in one factor and {} in the other",
                    f2.scope()[j], f1.cardinalities()[*pos], f2.cardinalities()[j]));
            }
        } else {
            scope.push_back(f2.scope()[j]);
            cards.push_back(f2.cardinalities()[j]);
        }
    }

    const auto st1 = strides_of(f1.cardinalities());
    const auto st2 = strides_of(f2.cardinalities());
    std::vector<std::size_t> sa(scope.size(), 0);
    std::vector<std::size_t> sb(scope.size(), 0);
    for (std::size_t d = 0; d < scope.size(); ++d) {
        if (auto p = f1.position(scope[d])) sa[d] = st1[*p];
        if (auto p = f2.position(scope[d])) sb[d] = st2[*p];
    }

    std::size_t total = std::accumulate(cards.begin(), cards.end(), std::size_t{1}, std::multiplies<>());
    std::vector<double> values(total);
    const auto& v1 = f1.values();
    const auto& v2 = f2.values();
    odometer(cards, sa, sb, [&](std::size_t i, std::size_t a, std::size_t b) { values[i] = v1[a] * v2[b]; });
    return Factor(std::move(scope), std::move(cards), std::move(values));
}

Factor factor_marginalize(const Factor& f, std::string_view var) {
    const auto pos = require_position(f, var);
    std::vector<std::string> scope;
    std::vector<std::size_t> cards;
    for (std::size_t i = 0; i < f.scope().size(); ++i) {
        if (i == pos) continue;
        scope.push_back(f.scope()[i]);
        cards.push_back(f.cardinalities()[i]);
    }
    const auto out_strides = strides_of(cards);
    std::vector<std::size_t> so(f.scope().size(), 0);
    for (std::size_t i = 0, k = 0; i < f.scope().size(); ++i) {
        if (i != pos) so[i] = out_strides[k++];
    }
    std::size_t total = std::accumulate(cards.begin(), cards.end(), std::size_t{1}, std::multiplies<>());
    std::vector<double> values(total, 0.0);
    const auto& in = f.values();
    odometer(f.cardinalities(), so, so, [&](std::size_t i, std::size_t o, std::size_t) { values[o] += in[i]; });
    return Factor(std::move(scope), std::move(cards), std::move(values));
}

Factor factor_reduce(const Factor& f, std::string_view var, StateIndex state) {
    const auto pos = require_position(f, var);
    if (state < 0 || static_cast<std::size_t>(state) >= f.cardinalities()[pos]) {
        throw InvalidArgumentError(fmt::format("state {} out of range for '{}'", state, var));
    }
    const auto in_strides = strides_of(f.cardinalities());
    std::vector<std::string> scope;
    std::vector<std::size_t> cards;
    std::vector<std::size_t> si;
    for (std::size_t i = 0; i < f.scope().size(); ++i) {
        if (i == pos) continue;
        scope.push_back(f.scope()[i]);
        cards.push_back(f.cardinalities()[i]);
        si.push_back(in_strides[i]);
    }
    const std::size_t base = static_cast<std::size_t>(state) * in_strides[pos];
    std::size_t total = std::accumulate(cards.begin(), cards.end(), std::size_t{1}, std::multiplies<>());
    std::vector<double> values(total);
    const auto& in = f.values();
    odometer(cards, si, si, [&](std::size_t o, std::size_t i, std::size_t) { values[o] = in[base + i]; });
    return Factor(std::move(scope), std::move(cards), std::move(values));
}

}  // namespace pmtbn
