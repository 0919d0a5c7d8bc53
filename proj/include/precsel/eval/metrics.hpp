#pragma once

#include <vector>

#include "precsel/mlkit/model.hpp"

namespace precsel {

/// |Y ∩ Ŷ| / |Ŷ|. Both sets are sorted label indices; throws ContractError
/// for an empty prediction.
double accuracy(const LabelSet& truth, const LabelSet& pred);

/// min over predicted labels of `times[k]`, divided by t_star. Labels outside
/// `times` were never timed and count as +inf, as do infinite entries.
/// Throws ContractError unless t_star > 0.
double slowdown(const LabelSet& pred, const std::vector<double>& times, double t_star);

}  // namespace precsel
