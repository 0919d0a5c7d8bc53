#include "precsel/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "precsel/error.hpp"

namespace precsel {
namespace {

LabelSet canonical(LabelSet s) {
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
}

}  // namespace

double accuracy(const LabelSet& truth, const LabelSet& pred) {
    if (pred.empty()) throw ContractError("accuracy of an empty prediction");
    const LabelSet y = canonical(truth), p = canonical(pred);
    LabelSet common;
    std::set_intersection(y.begin(), y.end(), p.begin(), p.end(), std::back_inserter(common));
    return static_cast<double>(common.size()) / static_cast<double>(p.size());
}

double slowdown(const LabelSet& pred, const std::vector<double>& times, double t_star) {
    if (!(t_star > 0.0) || std::isinf(t_star)) throw ContractError("slowdown needs a finite t_star > 0");
    double best = std::numeric_limits<double>::infinity();
    for (int k : pred)
        if (k >= 0 && static_cast<std::size_t>(k) < times.size()) best = std::min(best, times[k]);
    return best / t_star;
}

}  // namespace precsel
