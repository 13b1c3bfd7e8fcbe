#include "picl/lambda_search.hpp"

#include <algorithm>
#include <cmath>

#include "picl/common.hpp"
#include "picl/rng.hpp"

namespace picl {

lambda_grid lambda_grid::default_grid() {
    lambda_grid g;
    g.candidates = {0.0, 0.002, 0.004, 0.006, 0.008, 0.01, 0.012, 0.014,
                    0.016, 0.018, 0.02, 0.04, 0.06, 0.08, 0.1, 0.2,
                    0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    return g;
}

void lambda_grid::validate() const {
    if (candidates.empty()) throw config_error("lambda grid is empty");
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const double c = candidates[i];
        if (!(c >= 0.0 && c <= 1.0) || std::isnan(c))
            throw config_error("lambda candidates must lie in [0, 1]");
        if (i > 0 && !(c > candidates[i - 1]))
            throw config_error("lambda candidates must be strictly increasing");
    }
}

lambda_search_result grid_search(const lambda_grid& grid, int n_seeds,
                                 std::uint64_t master_seed, const lambda_evaluator& evaluate) {
    if (grid.candidates.empty()) throw config_error("lambda grid is empty");
    if (n_seeds < 1) throw config_error("grid search needs at least one seed");
    if (!evaluate) throw config_error("grid search needs an evaluator");

    lambda_search_result result;
    result.n_seeds = n_seeds;
    for (double lambda : grid.candidates) {
        lambda_search_result::candidate_stats stats;
        stats.lambda = lambda;
        double sum = 0.0;
        for (int s = 0; s < n_seeds; ++s) {
            // Seeds depend only on (master, s), never on the candidate, so
            // every lambda faces the same noise draws.
            const std::uint64_t seed =
                derive_seed(derive_seed(master_seed, "search"), static_cast<std::uint64_t>(s));
            const double acc = evaluate(lambda, seed);
            if (!(acc >= 0.0 && acc <= 1.0))
                throw runtime_failure("evaluator returned accuracy outside [0, 1]");
            stats.per_seed_accuracy.push_back(acc);
            sum += acc;
        }
        stats.mean_accuracy = sum / static_cast<double>(n_seeds);
        result.per_candidate.push_back(std::move(stats));
    }

    // Best mean; exact ties resolve to the smaller lambda regardless of
    // candidate order.
    const lambda_search_result::candidate_stats* best = &result.per_candidate.front();
    for (const auto& c : result.per_candidate) {
        if (c.mean_accuracy > best->mean_accuracy ||
            (c.mean_accuracy == best->mean_accuracy && c.lambda < best->lambda))
            best = &c;
    }
    result.optimal_lambda = best->lambda;
    return result;
}

stability_stats compute_stability(std::span<const double> optimal_lambdas, double grid_max) {
    if (optimal_lambdas.empty()) throw config_error("stability needs at least one value");
    if (grid_max < 0.0) throw config_error("grid maximum must be non-negative");

    const std::size_t n = optimal_lambdas.size();
    stability_stats out;
    out.distance_matrix.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            out.distance_matrix[i][j] = std::abs(optimal_lambdas[i] - optimal_lambdas[j]);

    for (std::size_t i = 0; i + 1 < n; ++i) {
        double lo = optimal_lambdas[i], hi = optimal_lambdas[i];
        for (std::size_t c = i; c < n; ++c) {
            lo = std::min(lo, optimal_lambdas[c]);
            hi = std::max(hi, optimal_lambdas[c]);
        }
        out.remaining_range.push_back(grid_max == 0.0 ? 0.0 : (hi - lo) / grid_max);
    }
    return out;
}

}  // namespace picl
