#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace picl {

struct lambda_grid {
    std::vector<double> candidates;

    // The default search grid: fine steps through 0.02, coarser to 0.1,
    // then tenths up to 1.
    static lambda_grid default_grid();
    // Candidates must be strictly increasing values in [0, 1].
    void validate() const;  // throws config_error
};

// Validation accuracy for one (lambda, seed) pair.
using lambda_evaluator = std::function<double(double lambda, std::uint64_t seed)>;

struct lambda_search_result {
    struct candidate_stats {
        double lambda = 0.0;
        std::vector<double> per_seed_accuracy;
        double mean_accuracy = 0.0;
    };
    std::vector<candidate_stats> per_candidate;  // grid order
    double optimal_lambda = 0.0;
    int n_seeds = 0;
};

// Evaluates every candidate under n_seeds noise seeds derived from
// master_seed and picks the best mean accuracy; exact ties go to the
// smaller lambda, so candidate order never affects the winner.
lambda_search_result grid_search(const lambda_grid& grid, int n_seeds,
                                 std::uint64_t master_seed, const lambda_evaluator& evaluate);

struct stability_stats {
    // distance_matrix[i][j] = |optimal[i] - optimal[j]|
    std::vector<std::vector<double>> distance_matrix;
    // Entry i: spread (max - min, normalized by the grid maximum) of the
    // optima from position i onward. Suffixes of length >= 2 only, so n-1
    // entries; a grid maximum of 0 normalizes to 0.
    std::vector<double> remaining_range;
};

stability_stats compute_stability(std::span<const double> optimal_lambdas, double grid_max);

}  // namespace picl
