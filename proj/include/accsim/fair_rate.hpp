#ifndef ACCSIM_FAIR_RATE_HPP
#define ACCSIM_FAIR_RATE_HPP

#include <vector>

namespace accsim {

// Analytic max-min oracle for the normalized fair rate: given excess
// capacity, weights and per-flow non-conformant demands, find the unique
// alpha with  C_ex = sum_i w_i * min(alpha, demand_i / w_i)  when demand
// exceeds capacity, and alpha = max_i(demand_i / w_i) otherwise.
struct FairRateProblem {
    double excess_capacity_bps = 0;
    std::vector<double> demands_bps;
    std::vector<double> weights;
};

struct FairRateSolution {
    double alpha = 0;                     // bits/second per unit weight
    std::vector<double> allocations_bps;  // w_i * min(alpha, demand_i / w_i)
    bool saturated = false;               // total demand > excess capacity
};

// Closed-form water filling over flows sorted by demand/weight.
// Throws std::invalid_argument on empty/mismatched vectors, non-positive
// weights or negative demands.
FairRateSolution solve_alpha(const FairRateProblem& p);

}  // namespace accsim

#endif  // ACCSIM_FAIR_RATE_HPP
