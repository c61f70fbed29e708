#include "accsim/fair_rate.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace accsim {

FairRateSolution solve_alpha(const FairRateProblem& p) {
    const std::size_t n = p.demands_bps.size();
    if (n == 0 || p.weights.size() != n)
        throw std::invalid_argument("fair_rate: demand/weight vectors empty or mismatched");
    if (p.excess_capacity_bps < 0)
        throw std::invalid_argument("fair_rate: negative excess capacity");
    for (std::size_t i = 0; i < n; ++i) {
        if (p.weights[i] <= 0)
            throw std::invalid_argument("fair_rate: non-positive weight");
        if (p.demands_bps[i] < 0)
            throw std::invalid_argument("fair_rate: negative demand");
    }

    FairRateSolution sol;
    sol.allocations_bps.resize(n);

    const double total_demand = std::accumulate(p.demands_bps.begin(), p.demands_bps.end(), 0.0);
    if (total_demand <= p.excess_capacity_bps) {
        // Uncongested: everyone gets their demand, alpha = max demand/weight.
        sol.saturated = false;
        sol.alpha = 0;
        for (std::size_t i = 0; i < n; ++i) {
            sol.allocations_bps[i] = p.demands_bps[i];
            sol.alpha = std::max(sol.alpha, p.demands_bps[i] / p.weights[i]);
        }
        return sol;
    }

    // Water filling: walk flows in increasing demand/weight order, capping
    // each flow at its demand while the remainder per unit weight still
    // exceeds its normalized demand.
    sol.saturated = true;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return p.demands_bps[a] * p.weights[b] < p.demands_bps[b] * p.weights[a];
    });

    double remaining = p.excess_capacity_bps;
    double weight_left = std::accumulate(p.weights.begin(), p.weights.end(), 0.0);
    sol.alpha = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = order[k];
        const double level = p.demands_bps[i] / p.weights[i];
        if (level * weight_left <= remaining) {
            remaining -= p.demands_bps[i];
            weight_left -= p.weights[i];
            sol.alpha = level;   // alpha is at least the highest capped level
        } else {
            sol.alpha = remaining / weight_left;
            break;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double level = p.demands_bps[i] / p.weights[i];
        sol.allocations_bps[i] = level <= sol.alpha ? p.demands_bps[i] : sol.alpha * p.weights[i];
    }
    return sol;
}

}  // namespace accsim
