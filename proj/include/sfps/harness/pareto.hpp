#pragma once

#include <algorithm>
#include <numeric>
#include <span>
#include <vector>

#include "sfps/core.hpp"

namespace sfps::harness {

/// Damage is minimized, survived drones maximized. Survived is a double so
/// seed-averaged values can be compared directly.
struct UtilityPoint {
    double damage_rate = 0.0;
    double survived_drones = 0.0;
};

inline bool dominates(const UtilityPoint& a, const UtilityPoint& b) {
    return a.damage_rate <= b.damage_rate && a.survived_drones >= b.survived_drones &&
           (a.damage_rate < b.damage_rate || a.survived_drones > b.survived_drones);
}

/// Indices of non-dominated points, ascending. O(n log n): after sorting by
/// damage, a point survives iff it has the best survived count within its
/// damage group and beats everything with strictly smaller damage.
inline std::vector<std::size_t> pareto_front(std::span<const UtilityPoint> points) {
    require(!points.empty(), "pareto_front: empty input");
    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto &pa = points[a], &pb = points[b];
        if (pa.damage_rate != pb.damage_rate) return pa.damage_rate < pb.damage_rate;
        return pa.survived_drones > pb.survived_drones;
    });

    std::vector<std::size_t> front;
    bool have_best = false;
    double best_before = 0.0;  // max survived over strictly smaller damage
    for (std::size_t g = 0; g < order.size();) {
        const double d = points[order[g]].damage_rate;
        const double group_max = points[order[g]].survived_drones;
        std::size_t end = g;
        while (end < order.size() && points[order[end]].damage_rate == d) ++end;
        if (!have_best || group_max > best_before) {
            for (std::size_t i = g; i < end && points[order[i]].survived_drones == group_max; ++i)
                front.push_back(order[i]);
        }
        if (!have_best || group_max > best_before) best_before = group_max;
        have_best = true;
        g = end;
    }
    std::sort(front.begin(), front.end());
    return front;
}

inline std::vector<bool> pareto_flags(std::span<const UtilityPoint> points) {
    std::vector<bool> flags(points.size(), false);
    for (auto i : pareto_front(points)) flags[i] = true;
    return flags;
}

}  // namespace sfps::harness
