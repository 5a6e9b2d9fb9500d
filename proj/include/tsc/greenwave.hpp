#pragma once

#include <stdexcept>
#include <vector>

#include "tsc/eval.hpp"

namespace tsc {

struct GreenwaveChain {
    int start_intersection = 0;  // first intersection of the chain
    long start_step = 0;
    int length = 0;
    bool eastbound = true;
};

struct GreenwaveReport {
    std::vector<GreenwaveChain> chains;           // phase-offset chains, length >= min_chain
    long chain_count = 0;
    long reduction_runs = 0;                      // consecutive-reduction runs, length >= min_chain
    int min_chain = 3;
};

namespace detail {

// A vehicle departs intersection n in the given artery direction at step t
// iff the pre-step phase is 0 (artery green) and that queue is nonempty.
inline bool artery_departure(const TrajectoryStep& snap, int n, bool eastbound) {
    int qi = eastbound ? 0 : 2;  // direction 1 or 3
    return snap.phases[static_cast<std::size_t>(n)] == 0 &&
           snap.queues[static_cast<std::size_t>(n)][static_cast<std::size_t>(qi)] > 0;
}

}  // namespace detail

// Detects greenwave structure in a linear-topology trajectory.
//
// Phase-offset chain: consecutive intersections n, n+1, ... (eastbound; the
// mirrored ordering westbound) where intersection n+j sees an artery
// departure at step t + j*u while feeding intersection n+j+1, and the final
// intersection of the chain holds artery green when the last departure
// reaches it -- a platoon flowing into green lights. Chains are counted
// once, at their maximal extent.
//
// Consecutive-reduction run: a travelling wave of queue relief -- the artery
// queue at intersection n decreases at step t, at intersection n+1 at step
// t + (u+1), and so on (mirrored westbound). The wave advances at u+1 slots
// per hop because a relieved queue's last car needs u slots of travel plus
// one service slot before the downstream queue can shrink behind it; at
// offset u the upstream drop's own departure arrives downstream exactly at
// the compared slot and cancels the drop, so offset-u waves cannot exist.
inline GreenwaveReport detect_greenwave(const Trajectory& traj, int travel_delay, int min_chain = 3) {
    if (traj.empty()) throw std::invalid_argument("empty trajectory");
    const int n_int = static_cast<int>(traj.front().phases.size());
    const long T = static_cast<long>(traj.size());
    const long u = travel_delay;
    if (T < static_cast<long>(min_chain) * u + 1)
        throw std::invalid_argument("trajectory too short for requested chain length");

    GreenwaveReport report;
    report.min_chain = min_chain;

    auto intersection_at = [&](bool east, int j) { return east ? j : n_int - 1 - j; };

    // Chains, counted at maximal extent only. Interior intersections must
    // depart a vehicle at their slot in the cascade; the final intersection
    // only needs to hold artery green when the platoon reaches it.
    for (bool east : {true, false}) {
        for (long t = 0; t < T; ++t) {
            for (int j0 = 0; j0 < n_int; ++j0) {
                int n0 = intersection_at(east, j0);
                if (!detail::artery_departure(traj[static_cast<std::size_t>(t)], n0, east)) continue;
                // Skip if extendable backward (counted from its true start).
                if (j0 > 0 && t >= u &&
                    detail::artery_departure(traj[static_cast<std::size_t>(t - u)],
                                             intersection_at(east, j0 - 1), east))
                    continue;
                int len = 1;
                while (j0 + len < n_int && t + static_cast<long>(len) * u < T &&
                       detail::artery_departure(traj[static_cast<std::size_t>(t + len * u)],
                                                intersection_at(east, j0 + len), east))
                    ++len;
                // Green-at-arrival extension for the element past the last
                // departure.
                if (j0 + len < n_int && t + static_cast<long>(len) * u < T &&
                    traj[static_cast<std::size_t>(t + len * u)]
                            .phases[static_cast<std::size_t>(intersection_at(east, j0 + len))] == 0)
                    ++len;
                if (len >= min_chain) {
                    report.chains.push_back({n0, t, len, east});
                    ++report.chain_count;
                }
            }
        }
    }

    // Consecutive-reduction runs: per-slot queue decreases cascading at the
    // drain-wave speed of u+1 slots per hop (see header comment for why
    // offset u is impossible).
    const long off = u + 1;
    auto drops = [&](long t, int n, bool east) {
        if (t < 0 || t + 1 >= T) return false;
        int qi = east ? 0 : 2;
        return traj[static_cast<std::size_t>(t + 1)].queues[static_cast<std::size_t>(n)][static_cast<std::size_t>(qi)] <
               traj[static_cast<std::size_t>(t)].queues[static_cast<std::size_t>(n)][static_cast<std::size_t>(qi)];
    };
    for (bool east : {true, false}) {
        for (long t = 0; t < T; ++t) {
            for (int j0 = 0; j0 < n_int; ++j0) {
                int n0 = intersection_at(east, j0);
                if (!drops(t, n0, east)) continue;
                if (j0 > 0 && drops(t - off, intersection_at(east, j0 - 1), east)) continue;
                int len = 1;
                while (j0 + len < n_int && drops(t + static_cast<long>(len) * off, intersection_at(east, j0 + len), east))
                    ++len;
                if (len >= min_chain) ++report.reduction_runs;
            }
        }
    }

    return report;
}

}  // namespace tsc
