#pragma once

// Vehicle-level simulation of one affine-delay link: each vehicle entering at
// t waits a + b * (mass currently on the link).

#include <functional>
#include <queue>
#include <vector>

namespace due::oracle {

struct SimulatedVehicle {
    double entry;
    double delay;
};

/// `rate(t)` is the entry rate on [t_begin, t_end]; the flow is split into
/// `vehicles` equal parcels entering at the midpoints of equal-mass slices.
inline std::vector<SimulatedVehicle> simulate_link(double a, double b, const std::function<double(double)>& rate,
                                                   double t_begin, double t_end, int vehicles) {
    // Cumulative entries on a fine grid to place parcels.
    const int fine = 200000;
    const double h = (t_end - t_begin) / fine;
    std::vector<double> cumulative(fine + 1, 0.0);
    for (int i = 0; i < fine; ++i) cumulative[i + 1] = cumulative[i] + h * rate(t_begin + (i + 0.5) * h);
    const double total = cumulative.back();
    const double mass = total / vehicles;

    std::vector<SimulatedVehicle> out;
    std::priority_queue<double, std::vector<double>, std::greater<>> exits;
    int cell = 0;
    for (int v = 0; v < vehicles; ++v) {
        const double target = (v + 0.5) * mass;
        while (cell < fine && cumulative[cell + 1] < target) ++cell;
        const double w = (target - cumulative[cell]) / (cumulative[cell + 1] - cumulative[cell]);
        const double t = t_begin + (cell + w) * h;
        while (!exits.empty() && exits.top() <= t) exits.pop();
        const double delay = a + b * mass * static_cast<double>(exits.size());
        exits.push(t + delay);
        out.push_back({t, delay});
    }
    return out;
}

}  // namespace due::oracle
