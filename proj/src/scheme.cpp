#include "waveduo/scheme.hpp"

#include "waveduo/format.hpp"

#include <algorithm>
#include <cmath>

namespace waveduo {

namespace {
// Slack for rounding in dt = cfl_factor * dx / sqrt(a) when checking the bound.
constexpr double kCflSlack = 1e-12;
}  // namespace

double max_stable_dt(double a, double dx) {
    if (!(a > 0.0) || !(dx > 0.0)) throw ValidationError("max_stable_dt needs a > 0 and dx > 0");
    return std::min(1.0, 1.0 / std::sqrt(a)) * dx;
}

namespace detail {
void check_cfl(double a, double dx, double dt) {
    if (!(dt > 0.0)) throw ValidationError("time step must be positive");
    const double limit = max_stable_dt(a, dx);
    if (dt > limit * (1.0 + kCflSlack))
        throw ValidationError("CFL violation: dt = " + format_number(dt) + " exceeds min(1, 1/sqrt(a)) * dx = " +
                              format_number(limit));
}
}  // namespace detail

TimeSpec TimeSpec::make(double a, const GridSpec& grid, double T, double cfl_factor) {
    if (!(cfl_factor > 0.0 && cfl_factor <= 1.0))
        throw ValidationError("CFL violation: cfl_factor must lie in (0, 1], got " + format_number(cfl_factor));
    if (!(T >= 0.0) || !std::isfinite(T)) throw ValidationError("final time T must be finite and >= 0");
    TimeSpec ts;
    ts.cfl_factor = cfl_factor;
    ts.T = T;
    ts.dt = cfl_factor * max_stable_dt(a, grid.dx);
    ts.lambda = (ts.dt * ts.dt) / (grid.dx * grid.dx);
    // T/dt can land a hair above an integer through rounding alone.
    const double ratio = T / ts.dt;
    const double nearest = std::round(ratio);
    ts.steps = static_cast<long>(std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, ratio) ? nearest
                                                                                          : std::ceil(ratio));
    detail::check_cfl(a, grid.dx, ts.dt);
    return ts;
}

}  // namespace waveduo
