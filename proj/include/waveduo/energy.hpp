#pragma once

#include "waveduo/scheme.hpp"

#include <cmath>

namespace waveduo {

/// Discrete energy E^n, built from levels n and n+1, plus the damping sum
/// dt * sum_j c_j ((u^{n+1}_j - u^{n-1}_j) / (2 dt))^2 that closes the
/// dissipation identity E^n - E^{n-1} + damping_sum^n = 0.
template <typename Scalar = double>
struct EnergyRecord {
    long n = 0;
    double t = 0.0;
    Scalar e_ku{0}, e_pu{0}, e_ky{0}, e_py{0};
    Scalar e_total{0};
    Scalar damping_sum{0};
};

enum class Summation { Plain, Compensated };

namespace detail {

/// Neumaier summation.
template <typename Scalar>
struct CompensatedSum {
    Scalar sum{0}, carry{0};
    void add(Scalar v) {
        const Scalar t = sum + v;
        if (std::abs(sum) >= std::abs(v))
            carry += (sum - t) + v;
        else
            carry += (v - t) + sum;
        sum = t;
    }
    Scalar value() const { return sum + carry; }
};

template <typename Scalar, typename Term>
Scalar accumulate(Eigen::Index first, Eigen::Index last, Summation mode, Term&& term) {
    if (mode == Summation::Plain) {
        Scalar s{0};
        for (Eigen::Index j = first; j <= last; ++j) s += term(j);
        return s;
    }
    CompensatedSum<Scalar> s;
    for (Eigen::Index j = first; j <= last; ++j) s.add(term(j));
    return s.value();
}

}  // namespace detail

/// Sums run in ascending j; the total adds the components in the order
/// E_ku, E_pu, E_ky, E_py.
template <typename Scalar>
EnergyRecord<Scalar> compute_energy(const Vector<Scalar>& u_prev, const Vector<Scalar>& u_curr,
                                    const Vector<Scalar>& u_next, [[maybe_unused]] const Vector<Scalar>& y_prev,
                                    const Vector<Scalar>& y_curr, const Vector<Scalar>& y_next,
                                    const Vector<Scalar>& c, const GridSpec& grid, double dt, double a,
                                    Summation mode = Summation::Plain) {
    const Eigen::Index N = grid.N;
    const Scalar h = static_cast<Scalar>(dt);
    const Scalar dx = static_cast<Scalar>(grid.dx);
    const Scalar half{0.5};

    EnergyRecord<Scalar> r;
    r.e_ku = half * detail::accumulate<Scalar>(1, N, mode, [&](Eigen::Index j) {
                 const Scalar v = (u_next[j] - u_curr[j]) / h;
                 return v * v;
             });
    r.e_pu = static_cast<Scalar>(a) / Scalar(2) * detail::accumulate<Scalar>(0, N, mode, [&](Eigen::Index j) {
                 return ((u_curr[j + 1] - u_curr[j]) / dx) * ((u_next[j + 1] - u_next[j]) / dx);
             });
    r.e_ky = half * detail::accumulate<Scalar>(1, N, mode, [&](Eigen::Index j) {
                 const Scalar v = (y_next[j] - y_curr[j]) / h;
                 return v * v;
             });
    r.e_py = half * detail::accumulate<Scalar>(0, N, mode, [&](Eigen::Index j) {
                 return ((y_curr[j + 1] - y_curr[j]) / dx) * ((y_next[j + 1] - y_next[j]) / dx);
             });
    r.e_total = r.e_ku + r.e_pu + r.e_ky + r.e_py;
    r.damping_sum = h * detail::accumulate<Scalar>(1, N, mode, [&](Eigen::Index j) {
                        const Scalar v = (u_next[j] - u_prev[j]) / (Scalar(2) * h);
                        return c[j] * v * v;
                    });
    return r;
}

/// Energy for the window carried by a step event.
template <typename Scalar>
EnergyRecord<Scalar> compute_energy(const StepEvent<Scalar>& ev, const Vector<Scalar>& c, const GridSpec& grid,
                                    double dt, double a, Summation mode = Summation::Plain) {
    auto r = compute_energy(ev.state.u_prev, ev.state.u_curr, ev.next.u, ev.state.y_prev, ev.state.y_curr,
                            ev.next.y, c, grid, dt, a, mode);
    r.n = ev.n;
    r.t = ev.t;
    return r;
}

/// (E^n - E^{n-1}) + damping_sum^n; zero in exact arithmetic.
template <typename Scalar>
Scalar dissipation_residual(const EnergyRecord<Scalar>& current, const EnergyRecord<Scalar>& previous) {
    if (current.n != previous.n + 1)
        throw ValidationError("dissipation residual needs consecutive records, got n = " +
                              std::to_string(previous.n) + " and " + std::to_string(current.n));
    return (current.e_total - previous.e_total) + current.damping_sum;
}

}  // namespace waveduo
