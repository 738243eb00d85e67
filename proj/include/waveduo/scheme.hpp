#pragma once

#include "waveduo/model.hpp"

#include <Eigen/Dense>

#include <cassert>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

namespace waveduo {

/// A level produced with a non-finite entry; carries the offending time index.
class InstabilityError : public std::runtime_error {
public:
    InstabilityError(long step, const std::string& what)
        : std::runtime_error(what + " at step " + std::to_string(step)), step_(step) {}
    long step() const { return step_; }

private:
    long step_;
};

/// Largest stable time step, min(1, 1/sqrt(a)) * dx.
double max_stable_dt(double a, double dx);

struct TimeSpec {
    double dt = 0.0;
    double lambda = 0.0;  // dt^2 / dx^2
    double T = 0.0;
    double cfl_factor = 1.0;
    long steps = 0;  // index of the last time level, ceil(T / dt)

    static TimeSpec make(double a, const GridSpec& grid, double T, double cfl_factor = 1.0);
};

template <typename Scalar = double>
struct Level {
    Vector<Scalar> u;
    Vector<Scalar> y;
};

/// Rolling window of levels n-1 and n. At n = 0 the previous level is the
/// ghost level u^{-1} = u^1 - 2 dt u1(x).
template <typename Scalar = double>
struct WaveState {
    Vector<Scalar> u_prev, u_curr;
    Vector<Scalar> y_prev, y_curr;
    long n = 0;
    double t = 0.0;

    /// Shifts the window forward; `next` receives the dropped level's storage.
    void advance(Level<Scalar>& next, double dt) {
        u_prev.swap(u_curr);
        u_curr.swap(next.u);
        y_prev.swap(y_curr);
        y_curr.swap(next.y);
        ++n;
        t = static_cast<double>(n) * dt;
    }
};

/// Per-node update constants; entry k belongs to interior node j = k + 1.
template <typename Scalar = double>
struct NodeCoefficients {
    Array<Scalar> det;
    Array<Scalar> alpha, beta, gamma, rho, xi, kappa;
    Array<Scalar> alpha_t, beta_t, gamma_t, rho_t, xi_t, kappa_t;
    double dt = 0.0;
    double a = 1.0;

    Eigen::Index size() const { return det.size(); }
};

template <typename Scalar = double>
struct SampledCoefficients {
    Vector<Scalar> b, c;

    static SampledCoefficients make(const PhysicalConfig& config, const GridSpec& grid) {
        return {sample_profile<Scalar>(config.b, grid), sample_profile<Scalar>(config.c, grid)};
    }
};

template <typename Scalar = double>
struct SampledInitial {
    Vector<Scalar> u0, u1, y0, y1;

    static SampledInitial make(const InitialData& data, const GridSpec& grid) {
        return {data.u0.template sample<Scalar>(grid), data.u1.template sample<Scalar>(grid),
                data.y0.template sample<Scalar>(grid), data.y1.template sample<Scalar>(grid)};
    }
};

namespace detail {
void check_cfl(double a, double dx, double dt);
}

template <typename Scalar = double>
NodeCoefficients<Scalar> precompute_coefficients(const SampledCoefficients<Scalar>& sampled, double a,
                                                 const GridSpec& grid, double dt) {
    detail::check_cfl(a, grid.dx, dt);
    const Eigen::Index n = grid.N;
    const Scalar h = static_cast<Scalar>(dt);
    const Scalar sa = static_cast<Scalar>(a);
    const Array<Scalar> b = sampled.b.segment(1, n).array();
    const Array<Scalar> c = sampled.c.segment(1, n).array();

    NodeCoefficients<Scalar> k;
    k.dt = dt;
    k.a = a;
    const Array<Scalar> half_c = c * h / Scalar(2);
    const Array<Scalar> half_b2 = (b * h / Scalar(2)).square();
    const Array<Scalar> bdt = b * h;
    k.det = Scalar(1) + half_c + half_b2;

    k.alpha = Scalar(2) / k.det;
    k.beta = sa / k.det;
    k.gamma = (half_c + half_b2 - Scalar(1)) / k.det;
    k.rho = bdt / k.det;
    k.xi = bdt / (Scalar(2) * k.det);
    k.kappa = bdt / k.det;

    k.alpha_t = Scalar(2) - bdt.square() / (Scalar(2) * k.det);
    k.beta_t = Scalar(1) - bdt.square() / (Scalar(4) * k.det);
    k.gamma_t = bdt.square() / (Scalar(2) * k.det) - Scalar(1);
    k.rho_t = bdt / k.det;
    k.xi_t = sa * bdt / (Scalar(2) * k.det);
    k.kappa_t = -bdt / k.det;
    return k;
}

template <typename Scalar = double>
NodeCoefficients<Scalar> precompute_coefficients(const PhysicalConfig& config, const GridSpec& grid, double dt) {
    return precompute_coefficients(SampledCoefficients<Scalar>::make(config, grid), config.a, grid, dt);
}

/// Level 1 from the ghost-level substitution, solved in closed form:
///   u^1 = u^0 + dt u1 + dt^2/2 (a D2 u^0 - b y1 - c u1)
///   y^1 = y^0 + dt y1 + dt^2/2 (D2 y^0 + b u1)
template <typename Scalar = double>
Level<Scalar> first_step(const SampledInitial<Scalar>& init, const SampledCoefficients<Scalar>& coef, double a,
                         const GridSpec& grid, double dt) {
    const Eigen::Index n = grid.N;
    const Scalar h = static_cast<Scalar>(dt);
    const Scalar inv_dx2 = Scalar(1) / static_cast<Scalar>(grid.dx * grid.dx);
    const auto lap = [&](const Vector<Scalar>& v) {
        return ((v.segment(2, n) - Scalar(2) * v.segment(1, n) + v.segment(0, n)) * inv_dx2).array();
    };
    const auto mid = [n](const Vector<Scalar>& v) { return v.segment(1, n).array(); };

    Level<Scalar> out{Vector<Scalar>::Zero(grid.size()), Vector<Scalar>::Zero(grid.size())};
    out.u.segment(1, n) = mid(init.u0) + h * mid(init.u1) +
                          h * h / Scalar(2) *
                              (static_cast<Scalar>(a) * lap(init.u0) - mid(coef.b) * mid(init.y1) -
                               mid(coef.c) * mid(init.u1));
    out.y.segment(1, n) = mid(init.y0) + h * mid(init.y1) +
                          h * h / Scalar(2) * (lap(init.y0) + mid(coef.b) * mid(init.u1));
    return out;
}

/// Window at n = 0: level 0 as current, the ghost level as previous.
template <typename Scalar = double>
WaveState<Scalar> initial_state(const SampledInitial<Scalar>& init, const Level<Scalar>& level1, double dt) {
    const Scalar two_dt = Scalar(2) * static_cast<Scalar>(dt);
    WaveState<Scalar> s;
    s.u_curr = init.u0;
    s.y_curr = init.y0;
    s.u_prev = level1.u - two_dt * init.u1;
    s.y_prev = level1.y - two_dt * init.y1;
    const Eigen::Index last = s.u_prev.size() - 1;
    s.u_prev[0] = s.u_prev[last] = Scalar(0);
    s.y_prev[0] = s.y_prev[last] = Scalar(0);
    s.n = 0;
    s.t = 0.0;
    return s;
}

/// Explicit update with the precomputed constants. `out` must already have
/// N+2 entries with zero boundaries; only interior entries are written.
template <typename Scalar>
void step_closed_form(const WaveState<Scalar>& s, const NodeCoefficients<Scalar>& k, Scalar lambda,
                      Level<Scalar>& out) {
    const Eigen::Index n = k.size();
    const Scalar a = static_cast<Scalar>(k.a);
    const Scalar one_m_alam = Scalar(1) - a * lambda;
    const Scalar one_m_lam = Scalar(1) - lambda;

    const auto uc = s.u_curr.segment(1, n).array();
    const auto up = s.u_prev.segment(1, n).array();
    const auto yc = s.y_curr.segment(1, n).array();
    const auto yp = s.y_prev.segment(1, n).array();
    const auto u_nb = s.u_curr.segment(2, n).array() + s.u_curr.segment(0, n).array();
    const auto y_nb = s.y_curr.segment(2, n).array() + s.y_curr.segment(0, n).array();

    out.u.segment(1, n) = one_m_alam * k.alpha * uc + lambda * k.beta * u_nb + k.gamma * up -
                          one_m_lam * k.rho * yc - lambda * k.xi * y_nb + k.kappa * yp;
    out.y.segment(1, n) = one_m_lam * k.alpha_t * yc + lambda * k.beta_t * y_nb + k.gamma_t * yp +
                          one_m_alam * k.rho_t * uc + lambda * k.xi_t * u_nb + k.kappa_t * up;
}

template <typename Scalar>
Level<Scalar> step_closed_form(const WaveState<Scalar>& s, const NodeCoefficients<Scalar>& k, Scalar lambda) {
    Level<Scalar> out{Vector<Scalar>::Zero(s.u_curr.size()), Vector<Scalar>::Zero(s.y_curr.size())};
    step_closed_form(s, k, lambda, out);
    return out;
}

/// Builds the 2x2 system M_j [u, y]^{n+1} = [A_j, B_j] at every interior node
/// and inverts M_j by cofactors.
template <typename Scalar>
void step_reference_solve(const WaveState<Scalar>& s, const SampledCoefficients<Scalar>& coef, Scalar lambda,
                          Scalar a, Scalar dt, Level<Scalar>& out) {
    using Mat2 = Eigen::Matrix<Scalar, 2, 2>;
    using Vec2 = Eigen::Matrix<Scalar, 2, 1>;
    const Eigen::Index last = s.u_curr.size() - 1;
    for (Eigen::Index j = 1; j < last; ++j) {
        const Scalar hb = coef.b[j] * dt / Scalar(2);
        const Scalar hc = coef.c[j] * dt / Scalar(2);
        Mat2 m;
        m << Scalar(1) + hc, hb, -hb, Scalar(1);
        const Scalar det = m.determinant();
        assert(det > Scalar(0) && "M_j is singular; damping must be nonnegative");

        const Scalar rhs_u = Scalar(2) * (Scalar(1) - a * lambda) * s.u_curr[j] + (hc - Scalar(1)) * s.u_prev[j] +
                             a * lambda * (s.u_curr[j + 1] + s.u_curr[j - 1]) + hb * s.y_prev[j];
        const Scalar rhs_y = Scalar(2) * (Scalar(1) - lambda) * s.y_curr[j] +
                             lambda * (s.y_curr[j + 1] + s.y_curr[j - 1]) - s.y_prev[j] - hb * s.u_prev[j];

        Mat2 inv;
        inv << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
        const Vec2 next = (inv / det) * Vec2(rhs_u, rhs_y);
        out.u[j] = next[0];
        out.y[j] = next[1];
    }
    out.u[0] = out.u[last] = Scalar(0);
    out.y[0] = out.y[last] = Scalar(0);
}

template <typename Scalar>
Level<Scalar> step_reference_solve(const WaveState<Scalar>& s, const SampledCoefficients<Scalar>& coef,
                                   Scalar lambda, Scalar a, Scalar dt) {
    Level<Scalar> out{Vector<Scalar>::Zero(s.u_curr.size()), Vector<Scalar>::Zero(s.y_curr.size())};
    step_reference_solve(s, coef, lambda, a, dt, out);
    return out;
}

enum class StepMode { ClosedForm, ReferenceSolve };

/// What an observer sees: the window (levels n-1, n) and the fresh level n+1.
template <typename Scalar = double>
struct StepEvent {
    long n;
    double t;
    const WaveState<Scalar>& state;
    const Level<Scalar>& next;
    bool last;
};

struct RunOptions {
    long stride = 1;
    StepMode mode = StepMode::ClosedForm;
    /// Scan every fresh level for NaN/Inf, not only the observed ones.
    bool check_every_step = false;
};

template <typename Scalar = double>
using Observer = std::function<void(const StepEvent<Scalar>&)>;

/// Marches from level 0 to level `time.steps`. The observer fires for
/// n = 0, stride, 2*stride, ... and for the last window (n = steps - 1), each
/// time with level n+1 freshly computed. Returns the window at n = steps.
template <typename Scalar = double>
WaveState<Scalar> run(const PhysicalConfig& config, const GridSpec& grid, const TimeSpec& time,
                      const InitialData& initial, const Observer<Scalar>& observer = {},
                      const RunOptions& options = {}) {
    if (options.stride < 1) throw ValidationError("observer stride must be >= 1");
    const auto coef = SampledCoefficients<Scalar>::make(config, grid);
    const auto init = SampledInitial<Scalar>::make(initial, grid);
    const auto k = precompute_coefficients(coef, config.a, grid, time.dt);
    const Scalar lambda = static_cast<Scalar>(time.lambda);
    const Scalar a = static_cast<Scalar>(config.a);
    const Scalar dt = static_cast<Scalar>(time.dt);

    Level<Scalar> next = first_step(init, coef, config.a, grid, time.dt);
    WaveState<Scalar> state = initial_state(init, next, time.dt);
    if (time.steps == 0) return state;

    for (long n = 0; n < time.steps; ++n) {
        if (n > 0) {
            if (options.mode == StepMode::ClosedForm)
                step_closed_form(state, k, lambda, next);
            else
                step_reference_solve(state, coef, lambda, a, dt, next);
        }
        const bool last = n + 1 == time.steps;
        const bool observed = n % options.stride == 0 || last;
        if ((observed || options.check_every_step) && !(next.u.allFinite() && next.y.allFinite()))
            throw InstabilityError(n + 1, "non-finite value in computed level");
        if (observed && observer) observer(StepEvent<Scalar>{n, state.t, state, next, last});
        state.advance(next, time.dt);
    }
    return state;
}

}  // namespace waveduo
