#include "qdfss/sweep.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <thread>

namespace qdfss {

namespace {

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> out(n);
    if (n == 1) {
        out[0] = lo;
        return out;
    }
    for (std::size_t k = 0; k < n; ++k)
        out[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
    return out;
}

SweepRecord evaluate_point(const DeviceSimulator& sim, std::vector<double> params,
                           const GateVoltages& gates) {
    SweepRecord rec;
    rec.parameters = std::move(params);
    rec.gates = gates;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        rec.report = sim.evaluate(gates);
    } catch (const std::exception& e) {
        rec.status = std::string("error: ") + e.what();
    }
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

void find_minimum(SweepResult& result) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < result.records.size(); ++k) {
        const auto& r = result.records[k];
        if (r.ok() && r.report->fss_ueV < best) {
            best = r.report->fss_ueV;
            result.min_fss_index = k;
        }
    }
}

// Brackets sign changes of delta between neighbouring successful records and,
// optionally, bisects each one down to the FSS tolerance.
template <class GatesOf>
void find_crossings(const DeviceSimulator& sim, SweepResult& result, const SweepOptions& options,
                    GatesOf gates_of) {
    const auto& recs = result.records;
    for (std::size_t k = 0; k + 1 < recs.size(); ++k) {
        if (!recs[k].ok() || !recs[k + 1].ok()) continue;
        const double da = recs[k].report->delta_ueV;
        const double db = recs[k + 1].report->delta_ueV;
        const bool crosses = (da < 0.0 && db > 0.0) || (da > 0.0 && db < 0.0) ||
                             (da != 0.0 && db == 0.0);
        if (!crosses) continue;

        ZeroCrossing zc;
        zc.lo = recs[k].parameters.front();
        zc.hi = recs[k + 1].parameters.front();
        if (options.refine_crossings) {
            double lo = zc.lo, hi = zc.hi, dlo = da;
            double mid = hi;
            ExcitonReport at = *recs[k + 1].report;
            for (std::size_t it = 0;
                 it < options.max_bisections && at.fss_ueV > options.refine_tolerance_ueV; ++it) {
                mid = 0.5 * (lo + hi);
                try {
                    at = sim.evaluate(gates_of(mid));
                } catch (const std::exception&) {
                    break;
                }
                if ((at.delta_ueV < 0.0) == (dlo < 0.0)) {
                    lo = mid;
                    dlo = at.delta_ueV;
                } else {
                    hi = mid;
                }
            }
            zc.refined = mid;
            zc.refined_fss_ueV = at.fss_ueV;
            zc.refined_beta = at.beta;
            zc.is_zero = at.fss_ueV <= options.refine_tolerance_ueV;
        }
        result.crossings.push_back(zc);
    }
}

}  // namespace

std::vector<SweepRecord> run_points(const DeviceSimulator& sim,
                                    const std::vector<std::vector<double>>& parameters,
                                    const std::vector<GateVoltages>& gates, std::size_t workers) {
    if (parameters.size() != gates.size())
        throw std::invalid_argument("run_points: parameter and gate lists differ in length");
    const std::size_t n = gates.size();
    std::vector<SweepRecord> out(n);
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, std::max<std::size_t>(n, 1));

    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t k = next++; k < n; k = next++)
            out[k] = evaluate_point(sim, parameters[k], gates[k]);
    };
    if (workers <= 1) {
        work();
        return out;
    }
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    return out;
}

SweepResult sweep_quadrupole(const DeviceSimulator& sim, double v_min, double v_max,
                             std::size_t n_points, const SweepOptions& options) {
    if (n_points < 2) throw std::invalid_argument("sweep_quadrupole: n_points must be >= 2");
    SweepResult result;
    result.parameter_names = {"v_V"};
    std::vector<std::vector<double>> params;
    std::vector<GateVoltages> gates;
    for (double v : linspace(v_min, v_max, n_points)) {
        params.push_back({v});
        gates.push_back(GateVoltages::quadrupole(v));
    }
    result.records = run_points(sim, params, gates, options.workers);
    find_minimum(result);
    find_crossings(sim, result, options, [](double v) { return GateVoltages::quadrupole(v); });
    return result;
}

SweepResult sweep_lateral(const DeviceSimulator& sim, double v_min, double v_max,
                          std::size_t n_points, const SweepOptions& options) {
    if (n_points < 2) throw std::invalid_argument("sweep_lateral: n_points must be >= 2");
    SweepResult result;
    result.parameter_names = {"v_V"};
    std::vector<std::vector<double>> params;
    std::vector<GateVoltages> gates;
    for (double v : linspace(v_min, v_max, n_points)) {
        params.push_back({v});
        gates.push_back(GateVoltages::lateral(v));
    }
    result.records = run_points(sim, params, gates, options.workers);
    find_minimum(result);
    find_crossings(sim, result, options, [](double v) { return GateVoltages::lateral(v); });
    return result;
}

SweepResult sweep_grid_asymmetric(const DeviceSimulator& sim, double v_fixed, double rl_min,
                                  double rl_max, double tb_min, double tb_max, std::size_t n_rl,
                                  std::size_t n_tb, const SweepOptions& options) {
    if (n_rl == 0 || n_tb == 0)
        throw std::invalid_argument("sweep_grid_asymmetric: point counts must be >= 1");
    SweepResult result;
    result.parameter_names = {"v_V", "delta_v_rl_V", "delta_v_tb_V"};
    result.rows = n_tb;
    result.cols = n_rl;
    std::vector<std::vector<double>> params;
    std::vector<GateVoltages> gates;
    const auto rl = linspace(rl_min, rl_max, n_rl);
    for (double tb : linspace(tb_min, tb_max, n_tb)) {
        for (double r : rl) {
            const QuadrupoleParam q{v_fixed, r, tb};
            params.push_back({q.v, q.delta_v_rl, q.delta_v_tb});
            gates.push_back(q.gates());
        }
    }
    result.records = run_points(sim, params, gates, options.workers);
    find_minimum(result);
    return result;
}

namespace {

using Point = std::array<double, 3>;

QuadrupoleParam to_param(const Point& p) { return {p[0], p[1], p[2]}; }
Point to_point(const QuadrupoleParam& q) { return {q.v, q.delta_v_rl, q.delta_v_tb}; }

}  // namespace

OptimizeResult minimize_fss(const DeviceSimulator& sim, const QuadrupoleParam& initial,
                            const OptimizeBounds& bounds, const OptimizeOptions& options) {
    const Point lo = to_point(bounds.lower);
    const Point hi = to_point(bounds.upper);
    const Point start = to_point(initial);
    for (int d = 0; d < 3; ++d) {
        if (!(lo[d] <= hi[d])) throw std::invalid_argument("minimize_fss: inverted bounds");
        if (start[d] < lo[d] || start[d] > hi[d])
            throw std::invalid_argument("minimize_fss: initial point outside bounds");
    }
    std::vector<int> free;
    for (int d = 0; d < 3; ++d)
        if (hi[d] > lo[d]) free.push_back(d);

    OptimizeResult out;
    double best_f = std::numeric_limits<double>::infinity();
    bool budget_hit = false;

    auto clamp = [&](Point p) {
        for (int d = 0; d < 3; ++d) p[d] = std::clamp(p[d], lo[d], hi[d]);
        return p;
    };
    auto evaluate = [&](const Point& p) {
        if (out.trace.size() >= options.max_evaluations) {
            budget_hit = true;
            return std::numeric_limits<double>::infinity();
        }
        TraceEntry t;
        t.param = to_param(p);
        double f = std::numeric_limits<double>::infinity();
        try {
            const ExcitonReport r = sim.evaluate(t.param.gates());
            f = r.fss_ueV;
            t.fss_ueV = r.fss_ueV;
            t.beta = r.beta;
            if (f < best_f) {
                best_f = f;
                out.best = t.param;
                out.report = r;
            }
        } catch (const std::exception& e) {
            t.fss_ueV = std::numeric_limits<double>::quiet_NaN();
            t.status = std::string("error: ") + e.what();
        }
        out.trace.push_back(t);
        return f;
    };
    auto done = [&] { return best_f < options.fss_target_ueV || budget_hit; };

    evaluate(start);
    if (best_f < options.fss_target_ueV) {
        out.converged = true;
        out.reason = "target reached";
        return out;
    }
    if (!std::isfinite(best_f)) {
        out.best = initial;
        out.reason = budget_hit ? "evaluation budget exhausted" : "initial point failed";
        return out;
    }
    if (free.empty()) {
        out.converged = !budget_hit;
        out.reason = budget_hit ? "evaluation budget exhausted" : "no free parameters";
        return out;
    }

    std::mt19937_64 rng(options.seed);
    const std::size_t dim = free.size();
    for (std::size_t restart = 0; restart <= options.max_restarts && !done(); ++restart) {
        const double f_at_restart = best_f;
        // Fresh simplex around the best point; axis signs are randomised on restarts.
        std::vector<Point> x(dim + 1, to_point(out.best));
        std::vector<double> f(dim + 1, best_f);
        for (std::size_t i = 0; i < dim; ++i) {
            const int d = free[i];
            double sign = 1.0;
            if (restart > 0) sign = (rng() & 1u) ? 1.0 : -1.0;
            double step = sign * options.initial_step_V;
            if (x[0][d] + step > hi[d] || x[0][d] + step < lo[d]) step = -step;
            if (x[0][d] + step > hi[d] || x[0][d] + step < lo[d])
                step = (hi[d] - x[0][d] > x[0][d] - lo[d] ? 0.5 : -0.5) *
                       std::max(hi[d] - x[0][d], x[0][d] - lo[d]);
            x[i + 1][d] += step;
            x[i + 1] = clamp(x[i + 1]);
            f[i + 1] = evaluate(x[i + 1]);
            if (done()) break;
        }

        while (!done()) {
            std::vector<std::size_t> order(dim + 1);
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(),
                             [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });
            std::vector<Point> xs(dim + 1);
            std::vector<double> fs(dim + 1);
            for (std::size_t i = 0; i <= dim; ++i) {
                xs[i] = x[order[i]];
                fs[i] = f[order[i]];
            }
            x = xs;
            f = fs;

            double diameter = 0.0;
            for (std::size_t i = 1; i <= dim; ++i)
                for (int d : free) diameter = std::max(diameter, std::abs(x[i][d] - x[0][d]));
            if (diameter < options.step_tolerance_V) break;

            Point c{};
            for (int d = 0; d < 3; ++d) c[d] = x[0][d];
            for (int d : free) {
                c[d] = 0.0;
                for (std::size_t i = 0; i < dim; ++i) c[d] += x[i][d];
                c[d] /= static_cast<double>(dim);
            }
            auto along = [&](double t) {
                Point p = c;
                for (int d : free) p[d] = c[d] + t * (x[dim][d] - c[d]);
                return clamp(p);
            };

            const Point xr = along(-1.0);
            const double fr = evaluate(xr);
            if (done()) break;
            if (fr < f[0]) {
                const Point xe = along(-2.0);
                const double fe = evaluate(xe);
                if (fe < fr) {
                    x[dim] = xe;
                    f[dim] = fe;
                } else {
                    x[dim] = xr;
                    f[dim] = fr;
                }
                continue;
            }
            if (fr < f[dim - 1]) {
                x[dim] = xr;
                f[dim] = fr;
                continue;
            }
            const bool outside = fr < f[dim];
            const Point xc = along(outside ? -0.5 : 0.5);
            const double fc = evaluate(xc);
            if (done()) break;
            if ((outside && fc <= fr) || (!outside && fc < f[dim])) {
                x[dim] = xc;
                f[dim] = fc;
                continue;
            }
            for (std::size_t i = 1; i <= dim && !done(); ++i) {
                for (int d : free) x[i][d] = x[0][d] + 0.5 * (x[i][d] - x[0][d]);
                f[i] = evaluate(x[i]);
            }
        }
        if (restart > 0 && !(best_f < f_at_restart)) break;
    }

    if (best_f < options.fss_target_ueV) {
        out.converged = true;
        out.reason = "target reached";
    } else if (budget_hit) {
        out.converged = false;
        out.reason = "evaluation budget exhausted";
    } else {
        out.converged = true;
        out.reason = "simplex below step tolerance";
    }
    return out;
}

}  // namespace qdfss
