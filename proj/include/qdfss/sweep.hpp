#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qdfss/excitonics.hpp"
#include "qdfss/poisson.hpp"

namespace qdfss {

/// Quadrupole potential with the two asymmetric corrections:
///   (top, bottom, left, right) = (-v, -v - delta_v_tb, +v, +v + delta_v_rl).
struct QuadrupoleParam {
    double v = 0.0;
    double delta_v_rl = 0.0;  ///< added to the right gate
    double delta_v_tb = 0.0;  ///< subtracted from the bottom gate

    GateVoltages gates() const noexcept {
        GateVoltages g = GateVoltages::quadrupole(v);
        g.right += delta_v_rl;
        g.bottom -= delta_v_tb;
        return g;
    }
    bool operator==(const QuadrupoleParam&) const = default;
};

struct SweepRecord {
    std::vector<double> parameters;  ///< values of SweepResult::parameter_names
    GateVoltages gates;
    std::optional<ExcitonReport> report;  ///< empty when the point failed
    std::string status = "ok";
    double wall_seconds = 0.0;

    bool ok() const noexcept { return report.has_value(); }
};

/// Sign change of delta between two neighbouring points of a 1D sweep.
struct ZeroCrossing {
    double lo = 0.0;
    double hi = 0.0;
    /// Bisection result, when refinement ran.
    std::optional<double> refined;
    double refined_fss_ueV = 0.0;
    double refined_beta = 0.0;
    /// False when bisection ends on a finite jump (the hybrid principal axes
    /// swapped labels) instead of a zero.
    bool is_zero = true;
};

struct SweepResult {
    std::vector<std::string> parameter_names;
    std::vector<SweepRecord> records;
    std::vector<ZeroCrossing> crossings;
    /// Index of the successful record with the smallest FSS, if any.
    std::optional<std::size_t> min_fss_index;
    /// Set for grid sweeps: records are row-major with delta_v_tb as the row.
    std::size_t rows = 0;
    std::size_t cols = 0;
};

struct SweepOptions {
    /// 0 means one worker per hardware thread.
    std::size_t workers = 0;
    bool refine_crossings = true;
    double refine_tolerance_ueV = 0.01;
    std::size_t max_bisections = 40;

    bool operator==(const SweepOptions&) const = default;
};

/// Evaluates `points` in parallel; one record per point, in input order.
std::vector<SweepRecord> run_points(const DeviceSimulator& sim,
                                    const std::vector<std::vector<double>>& parameters,
                                    const std::vector<GateVoltages>& gates,
                                    std::size_t workers);

/// Evenly spaced quadrupole potentials v in [v_min, v_max].
SweepResult sweep_quadrupole(const DeviceSimulator& sim, double v_min, double v_max,
                             std::size_t n_points, const SweepOptions& options = {});

/// Left gate at v, other gates grounded.
SweepResult sweep_lateral(const DeviceSimulator& sim, double v_min, double v_max,
                          std::size_t n_points, const SweepOptions& options = {});

/// Cartesian product of delta_v_rl x delta_v_tb at a fixed quadrupole v.
SweepResult sweep_grid_asymmetric(const DeviceSimulator& sim, double v_fixed, double rl_min,
                                  double rl_max, double tb_min, double tb_max, std::size_t n_rl,
                                  std::size_t n_tb, const SweepOptions& options = {});

struct OptimizeBounds {
    QuadrupoleParam lower{-1.0, -0.3, -0.3};
    QuadrupoleParam upper{1.0, 0.3, 0.3};

    bool operator==(const OptimizeBounds&) const = default;
};

struct OptimizeOptions {
    std::size_t max_evaluations = 400;
    double fss_target_ueV = 0.01;
    double step_tolerance_V = 1e-4;
    double initial_step_V = 0.05;
    std::size_t max_restarts = 4;
    std::uint64_t seed = 0;

    bool operator==(const OptimizeOptions&) const = default;
};

struct TraceEntry {
    QuadrupoleParam param;
    double fss_ueV = 0.0;
    double beta = 0.0;
    std::string status = "ok";
};

struct OptimizeResult {
    QuadrupoleParam best;
    ExcitonReport report;
    std::vector<TraceEntry> trace;
    bool converged = false;
    std::string reason;
};

/// Bounded Nelder-Mead over the free coordinates of (v, delta_v_rl, delta_v_tb);
/// a coordinate whose bounds coincide is held fixed. Stops when FSS drops
/// below the target, when the simplex shrinks below the step tolerance after
/// the allowed restarts, or when the evaluation budget runs out (converged =
/// false, best point so far returned).
OptimizeResult minimize_fss(const DeviceSimulator& sim, const QuadrupoleParam& initial,
                            const OptimizeBounds& bounds, const OptimizeOptions& options = {});

}  // namespace qdfss
