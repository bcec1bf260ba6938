#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "qdfss/excitonics.hpp"
#include "qdfss/sweep.hpp"

namespace qdfss {

/// Rounds to 9 significant digits so serialised numbers stay stable.
double round9(double x);

nlohmann::ordered_json to_json(const GateVoltages& gates);
nlohmann::ordered_json to_json(const ExcitonReport& report);

/// One row per record: parameter columns, then fss_ueV, beta, xi, l_x_eh_nm,
/// l_y_eh_nm, eps_e, eps_h, status. Failed points leave the numbers empty.
void write_sweep_csv(std::ostream& out, const SweepResult& result);

/// Grid sweeps only: FSS matrix with delta_v_tb down the rows and delta_v_rl
/// across the columns; the first row and column carry the axis values.
void write_fss_matrix_csv(std::ostream& out, const SweepResult& result);

/// Zero-crossing brackets and the minimum-FSS record.
nlohmann::ordered_json sweep_summary(const SweepResult& result, const std::string& mode);

nlohmann::ordered_json to_json(const OptimizeResult& result);
void write_trace_csv(std::ostream& out, const OptimizeResult& result);

}  // namespace qdfss
