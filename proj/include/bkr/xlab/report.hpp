// Copyright (c) bkrylov contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <ostream>

#include <nlohmann/json.hpp>

#include "bkr/xlab/experiments.hpp"

namespace bkr::xlab {

inline constexpr const char* kExperimentSchema = "bkr.experiment-report/1";
inline constexpr const char* kSmallBallSchema = "bkr.small-ball/1";

nlohmann::json to_json(const ExperimentReport& report);

/// One row per trial: trial,group,sigma_min,sigma_max,statistic,violated.
void write_trials_csv(std::ostream& out, const ExperimentReport& report);
/// Rows m,median_sigma_min,ratio for the counterexample sweep.
void write_decay_csv(std::ostream& out, const ExperimentReport& report);

/// report.json and trials.csv (plus decay.csv for the counterexample) under dir.
void write_report(const std::filesystem::path& dir, const ExperimentReport& report);

}  // namespace bkr::xlab
