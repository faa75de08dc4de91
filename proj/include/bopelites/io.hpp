// Copyright 2026 The bopelites Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bopelites/archive.hpp"
#include "bopelites/baselines.hpp"
#include "bopelites/bop_elites.hpp"
#include "bopelites/prediction.hpp"
#include "bopelites/problem.hpp"

namespace bope {

std::string to_string(DescriptorMode mode);
DescriptorMode parse_mode(const std::string& text);

struct ModelRecord {
  KernelParams params;
  double jitter = 1e-8;
};

/// Everything needed to score, re-bin or extend a finished run.
struct RunArtifact {
  std::string algorithm;
  std::string problem_id;
  DescriptorMode mode = DescriptorMode::WhiteBox;
  std::vector<int> resolution;
  long budget = 0;
  std::uint64_t seed = 0;
  nlohmann::json config;  // free-form echo of the run settings
  double qd_score = 0.0;
  std::size_t filled = 0;
  long evaluations = 0;
  long invalid_evaluations = 0;
  double wall_seconds = 0.0;
  double omega_final = 0.0;
  long alpha = 0;
  long beta = 0;
  std::vector<double> qd_trace;  // QD score after each evaluation
  std::vector<Observation> history;
  std::optional<ModelRecord> objective_model;
  std::vector<ModelRecord> descriptor_models;
};

nlohmann::json to_json(const RunConfig& config);
nlohmann::json to_json(const RunArtifact& artifact);
RunArtifact run_artifact_from_json(const nlohmann::json& j);

RunArtifact make_artifact(const std::string& algorithm, const RunResult& result);
RunArtifact make_artifact(const std::string& algorithm, const std::string& problem_id, DescriptorMode mode,
                          const std::vector<int>& resolution, long budget, std::uint64_t seed,
                          const nlohmann::json& config, const BaselineResult& result);

/// Archive rebuilt by replaying the history onto `grid`.
Archive replay(const RunArtifact& artifact, const RegionGrid& grid);

/// GPs conditioned on the artifact's valid history with the stored hyperparameters.
Surrogates rebuild_models(const RunArtifact& artifact, const Problem& problem);

void write_trace_csv(const std::filesystem::path& path, const std::vector<TraceRecord>& trace);
void write_archive_csv(const std::filesystem::path& path, const Archive& archive);
/// Archive columns plus predicted_value, region_probability, evaluated_true_value
/// (blank until scored), low_confidence and from_history.
void write_pm_csv(const std::filesystem::path& path, const PredictionMap& pm, const Box& input_box,
                  const PredictedScore* scored = nullptr, const Problem* problem = nullptr);

nlohmann::json to_json(const PredictionMap& pm);
PredictionMap prediction_map_from_json(const nlohmann::json& j);

/// Writes through a temporary file and a rename.
void write_text_atomic(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

/// Run directory layout: run.json, trace.csv, archive.csv.
void write_run_dir(const std::filesystem::path& dir, const RunArtifact& artifact,
                   const std::vector<TraceRecord>& trace, const Archive& archive);

}  // namespace bope
