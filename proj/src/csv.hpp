// Copyright 2026 The Selgate Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// sweep_results.csv and the other small tabular outputs.

#ifndef SELGATE_CSV_HPP_
#define SELGATE_CSV_HPP_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "metrics.hpp"

namespace selgate::csv {

inline constexpr std::string_view kSweepHeader =
    "epsilon,risk,coverage,abstention,acc_cond,ece,n_accepted";

// Shortest round-trip decimal; NaN becomes an empty field.
std::string Cell(double value);

std::string WriteSweep(const std::vector<metrics::SweepPoint>& points);
// Exact inverse of WriteSweep. Data error on a bad header or row.
std::vector<metrics::SweepPoint> ParseSweep(std::string_view text);
std::vector<metrics::SweepPoint> LoadSweep(const std::filesystem::path& path);

std::string WriteGroupTable(const std::vector<metrics::GroupRow>& rows);
std::string WriteReliability(const metrics::Reliability& reliability);

}  // namespace selgate::csv

#endif  // SELGATE_CSV_HPP_
