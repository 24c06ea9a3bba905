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

// selgate-oracle: seeded synthetic model behind the adapter protocol.
// Usage: WB_ADAPTER_CMD="selgate-oracle --items items.jsonl --condition sparse6 --seed 7"

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "selgate/selgate.h"

int main(int argc, char** argv) {
  CLI::App app{"selgate-oracle: synthetic adapter with a known confidence law"};
  sg_oracle_options o;
  sg_oracle_options_init(&o);

  std::string items, condition, law = "calibrated";
  std::vector<double> base(o.base_acc, o.base_acc + 3);
  app.add_option("--items", items, "items.jsonl (answer key)")->required();
  app.add_option("--condition", condition, "Condition these requests belong to")->required();
  app.add_option("--seed", o.seed, "Seed");
  app.add_option("--law", law, "calibrated, overconfident or constant");
  app.add_option("--law-value", o.law_value, "Bias (overconfident) or value (constant)");
  app.add_option("--base-acc", base, "Correctness probability per group: causal temporal descriptive")
      ->expected(3)
      ->delimiter(',');
  app.add_option("--penalty", o.degradation_penalty, "Probability drop outside baseline18");
  app.add_option("--spread", o.spread, "Half-width of per-item probability spread");
  app.add_option("--quantum", o.confidence_quantum, "Round confidence to this step");
  app.add_option("--malformed-rate", o.malformed_rate, "Chance of a malformed response");
  app.add_option("--letter-mass", o.letter_mass, "First-token mass on A-E in letter mode");
  app.add_option("--crash-after", o.crash_after, "Exit after this many responses");
  CLI11_PARSE(app, argc, argv);

  for (int g = 0; g < 3; ++g) o.base_acc[g] = base[g];
  o.items = items.c_str();
  o.condition = condition.c_str();
  o.law = law.c_str();
  const sg_status s = sg_oracle_serve(&o);
  if (s != SG_OK) {
    std::cerr << "selgate-oracle: " << sg_last_error() << "\n";
    return static_cast<int>(s);
  }
  return 0;
}
