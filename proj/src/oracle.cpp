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

#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "json.hpp"
#include "rng.hpp"

namespace selgate::oracle {

std::string_view LawName(ConfidenceLaw law) {
  switch (law) {
    case ConfidenceLaw::kCalibrated: return "calibrated";
    case ConfidenceLaw::kOverconfident: return "overconfident";
    case ConfidenceLaw::kConstant: return "constant";
  }
  return "?";
}

ConfidenceLaw ParseLaw(std::string_view name) {
  if (name == "calibrated") return ConfidenceLaw::kCalibrated;
  if (name == "overconfident") return ConfidenceLaw::kOverconfident;
  if (name == "constant") return ConfidenceLaw::kConstant;
  ThrowUsage("unknown confidence law '" + std::string(name) + "'");
}

void Params::Validate() const {
  const auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  for (double a : base_acc_by_group) {
    if (!prob(a)) ThrowUsage("base accuracy must be in [0,1]");
  }
  if (!prob(degradation_penalty)) ThrowUsage("degradation penalty must be in [0,1]");
  if (!prob(spread)) ThrowUsage("spread must be in [0,1]");
  if (!prob(malformed_rate)) ThrowUsage("malformed rate must be in [0,1]");
  if (!(letter_mass > 0.0 && letter_mass <= 1.0)) ThrowUsage("letter mass must be in (0,1]");
  if (confidence_quantum < 0.0 || confidence_quantum > 1.0) ThrowUsage("quantum must be in [0,1]");
  if (law == ConfidenceLaw::kConstant && !prob(law_value)) ThrowUsage("constant confidence must be in [0,1]");
  if (law == ConfidenceLaw::kOverconfident && !prob(law_value)) ThrowUsage("bias must be in [0,1]");
}

Draw DrawItem(const corpus::Item& item, std::string_view condition, gateway::Mode mode,
              const Params& params, std::uint64_t seed) {
  Rng difficulty(HashMix(seed, "difficulty|" + item.question_id));
  const double u = difficulty.Uniform();

  Draw d;
  double p = params.base_acc_by_group[static_cast<std::size_t>(item.group())];
  if (condition != "baseline18") p -= params.degradation_penalty;
  p += params.spread * (2.0 * u - 1.0);
  d.probability = std::clamp(p, 0.0, 1.0);

  Rng rng(HashMix(seed, "draw|" + item.question_id + "|" + std::string(condition) + "|" +
                            std::string(gateway::ModeName(mode))));
  d.correct = rng.Bernoulli(d.probability);
  if (d.correct) {
    d.choice = item.answer;
  } else {
    auto wrong = static_cast<std::size_t>(rng.Below(kNumLabels - 1));
    if (wrong >= LabelIndex(item.answer)) ++wrong;
    d.choice = static_cast<Label>(wrong);
  }

  switch (params.law) {
    case ConfidenceLaw::kCalibrated: d.confidence = d.probability; break;
    case ConfidenceLaw::kOverconfident: d.confidence = std::min(1.0, d.probability + params.law_value); break;
    case ConfidenceLaw::kConstant: d.confidence = params.law_value; break;
  }
  if (params.confidence_quantum > 0.0) {
    const double q = params.confidence_quantum;
    d.confidence = std::clamp(std::round(d.confidence / q) * q, 0.0, 1.0);
  }
  return d;
}

namespace {

std::vector<gateway::Candidate> LetterCandidates(const Draw& d, const Params& params) {
  // Renormalised over A-E the chosen option gets max(confidence, 0.2) and the
  // rest share the remainder, so the chosen letter stays the argmax.
  const double top = std::max(d.confidence, 1.0 / kNumLabels);
  const double rest = (1.0 - top) / (kNumLabels - 1);
  std::vector<gateway::Candidate> cands;
  for (Label l : kAllLabels) {
    const double share = l == d.choice ? top : rest;
    if (share > 0.0) cands.push_back({LabelString(l), std::log(params.letter_mass * share)});
  }
  if (params.letter_mass < 1.0) {
    const double other = 1.0 - params.letter_mass;
    cands.push_back({" " + LabelString(d.choice), std::log(other * 0.6)});
    cands.push_back({"The", std::log(other * 0.4)});
  }
  std::stable_sort(cands.begin(), cands.end(),
                   [](const auto& a, const auto& b) { return a.logprob > b.logprob; });
  if (cands.size() > static_cast<std::size_t>(gateway::kLogprobTopK)) cands.resize(gateway::kLogprobTopK);
  return cands;
}

// Best-effort id of a request that failed to parse, so the reply still pairs up.
std::string PeekId(const std::string& line) {
  const auto j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_object() && j.contains("id") && j["id"].is_string()) return j["id"].get<std::string>();
  return "";
}

}  // namespace

gateway::Response Respond(const corpus::Item& item, std::string_view condition,
                          const gateway::Request& request, const Params& params,
                          std::uint64_t seed, int attempt) {
  const auto mode = request.config.mode;
  const Draw d = DrawItem(item, condition, mode, params, seed);

  gateway::Response r;
  r.id = request.id;
  r.ok = true;
  r.latency_ms = 0.0;
  r.model_id = "oracle-" + std::string(LawName(params.law));

  Rng noise(HashMix(seed, "malformed|" + item.question_id + "|" + std::string(condition) + "|" +
                              std::string(gateway::ModeName(mode)) + "|" + std::to_string(attempt)));
  if (noise.Bernoulli(params.malformed_rate)) {
    r.raw_text = "I think the answer is " + LabelString(d.choice);
    return r;
  }

  if (mode == gateway::Mode::kJson) {
    gateway::Payload p;
    p.choice = d.choice;
    p.confidence = d.confidence;
    p.abstain = d.confidence < 0.25;
    if (!request.frames.empty()) {
      p.evidence_span = std::make_pair(0LL, static_cast<long long>(request.frames.size()) - 1);
    }
    r.raw_text = gateway::SerializePayload(p);
  } else {
    r.raw_text = LabelString(d.choice);
    r.candidates = LetterCandidates(d, params);
  }
  return r;
}

int Serve(std::istream& in, std::ostream& out, const corpus::AnswerKey& key,
          std::string_view condition, const Params& params, std::uint64_t seed,
          long crash_after) {
  params.Validate();
  std::map<std::string, int> attempts;
  std::string line;
  long served = 0;
  while (std::getline(in, line)) {
    if (Trim(line).empty()) continue;
    if (crash_after > 0 && served >= crash_after) return 1;
    gateway::Response r;
    try {
      const auto request = gateway::ParseRequest(line);
      r.id = request.id;
      const auto* item = key.Find(request.id);
      if (!item) {
        r.ok = false;
        r.error = "unknown_item";
      } else {
        r = Respond(*item, condition, request, params, seed, attempts[request.id]++);
      }
    } catch (const Error& e) {
      r = gateway::Response{};
      r.id = PeekId(line);
      r.ok = false;
      const std::string what = e.what();
      r.error = what.find("unknown mode") != std::string::npos ? "bad_mode" : "bad_request";
    }
    out << gateway::SerializeResponse(r) << '\n';
    out.flush();
    ++served;
  }
  return 0;
}

}  // namespace selgate::oracle
