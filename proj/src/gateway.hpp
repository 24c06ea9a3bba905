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

// Model gateway: drives a model adapter over a line protocol, parses its
// structured output strictly, and turns option logprobs into a distribution.

#ifndef SELGATE_GATEWAY_HPP_
#define SELGATE_GATEWAY_HPP_

#include <array>
#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "common.hpp"
#include "corpus.hpp"
#include "subprocess.hpp"

namespace selgate::gateway {

enum class Mode { kJson, kLetter };
std::string_view ModeName(Mode mode);
Mode ParseMode(std::string_view name);  // usage error if unknown

inline constexpr double kTemperature = 0.0;
inline constexpr int kMaxTokens = 256;
inline constexpr int kLogprobTopK = 20;
inline constexpr double kMissingLogprob = -100.0;

struct GenerationConfig {
  Mode mode = Mode::kJson;
  double temperature = kTemperature;
  int max_tokens = kMaxTokens;
  int logprob_top_k = kLogprobTopK;  // sent in letter mode only
  std::string prompt_version = "v1";

  void Validate() const;
};

enum class FailureReason {
  kNone,
  kNotJson,
  kNotObject,
  kMissingKey,
  kExtraKey,
  kDuplicateKey,
  kBadChoice,
  kBadConfidence,
  kConfidenceOutOfRange,
  kBadAbstain,
  kBadEvidenceSpan,
  kNotSingleLetter,
  kBadLogprobs,
  kAdapterError,
};
std::string_view ReasonName(FailureReason reason);
FailureReason ParseReason(std::string_view name);

template <typename T>
struct Parsed {
  std::optional<T> value;
  FailureReason reason = FailureReason::kNone;
  std::string detail;

  bool ok() const { return value.has_value(); }
  static Parsed Fail(FailureReason r, std::string d) { return Parsed{std::nullopt, r, std::move(d)}; }
};

struct Payload {
  std::optional<Label> choice;
  std::optional<double> confidence;  // JSON null means missing
  bool abstain = false;
  std::optional<std::pair<long long, long long>> evidence_span;

  bool operator==(const Payload&) const = default;
};

// Accepts exactly {"choice","confidence","abstain","evidence_span"}, optionally
// wrapped in a Markdown code fence, surrounded by whitespace.
Parsed<Payload> ParseJsonPayload(std::string_view raw_text);
std::string SerializePayload(const Payload& payload);

// A single A-E letter after trimming whitespace and at most one trailing
// punctuation mark. Case-insensitive.
Parsed<Label> ParseLetter(std::string_view raw_text);

struct Candidate {
  std::string token;
  double logprob = 0.0;
};

struct OptionLogprobs {
  std::array<double, kNumLabels> values{};
  std::array<bool, kNumLabels> present{};  // false where filled with -100
};

// Exact single-character tokens "A".."E" only; first occurrence wins. Throws a
// data error on non-finite or positive logprobs.
OptionLogprobs ExtractOptionLogprobs(const std::vector<Candidate>& candidates);

struct OptionDistribution {
  std::array<double, kNumLabels> p{};
  double p_max = 0.0;
  double margin = 0.0;
  double entropy_norm = 0.0;
};

// Softmax over the five option logprobs (max-subtracted), then p_max, top-two
// margin and entropy normalised by log 5.
OptionDistribution Renormalize(const std::array<double, kNumLabels>& logprobs);

struct Record {
  std::string question_id;
  std::string condition;
  Mode mode = Mode::kJson;
  bool parse_ok = false;
  bool retry_used = false;
  std::optional<Payload> payload;  // absent iff parse failed
  FailureReason failure = FailureReason::kNone;
  std::string failure_detail;
  std::optional<OptionLogprobs> option_logprobs;
  std::optional<OptionDistribution> option_distribution;
  std::string raw_text;
  std::optional<std::string> first_raw_text;  // set when a retry was sent
  double latency_ms = 0.0;
  std::string timestamp;
  std::string model_id;
};

std::string SerializeRecord(const Record& record);
Record ParseRecord(std::string_view line);
// Loads a predictions log. A final line without a trailing newline that does
// not parse (an interrupted write) is dropped.
std::vector<Record> LoadLog(const std::filesystem::path& path);

struct FrameRef {
  std::string path;
  double timestamp = 0.0;
};

struct Request {
  std::string id;
  GenerationConfig config;
  std::string question;
  std::array<std::string, kNumLabels> options;
  std::vector<FrameRef> frames;
};

struct Response {
  std::string id;
  bool ok = false;
  std::string raw_text;
  std::optional<std::vector<Candidate>> candidates;
  double latency_ms = 0.0;
  std::string model_id;
  std::string error;
};

std::string SerializeRequest(const Request& request);
Request ParseRequest(std::string_view line);  // data error if malformed
std::string SerializeResponse(const Response& response);
Response ParseResponse(std::string_view line);  // data error if malformed

// One request in flight at a time. nullopt means the transport failed.
class Adapter {
 public:
  virtual ~Adapter() = default;
  virtual std::optional<Response> Call(const Request& request) = 0;
  virtual bool healthy() const = 0;
};

// Adapter running as a child process over stdin/stdout.
class ProcessAdapter : public Adapter {
 public:
  explicit ProcessAdapter(const std::string& command_line,
                          std::chrono::milliseconds timeout = std::chrono::minutes(5));
  std::optional<Response> Call(const Request& request) override;
  bool healthy() const override { return healthy_; }

 private:
  LineProcess process_;
  std::chrono::milliseconds timeout_;
  bool healthy_ = true;
};

Request BuildRequest(const corpus::Item& item, const std::vector<FrameRef>& frames,
                     const GenerationConfig& config);

// Sends one request; on a parse failure sends exactly one retry. Transport
// failures produce a record with reason adapter_error and no retry.
Record RunItem(Adapter& adapter, const corpus::Item& item, const std::vector<FrameRef>& frames,
               const GenerationConfig& config, const std::string& condition);

// Interprets one adapter response under `mode`. Exposed for in-process use.
struct Interpretation {
  std::optional<Payload> payload;
  std::optional<OptionLogprobs> logprobs;
  std::optional<OptionDistribution> distribution;
  FailureReason reason = FailureReason::kNone;
  std::string detail;
};
Interpretation Interpret(const Response& response, Mode mode);

}  // namespace selgate::gateway

#endif  // SELGATE_GATEWAY_HPP_
