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

#include "gateway.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "json.hpp"

namespace selgate::gateway {

using nlohmann::ordered_json;

std::string_view ModeName(Mode mode) {
  return mode == Mode::kJson ? "json" : "letter";
}

Mode ParseMode(std::string_view name) {
  if (name == "json") return Mode::kJson;
  if (name == "letter") return Mode::kLetter;
  ThrowUsage("unknown mode '" + std::string(name) + "' (expected json or letter)");
}

void GenerationConfig::Validate() const {
  if (temperature != kTemperature) ThrowUsage("temperature must be 0");
  if (max_tokens != kMaxTokens) ThrowUsage("max_tokens must be 256");
  if (mode == Mode::kLetter && logprob_top_k != kLogprobTopK) {
    ThrowUsage("letter mode requires logprob_top_k = 20");
  }
  if (prompt_version.empty()) ThrowUsage("prompt_version must be set");
}

namespace {

constexpr std::array<std::pair<FailureReason, std::string_view>, 14> kReasonNames = {{
    {FailureReason::kNone, "none"},
    {FailureReason::kNotJson, "not_json"},
    {FailureReason::kNotObject, "not_object"},
    {FailureReason::kMissingKey, "missing_key"},
    {FailureReason::kExtraKey, "extra_key"},
    {FailureReason::kDuplicateKey, "duplicate_key"},
    {FailureReason::kBadChoice, "bad_choice"},
    {FailureReason::kBadConfidence, "bad_confidence"},
    {FailureReason::kConfidenceOutOfRange, "confidence_out_of_range"},
    {FailureReason::kBadAbstain, "bad_abstain"},
    {FailureReason::kBadEvidenceSpan, "bad_evidence_span"},
    {FailureReason::kNotSingleLetter, "not_single_letter"},
    {FailureReason::kBadLogprobs, "bad_logprobs"},
    {FailureReason::kAdapterError, "adapter_error"},
}};

constexpr std::array<std::string_view, 4> kPayloadKeys = {"choice", "confidence", "abstain",
                                                          "evidence_span"};

// Strips one Markdown code fence (``` or ```json) around the body.
std::string_view StripFence(std::string_view text) {
  constexpr std::string_view kFence = "```";
  if (text.size() < 2 * kFence.size() || text.substr(0, 3) != kFence ||
      text.substr(text.size() - 3) != kFence) {
    return text;
  }
  std::string_view body = text.substr(3, text.size() - 6);
  if (body.substr(0, 4) == "json") body.remove_prefix(4);
  return body;
}

std::string_view TrimView(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

ordered_json LabelMapJson(const std::array<double, kNumLabels>& values) {
  ordered_json out = ordered_json::object();
  for (Label l : kAllLabels) out[LabelString(l)] = values[LabelIndex(l)];
  return out;
}

std::array<double, kNumLabels> LabelMapFromJson(const ordered_json& j) {
  std::array<double, kNumLabels> out{};
  for (Label l : kAllLabels) out[LabelIndex(l)] = j.at(LabelString(l)).get<double>();
  return out;
}

ordered_json PayloadJson(const Payload& p) {
  ordered_json j = ordered_json::object();
  j["choice"] = p.choice ? ordered_json(LabelString(*p.choice)) : ordered_json(nullptr);
  j["confidence"] = p.confidence ? ordered_json(*p.confidence) : ordered_json(nullptr);
  j["abstain"] = p.abstain;
  if (p.evidence_span) {
    j["evidence_span"] = {p.evidence_span->first, p.evidence_span->second};
  } else {
    j["evidence_span"] = nullptr;
  }
  return j;
}

}  // namespace

std::string_view ReasonName(FailureReason reason) {
  for (const auto& [r, name] : kReasonNames) {
    if (r == reason) return name;
  }
  return "unknown";
}

FailureReason ParseReason(std::string_view name) {
  for (const auto& [r, n] : kReasonNames) {
    if (n == name) return r;
  }
  ThrowData("unknown failure reason '" + std::string(name) + "'");
}

Parsed<Payload> ParseJsonPayload(std::string_view raw_text) {
  using P = Parsed<Payload>;
  const std::string_view body = TrimView(StripFence(TrimView(raw_text)));

  std::set<std::string> seen;
  bool duplicate = false;
  ordered_json::parser_callback_t on_event = [&](int depth, ordered_json::parse_event_t event,
                                                 ordered_json& parsed) {
    if (event == ordered_json::parse_event_t::key && depth == 1) {
      if (!seen.insert(parsed.get<std::string>()).second) duplicate = true;
    }
    return true;
  };
  ordered_json doc;
  try {
    doc = ordered_json::parse(body.begin(), body.end(), on_event);
  } catch (const ordered_json::exception&) {
    return P::Fail(FailureReason::kNotJson, "output is not valid JSON");
  }
  if (!doc.is_object()) return P::Fail(FailureReason::kNotObject, "top-level value is not an object");
  if (duplicate) return P::Fail(FailureReason::kDuplicateKey, "repeated key");
  for (const auto& [key, _] : doc.items()) {
    if (std::find(kPayloadKeys.begin(), kPayloadKeys.end(), key) == kPayloadKeys.end()) {
      return P::Fail(FailureReason::kExtraKey, "unexpected key '" + key + "'");
    }
  }
  for (auto key : kPayloadKeys) {
    if (!doc.contains(std::string(key))) {
      return P::Fail(FailureReason::kMissingKey, "missing key '" + std::string(key) + "'");
    }
  }

  Payload payload;
  const auto& choice = doc["choice"];
  if (!choice.is_null()) {
    if (!choice.is_string()) return P::Fail(FailureReason::kBadChoice, "choice must be a string or null");
    auto label = ParseLabel(choice.get<std::string>());
    if (!label) return P::Fail(FailureReason::kBadChoice, "choice must be one of A-E");
    payload.choice = label;
  }

  const auto& conf = doc["confidence"];
  if (!conf.is_null()) {
    if (!conf.is_number()) return P::Fail(FailureReason::kBadConfidence, "confidence must be a number");
    const double c = conf.get<double>();
    if (!(c >= 0.0 && c <= 1.0)) {
      return P::Fail(FailureReason::kConfidenceOutOfRange, "confidence outside [0,1]");
    }
    payload.confidence = c;
  }

  const auto& abstain = doc["abstain"];
  if (!abstain.is_boolean()) return P::Fail(FailureReason::kBadAbstain, "abstain must be a boolean");
  payload.abstain = abstain.get<bool>();

  const auto& span = doc["evidence_span"];
  if (!span.is_null()) {
    if (!span.is_array() || span.size() != 2 || !span[0].is_number_integer() ||
        !span[1].is_number_integer()) {
      return P::Fail(FailureReason::kBadEvidenceSpan, "evidence_span must be [start, end] or null");
    }
    const auto start = span[0].get<long long>();
    const auto end = span[1].get<long long>();
    if (start < 0 || end < start) {
      return P::Fail(FailureReason::kBadEvidenceSpan, "evidence_span needs 0 <= start <= end");
    }
    payload.evidence_span = std::make_pair(start, end);
  }
  return P{payload, FailureReason::kNone, {}};
}

std::string SerializePayload(const Payload& payload) { return PayloadJson(payload).dump(); }

Parsed<Label> ParseLetter(std::string_view raw_text) {
  using P = Parsed<Label>;
  std::string_view s = TrimView(raw_text);
  if (s.size() == 2 && std::ispunct(static_cast<unsigned char>(s[1]))) s.remove_suffix(1);
  if (s.size() == 1) {
    const char c = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    if (c >= 'A' && c <= 'E') return P{static_cast<Label>(c - 'A'), FailureReason::kNone, {}};
  }
  return P::Fail(FailureReason::kNotSingleLetter, "expected a single letter A-E");
}

OptionLogprobs ExtractOptionLogprobs(const std::vector<Candidate>& candidates) {
  OptionLogprobs out;
  out.values.fill(kMissingLogprob);
  out.present.fill(false);
  for (const auto& c : candidates) {
    auto label = ParseLabel(c.token);
    if (!label || out.present[LabelIndex(*label)]) continue;
    if (!std::isfinite(c.logprob) || c.logprob > 0.0) {
      ThrowData("candidate '" + c.token + "' has invalid logprob " + FormatDouble(c.logprob));
    }
    out.values[LabelIndex(*label)] = c.logprob;
    out.present[LabelIndex(*label)] = true;
  }
  return out;
}

OptionDistribution Renormalize(const std::array<double, kNumLabels>& logprobs) {
  const double max_l = *std::max_element(logprobs.begin(), logprobs.end());
  std::array<double, kNumLabels> shifted{};
  double total = 0.0;
  for (std::size_t i = 0; i < kNumLabels; ++i) {
    shifted[i] = logprobs[i] - max_l;
    total += std::exp(shifted[i]);
  }
  const double log_total = std::log(total);

  OptionDistribution d;
  double entropy = 0.0;
  for (std::size_t i = 0; i < kNumLabels; ++i) {
    const double log_p = shifted[i] - log_total;
    d.p[i] = std::exp(log_p);
    if (d.p[i] > 0.0) entropy -= d.p[i] * log_p;
  }
  auto sorted = d.p;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  d.p_max = sorted[0];
  d.margin = sorted[0] - sorted[1];
  d.entropy_norm = std::clamp(entropy / std::log(static_cast<double>(kNumLabels)), 0.0, 1.0);
  return d;
}

std::string SerializeRecord(const Record& r) {
  ordered_json j = ordered_json::object();
  j["question_id"] = r.question_id;
  j["condition"] = r.condition;
  j["mode"] = ModeName(r.mode);
  j["parse_ok"] = r.parse_ok;
  j["retry_used"] = r.retry_used;
  j["payload"] = r.payload ? PayloadJson(*r.payload) : ordered_json(nullptr);
  if (r.failure != FailureReason::kNone) {
    j["failure"] = {{"reason", ReasonName(r.failure)}, {"detail", r.failure_detail}};
  } else {
    j["failure"] = nullptr;
  }
  if (r.option_logprobs) {
    ordered_json present = ordered_json::object();
    for (Label l : kAllLabels) present[LabelString(l)] = r.option_logprobs->present[LabelIndex(l)];
    j["option_logprobs"] = {{"values", LabelMapJson(r.option_logprobs->values)},
                            {"present", present}};
  } else {
    j["option_logprobs"] = nullptr;
  }
  if (r.option_distribution) {
    const auto& d = *r.option_distribution;
    j["option_distribution"] = {{"p", LabelMapJson(d.p)},
                                {"p_max", d.p_max},
                                {"margin", d.margin},
                                {"entropy_norm", d.entropy_norm}};
  } else {
    j["option_distribution"] = nullptr;
  }
  j["raw_text"] = r.raw_text;
  j["first_raw_text"] = r.first_raw_text ? ordered_json(*r.first_raw_text) : ordered_json(nullptr);
  j["latency_ms"] = r.latency_ms;
  j["timestamp"] = r.timestamp;
  j["model_id"] = r.model_id;
  return j.dump();
}

Record ParseRecord(std::string_view line) {
  Record r;
  try {
    const auto j = ordered_json::parse(line);
    r.question_id = j.at("question_id").get<std::string>();
    r.condition = j.at("condition").get<std::string>();
    r.mode = ParseMode(j.at("mode").get<std::string>());
    r.parse_ok = j.at("parse_ok").get<bool>();
    r.retry_used = j.at("retry_used").get<bool>();
    const auto& payload = j.at("payload");
    if (!payload.is_null()) {
      Payload p;
      const auto& choice = payload.at("choice");
      if (!choice.is_null()) {
        p.choice = ParseLabel(choice.get<std::string>());
        if (!p.choice) ThrowData("record payload choice is not A-E");
      }
      const auto& conf = payload.at("confidence");
      if (!conf.is_null()) p.confidence = conf.get<double>();
      p.abstain = payload.at("abstain").get<bool>();
      const auto& span = payload.at("evidence_span");
      if (!span.is_null()) p.evidence_span = {span.at(0).get<long long>(), span.at(1).get<long long>()};
      r.payload = p;
    }
    const auto& failure = j.at("failure");
    if (!failure.is_null()) {
      r.failure = ParseReason(failure.at("reason").get<std::string>());
      r.failure_detail = failure.at("detail").get<std::string>();
    }
    const auto& lp = j.at("option_logprobs");
    if (!lp.is_null()) {
      OptionLogprobs o;
      o.values = LabelMapFromJson(lp.at("values"));
      for (Label l : kAllLabels) o.present[LabelIndex(l)] = lp.at("present").at(LabelString(l)).get<bool>();
      r.option_logprobs = o;
    }
    const auto& od = j.at("option_distribution");
    if (!od.is_null()) {
      OptionDistribution d;
      d.p = LabelMapFromJson(od.at("p"));
      d.p_max = od.at("p_max").get<double>();
      d.margin = od.at("margin").get<double>();
      d.entropy_norm = od.at("entropy_norm").get<double>();
      r.option_distribution = d;
    }
    r.raw_text = j.at("raw_text").get<std::string>();
    if (j.contains("first_raw_text") && !j["first_raw_text"].is_null()) {
      r.first_raw_text = j["first_raw_text"].get<std::string>();
    }
    r.latency_ms = j.at("latency_ms").get<double>();
    r.timestamp = j.at("timestamp").get<std::string>();
    r.model_id = j.at("model_id").get<std::string>();
  } catch (const ordered_json::exception& e) {
    ThrowData(std::string("malformed prediction record: ") + e.what());
  }
  if (!r.parse_ok && r.payload) ThrowData("record " + r.question_id + ": failed parse with payload");
  if (r.parse_ok && !r.payload) ThrowData("record " + r.question_id + ": parse_ok without payload");
  return r;
}

std::vector<Record> LoadLog(const std::filesystem::path& path) {
  const std::string text = ReadFile(path);
  std::vector<Record> out;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    const bool terminated = nl != std::string::npos;
    if (!terminated) nl = text.size();
    ++line_no;
    const std::string_view line(text.data() + pos, nl - pos);
    pos = nl + 1;
    if (TrimView(line).empty()) continue;
    try {
      out.push_back(ParseRecord(line));
    } catch (const Error& e) {
      if (!terminated) break;  // interrupted tail write
      ThrowData(path.string() + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::string SerializeRequest(const Request& r) {
  ordered_json options = ordered_json::object();
  for (Label l : kAllLabels) options[LabelString(l)] = r.options[LabelIndex(l)];
  ordered_json frames = ordered_json::array();
  for (const auto& f : r.frames) frames.push_back({{"path", f.path}, {"timestamp", f.timestamp}});
  ordered_json gen = {{"temperature", r.config.temperature}, {"max_tokens", r.config.max_tokens}};
  if (r.config.mode == Mode::kLetter) gen["logprob_top_k"] = r.config.logprob_top_k;
  ordered_json j = {
      {"id", r.id},
      {"mode", ModeName(r.config.mode)},
      {"prompt_version", r.config.prompt_version},
      {"question", r.question},
      {"options", options},
      {"frames", frames},
      {"generation", gen},
  };
  return j.dump();
}

Request ParseRequest(std::string_view line) {
  Request r;
  try {
    const auto j = ordered_json::parse(line);
    r.id = j.at("id").get<std::string>();
    r.config.mode = ParseMode(j.at("mode").get<std::string>());
    r.config.prompt_version = j.at("prompt_version").get<std::string>();
    r.question = j.at("question").get<std::string>();
    for (Label l : kAllLabels) r.options[LabelIndex(l)] = j.at("options").at(LabelString(l)).get<std::string>();
    for (const auto& f : j.at("frames")) {
      r.frames.push_back({f.at("path").get<std::string>(), f.at("timestamp").get<double>()});
    }
    const auto& gen = j.at("generation");
    r.config.temperature = gen.at("temperature").get<double>();
    r.config.max_tokens = gen.at("max_tokens").get<int>();
    if (gen.contains("logprob_top_k")) r.config.logprob_top_k = gen["logprob_top_k"].get<int>();
  } catch (const ordered_json::exception& e) {
    ThrowData(std::string("malformed adapter request: ") + e.what());
  }
  return r;
}

std::string SerializeResponse(const Response& r) {
  ordered_json j = {{"id", r.id}, {"ok", r.ok}, {"raw_text", r.raw_text}};
  if (r.candidates) {
    ordered_json cands = ordered_json::array();
    for (const auto& c : *r.candidates) cands.push_back({{"token", c.token}, {"logprob", c.logprob}});
    j["candidates"] = cands;
  }
  j["latency_ms"] = r.latency_ms;
  j["model_id"] = r.model_id;
  if (!r.error.empty()) j["error"] = r.error;
  return j.dump();
}

Response ParseResponse(std::string_view line) {
  Response r;
  try {
    const auto j = ordered_json::parse(line);
    r.id = j.at("id").get<std::string>();
    r.ok = j.at("ok").get<bool>();
    r.raw_text = j.value("raw_text", "");
    if (j.contains("candidates") && !j["candidates"].is_null()) {
      std::vector<Candidate> cands;
      for (const auto& c : j["candidates"]) {
        cands.push_back({c.at("token").get<std::string>(), c.at("logprob").get<double>()});
      }
      r.candidates = std::move(cands);
    }
    r.latency_ms = j.value("latency_ms", 0.0);
    r.model_id = j.value("model_id", "");
    if (j.contains("error") && j["error"].is_string()) r.error = j["error"].get<std::string>();
  } catch (const ordered_json::exception& e) {
    ThrowData(std::string("malformed adapter response: ") + e.what());
  }
  return r;
}

ProcessAdapter::ProcessAdapter(const std::string& command_line, std::chrono::milliseconds timeout)
    : process_(command_line), timeout_(timeout) {}

std::optional<Response> ProcessAdapter::Call(const Request& request) {
  if (!healthy_) return std::nullopt;
  if (!process_.WriteLine(SerializeRequest(request))) {
    healthy_ = false;
    return std::nullopt;
  }
  auto line = process_.ReadLine(timeout_);
  if (!line) {
    healthy_ = false;
    return std::nullopt;
  }
  try {
    Response response = ParseResponse(*line);
    if (response.id != request.id) {
      healthy_ = false;
      return std::nullopt;
    }
    return response;
  } catch (const Error&) {
    healthy_ = false;
    return std::nullopt;
  }
}

Request BuildRequest(const corpus::Item& item, const std::vector<FrameRef>& frames,
                     const GenerationConfig& config) {
  Request r;
  r.id = item.question_id;
  r.config = config;
  r.question = item.question;
  r.options = item.options;
  r.frames = frames;
  return r;
}

Interpretation Interpret(const Response& response, Mode mode) {
  Interpretation out;
  if (mode == Mode::kJson) {
    auto parsed = ParseJsonPayload(response.raw_text);
    if (!parsed.ok()) {
      out.reason = parsed.reason;
      out.detail = parsed.detail;
      return out;
    }
    out.payload = parsed.value;
    return out;
  }
  auto letter = ParseLetter(response.raw_text);
  if (!letter.ok()) {
    out.reason = letter.reason;
    out.detail = letter.detail;
    return out;
  }
  try {
    out.logprobs = ExtractOptionLogprobs(response.candidates.value_or(std::vector<Candidate>{}));
  } catch (const Error& e) {
    out.reason = FailureReason::kBadLogprobs;
    out.detail = e.what();
    return out;
  }
  out.distribution = Renormalize(out.logprobs->values);
  out.payload = Payload{letter.value, std::nullopt, false, std::nullopt};
  return out;
}

Record RunItem(Adapter& adapter, const corpus::Item& item, const std::vector<FrameRef>& frames,
               const GenerationConfig& config, const std::string& condition) {
  const auto started = std::chrono::steady_clock::now();
  Record record;
  record.question_id = item.question_id;
  record.condition = condition;
  record.mode = config.mode;
  record.timestamp = UtcTimestamp();

  const Request request = BuildRequest(item, frames, config);
  const auto finish = [&] {
    record.latency_ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - started).count();
    return record;
  };

  for (int attempt = 0; attempt < 2; ++attempt) {
    auto response = adapter.Call(request);
    if (attempt == 1) {
      record.retry_used = true;
      record.first_raw_text = record.raw_text;
    }
    if (!response || !response->ok) {
      record.parse_ok = false;
      record.payload.reset();
      record.failure = FailureReason::kAdapterError;
      record.failure_detail = response ? response->error : "adapter transport failure";
      if (response) {
        record.raw_text = response->raw_text;
        record.model_id = response->model_id;
      }
      return finish();
    }
    record.raw_text = response->raw_text;
    record.model_id = response->model_id;

    auto interp = Interpret(*response, config.mode);
    if (interp.reason == FailureReason::kNone) {
      record.parse_ok = true;
      record.payload = interp.payload;
      record.failure = FailureReason::kNone;
      record.failure_detail.clear();
      record.option_logprobs = interp.logprobs;
      record.option_distribution = interp.distribution;
      return finish();
    }
    record.parse_ok = false;
    record.failure = interp.reason;
    record.failure_detail = interp.detail;
  }
  return finish();
}

}  // namespace selgate::gateway
