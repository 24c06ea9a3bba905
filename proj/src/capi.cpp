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

#include "selgate/selgate.h"

#include <algorithm>
#include <array>
#include <cstring>
#include <iostream>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "commands.hpp"
#include "common.hpp"
#include "corpus.hpp"
#include "evidence.hpp"
#include "gateway.hpp"
#include "metrics.hpp"
#include "oracle.hpp"
#include "shift.hpp"

struct sg_items {
  std::vector<selgate::corpus::Item> items;
  selgate::corpus::AnswerKey key;
};

struct sg_log {
  std::vector<selgate::gateway::Record> records;
};

namespace {

thread_local std::string g_last_error;

sg_status Fail(sg_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

template <typename F>
sg_status Guard(F&& body) {
  g_last_error.clear();
  try {
    body();
    return SG_OK;
  } catch (const selgate::Error& e) {
    switch (e.kind()) {
      case selgate::ErrorKind::kUsage: return Fail(SG_ERR_USAGE, e.what());
      case selgate::ErrorKind::kData: return Fail(SG_ERR_DATA, e.what());
      case selgate::ErrorKind::kAdapter: return Fail(SG_ERR_ADAPTER, e.what());
      case selgate::ErrorKind::kIo: return Fail(SG_ERR_IO, e.what());
    }
    return Fail(SG_ERR_INTERNAL, e.what());
  } catch (const std::bad_alloc&) {
    return Fail(SG_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return Fail(SG_ERR_INTERNAL, e.what());
  }
}

std::string Str(const char* s, const char* fallback = "") { return s ? s : fallback; }

void Require(const void* p, const char* what) {
  if (!p) selgate::ThrowUsage(std::string(what) + " is NULL");
}

selgate::commands::GridOptions Grid(const sg_grid_options& g) {
  selgate::commands::GridOptions out;
  out.grid = Str(g.grid);
  out.min_n = g.min_n;
  out.signal = Str(g.signal, "auto");
  return out;
}

void InitGrid(sg_grid_options* g) {
  g->grid = nullptr;
  g->min_n = selgate::metrics::kDefaultMinN;
  g->signal = nullptr;
}

}  // namespace

extern "C" {

const char* sg_last_error(void) { return g_last_error.c_str(); }

const char* sg_version(void) { return "0.1.0"; }

sg_status sg_items_load(const char* path, sg_items** out) {
  return Guard([&] {
    Require(path, "path");
    Require(out, "out");
    *out = nullptr;
    auto h = std::make_unique<sg_items>();
    h->items = selgate::corpus::LoadItems(path);
    h->key = selgate::corpus::AnswerKey(h->items);
    *out = h.release();
  });
}

size_t sg_items_count(const sg_items* items) { return items ? items->items.size() : 0; }

void sg_items_free(sg_items* items) { delete items; }

sg_status sg_group_of(const char* code, const char** group) {
  return Guard([&] {
    Require(code, "code");
    Require(group, "group");
    *group = selgate::corpus::GroupName(selgate::corpus::GroupOf(std::string_view(code))).data();
  });
}

sg_status sg_freeze_stratified(const sg_items* items, size_t per_group, uint64_t seed, char* buf,
                               size_t cap, size_t* needed) {
  return Guard([&] {
    Require(items, "items");
    const auto text = selgate::corpus::SerializeFrozenList(
        selgate::corpus::FreezeStratified(items->items, per_group, seed));
    if (needed) *needed = text.size() + 1;
    if (!buf || cap < text.size() + 1) selgate::ThrowUsage("buffer too small");
    std::memcpy(buf, text.c_str(), text.size() + 1);
  });
}

sg_status sg_build_plan(const char* condition, double duration, double* timestamps, size_t cap,
                        size_t* count) {
  return Guard([&] {
    Require(condition, "condition");
    const auto plan = selgate::evidence::BuildPlan(
        "", duration, selgate::evidence::ConditionByName(condition));
    if (count) *count = plan.timestamps.size();
    if (plan.timestamps.size() > cap || (!timestamps && !plan.timestamps.empty())) {
      selgate::ThrowUsage("buffer too small");
    }
    std::copy(plan.timestamps.begin(), plan.timestamps.end(), timestamps);
  });
}

sg_status sg_renormalize(const double logprobs[5], sg_distribution* out) {
  return Guard([&] {
    Require(logprobs, "logprobs");
    Require(out, "out");
    std::array<double, selgate::kNumLabels> l{};
    std::copy(logprobs, logprobs + selgate::kNumLabels, l.begin());
    const auto d = selgate::gateway::Renormalize(l);
    std::copy(d.p.begin(), d.p.end(), out->p);
    out->p_max = d.p_max;
    out->margin = d.margin;
    out->entropy_norm = d.entropy_norm;
  });
}

sg_status sg_parse_json_payload(const char* text, sg_payload* out) {
  return Guard([&] {
    Require(text, "text");
    Require(out, "out");
    *out = sg_payload{};
    const auto parsed = selgate::gateway::ParseJsonPayload(text);
    out->ok = parsed.ok() ? 1 : 0;
    out->reason = selgate::gateway::ReasonName(parsed.reason).data();
    if (!parsed.ok()) return;
    const auto& p = *parsed.value;
    out->choice = p.choice ? selgate::LabelChar(*p.choice) : 0;
    out->has_confidence = p.confidence.has_value();
    out->confidence = p.confidence.value_or(0.0);
    out->abstain = p.abstain;
    out->has_span = p.evidence_span.has_value();
    if (p.evidence_span) {
      out->span_start = p.evidence_span->first;
      out->span_end = p.evidence_span->second;
    }
  });
}

sg_status sg_log_load(const char* path, sg_log** out) {
  return Guard([&] {
    Require(path, "path");
    Require(out, "out");
    *out = nullptr;
    auto h = std::make_unique<sg_log>();
    h->records = selgate::gateway::LoadLog(path);
    *out = h.release();
  });
}

size_t sg_log_count(const sg_log* log) { return log ? log->records.size() : 0; }

void sg_log_free(sg_log* log) { delete log; }

sg_status sg_sweep(const sg_log* log, const sg_items* items, const double* grid, size_t n_grid,
                   long min_n, sg_signal signal, sg_sweep_point* out, size_t cap, size_t* count) {
  return Guard([&] {
    Require(log, "log");
    Require(items, "items");
    const std::vector<double> g =
        grid ? std::vector<double>(grid, grid + n_grid) : selgate::metrics::DefaultGrid();
    selgate::metrics::SweepOptions opts;
    opts.min_n = min_n;
    switch (signal) {
      case SG_SIGNAL_AUTO: opts.signal = selgate::metrics::Signal::kAuto; break;
      case SG_SIGNAL_SELF: opts.signal = selgate::metrics::Signal::kSelf; break;
      case SG_SIGNAL_PMAX: opts.signal = selgate::metrics::Signal::kPmax; break;
      default: selgate::ThrowUsage("unknown signal");
    }
    const auto pts = selgate::metrics::Sweep(log->records, items->key, g, opts);
    if (count) *count = pts.size();
    if (!out || cap < pts.size()) selgate::ThrowUsage("buffer too small");
    for (std::size_t i = 0; i < pts.size(); ++i) {
      out[i] = sg_sweep_point{pts[i].epsilon, pts[i].risk, pts[i].coverage, pts[i].abstention,
                              pts[i].acc_cond, pts[i].ece, pts[i].n_accepted};
    }
  });
}

sg_status sg_threshold_transfer(const sg_sweep_point* source, size_t n_source,
                                const sg_sweep_point* target, size_t n_target,
                                sg_criterion criterion, double value, sg_transfer_result* out) {
  return Guard([&] {
    Require(source, "source");
    Require(target, "target");
    Require(out, "out");
    const auto conv = [](const sg_sweep_point* p, size_t n) {
      std::vector<selgate::metrics::SweepPoint> v(n);
      for (size_t i = 0; i < n; ++i) {
        v[i] = {p[i].epsilon, p[i].risk, p[i].coverage, p[i].abstention, p[i].acc_cond, p[i].ece, p[i].n_accepted};
      }
      return v;
    };
    if (criterion != SG_FIXED_RISK && criterion != SG_FIXED_COVERAGE) selgate::ThrowUsage("unknown criterion");
    const auto r = selgate::shift::ThresholdTransfer(
        conv(source, n_source), conv(target, n_target),
        criterion == SG_FIXED_RISK ? selgate::shift::Criterion::kFixedRisk
                                   : selgate::shift::Criterion::kFixedCoverage,
        value);
    out->epsilon_star = r.epsilon_star;
    out->source = {r.source.risk, r.source.coverage, r.source.n};
    out->target = {r.target.risk, r.target.coverage, r.target.n};
  });
}

void sg_freeze_options_init(sg_freeze_options* o) {
  *o = sg_freeze_options{};
  o->per_group = 100;
}

sg_status sg_cmd_freeze(const sg_freeze_options* o) {
  return Guard([&] {
    Require(o, "options");
    selgate::commands::FreezeOptions c;
    c.items = Str(o->items);
    c.per_group = o->per_group;
    c.seed = o->seed;
    c.out = Str(o->out);
    selgate::commands::Freeze(c);
  });
}

void sg_plan_options_init(sg_plan_options* o) { *o = sg_plan_options{}; }

sg_status sg_cmd_plan(const sg_plan_options* o) {
  return Guard([&] {
    Require(o, "options");
    selgate::commands::PlanOptions c;
    c.items = Str(o->items);
    c.ids = Str(o->ids);
    c.videos = Str(o->videos);
    c.condition = Str(o->condition);
    c.out_dir = Str(o->out_dir, ".");
    c.decoder = Str(o->decoder, "selgate-decode");
    selgate::commands::Plan(c);
  });
}

void sg_verify_options_init(sg_verify_options* o) { *o = sg_verify_options{}; }

sg_status sg_cmd_extract_verify(const sg_verify_options* o) {
  return Guard([&] {
    Require(o, "options");
    selgate::commands::VerifyOptions c;
    c.out_dir = Str(o->out_dir, ".");
    c.condition = Str(o->condition);
    selgate::commands::ExtractVerify(c);
  });
}

void sg_run_options_init(sg_run_options* o) {
  *o = sg_run_options{};
  o->parallel = 1;
  o->timeout_s = 300.0;
}

sg_status sg_cmd_run(const sg_run_options* o) {
  return Guard([&] {
    Require(o, "options");
    selgate::commands::RunOptions c;
    c.items = Str(o->items);
    c.ids = Str(o->ids);
    c.out_dir = Str(o->out_dir, ".");
    c.condition = Str(o->condition);
    c.mode = Str(o->mode, "json");
    c.adapter = Str(o->adapter);
    c.run_id = Str(o->run_id);
    c.prompt_version = Str(o->prompt_version, "v1");
    c.parallel = o->parallel;
    c.no_frames = o->no_frames != 0;
    c.timeout_s = o->timeout_s;
    selgate::commands::Run(c);
  });
}

void sg_sweep_options_init(sg_sweep_options* o) {
  *o = sg_sweep_options{};
  InitGrid(&o->grid);
  o->epsilon = 17.0 / 24.0;
}

sg_status sg_cmd_sweep(const sg_sweep_options* o) {
  return Guard([&] {
    Require(o, "options");
    selgate::commands::SweepOptions c;
    c.log = Str(o->log);
    c.items = Str(o->items);
    c.out_dir = Str(o->out_dir, ".");
    c.name = Str(o->name);
    c.grid = Grid(o->grid);
    c.epsilon = o->epsilon;
    selgate::commands::Sweep(c);
  });
}

void sg_compare_options_init(sg_compare_options* o) {
  *o = sg_compare_options{};
  InitGrid(&o->grid);
}

sg_status sg_cmd_compare(const sg_compare_options* o) {
  return Guard([&] {
    Require(o, "options");
    selgate::commands::CompareOptions c;
    c.a = Str(o->a);
    c.b = Str(o->b);
    c.items = Str(o->items);
    c.out_dir = Str(o->out_dir, ".");
    c.name = Str(o->name);
    c.grid = Grid(o->grid);
    selgate::commands::Compare(c);
  });
}

void sg_matched_options_init(sg_matched_options* o) {
  *o = sg_matched_options{};
  o->tau = 0.9;
}

sg_status sg_cmd_matched(const sg_matched_options* o) {
  return Guard([&] {
    Require(o, "options");
    selgate::commands::MatchedOptions c;
    c.a = Str(o->a);
    c.b = Str(o->b);
    c.items = Str(o->items);
    c.out_dir = Str(o->out_dir, ".");
    c.name = Str(o->name);
    c.signal = Str(o->signal, "auto");
    c.tau = o->tau;
    selgate::commands::Matched(c);
  });
}

void sg_transfer_options_init(sg_transfer_options* o) {
  *o = sg_transfer_options{};
  InitGrid(&o->grid);
  o->value = 0.10;
}

sg_status sg_cmd_transfer(const sg_transfer_options* o) {
  return Guard([&] {
    Require(o, "options");
    selgate::commands::TransferOptions c;
    c.source = Str(o->source);
    c.target = Str(o->target);
    c.items = Str(o->items);
    c.out_dir = Str(o->out_dir, ".");
    c.name = Str(o->name);
    c.grid = Grid(o->grid);
    c.criterion = Str(o->criterion, "risk");
    c.value = o->value;
    selgate::commands::Transfer(c);
  });
}

void sg_report_options_init(sg_report_options* o) {
  *o = sg_report_options{};
  InitGrid(&o->grid);
  o->epsilon = 17.0 / 24.0;
}

sg_status sg_cmd_report(const sg_report_options* o) {
  return Guard([&] {
    Require(o, "options");
    selgate::commands::ReportOptions c;
    for (size_t i = 0; i < o->n_logs; ++i) {
      Require(o->logs, "logs");
      c.logs.emplace_back(Str(o->logs[i]));
    }
    c.items = Str(o->items);
    c.out_dir = Str(o->out_dir, ".");
    c.name = Str(o->name, "report");
    c.grid = Grid(o->grid);
    c.epsilon = o->epsilon;
    selgate::commands::Report(c);
  });
}

void sg_oracle_options_init(sg_oracle_options* o) {
  *o = sg_oracle_options{};
  const selgate::oracle::Params d;
  for (int g = 0; g < 3; ++g) o->base_acc[g] = d.base_acc_by_group[g];
  o->letter_mass = d.letter_mass;
}

sg_status sg_oracle_serve(const sg_oracle_options* o) {
  int code = 0;
  const sg_status status = Guard([&] {
    Require(o, "options");
    selgate::oracle::Params p;
    for (int g = 0; g < 3; ++g) p.base_acc_by_group[g] = o->base_acc[g];
    p.degradation_penalty = o->degradation_penalty;
    p.spread = o->spread;
    p.law = selgate::oracle::ParseLaw(Str(o->law, "calibrated"));
    p.law_value = o->law_value;
    p.confidence_quantum = o->confidence_quantum;
    p.malformed_rate = o->malformed_rate;
    p.letter_mass = o->letter_mass;
    p.Validate();
    const std::string condition = Str(o->condition);
    selgate::evidence::ConditionByName(condition);
    if (!o->items) selgate::ThrowUsage("items is required");
    const selgate::corpus::AnswerKey key(selgate::corpus::LoadItems(o->items));
    std::ios::sync_with_stdio(false);
    code = selgate::oracle::Serve(std::cin, std::cout, key, condition, p, o->seed, o->crash_after);
  });
  if (status != SG_OK) return status;
  if (code != 0) return Fail(SG_ERR_ADAPTER, "oracle stopped after " + std::to_string(o->crash_after) + " responses");
  return SG_OK;
}

}  // extern "C"
