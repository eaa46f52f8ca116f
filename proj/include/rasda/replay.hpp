// Copyright (c) 2026 The rasda Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <istream>
#include <map>
#include <optional>
#include <string>

#include "rasda/cluster_sim.hpp"
#include "rasda/event_log.hpp"
#include "rasda/scheduler.hpp"

namespace rasda {

struct ReplayViolation {
  std::string name;    // invariant identifier, e.g. "resource-arithmetic"
  size_t event_index;  // 1-based position in the log, 0 for file-level issues
  std::string detail;
};

// Re-derives every invariant a finished run must satisfy from the log alone:
// nondecreasing time, per-trial causality, epoch sequencing, worker
// bookkeeping against the recorded free counts, and scheduler decisions
// recomputed from the recorded metrics by a fresh Scheduler instance
// (including the resource arithmetic attached to promotions). Returns the
// first violation, or nothing if the log is valid. An empty log is valid.
inline std::optional<ReplayViolation> validate_events(const SimEventLog& log) {
  if (log.empty()) return std::nullopt;

  auto fail = [](std::string name, size_t idx, std::string detail) {
    return ReplayViolation{std::move(name), idx, std::move(detail)};
  };

  const auto& events = log.events();
  if (events.front().kind != EventKind::RunStarted)
    return fail("missing-run-header", 1, "first event must be RunStarted");

  // Header.
  const Json& h = events.front().data;
  Policy policy;
  MetricMode mode;
  int total_workers, base_resources, num_trials, bs_local;
  RungLadder ladder;
  try {
    std::string p = h.at("policy").get<std::string>();
    if (p != "asha" && p != "rasda") return fail("missing-run-header", 1, "bad policy");
    policy = p == "asha" ? Policy::Asha : Policy::Rasda;
    std::string m = h.at("metric_mode").get<std::string>();
    mode = m == "min" ? MetricMode::Minimize : MetricMode::Maximize;
    total_workers = h.at("total_workers").get<int>();
    base_resources = h.at("base_resources").get<int>();
    num_trials = h.at("num_trials").get<int>();
    bs_local = h.at("bs_local").get<int>();
    ladder = compute_ladder(h.at("min_t").get<int>(), h.at("max_t").get<int>(),
                            h.at("sf").get<int>(), h.at("rf").get<int>());
    if (h.at("milestones").get<std::vector<int>>() != ladder.milestones)
      return fail("header-ladder", 1, "milestones do not match min_t/max_t/sf");
  } catch (const std::exception& e) {
    return fail("missing-run-header", 1, e.what());
  }

  Scheduler replica({policy, ladder, base_resources, mode});

  struct TrialView {
    bool started = false;
    bool finished = false;
    bool waiting = false;
    int workers = 0;
    int epochs = 0;
    std::optional<int> grant_pending;            // filled grant not yet consumed
    std::optional<std::pair<int, int>> change;   // (prev workers, expected new)
    std::optional<TrialResult> pending_result;
    std::optional<bool> stop_completed;
    bool diverged = false;
  };
  std::map<int, TrialView> views;
  int free = total_workers;
  double prev_t = events.front().t;

  for (size_t i = 1; i < events.size(); ++i) {
    const SimEvent& e = events[i];
    size_t idx = i + 1;
    if (e.t < prev_t) return fail("nondecreasing-time", idx, "time went backwards");
    prev_t = e.t;
    if (e.kind == EventKind::RunStarted)
      return fail("duplicate-header", idx, "second RunStarted");
    if (!e.trial) return fail("trial-state", idx, "trial-level event without trial id");
    int tid = *e.trial;
    if (tid < 0 || tid >= num_trials)
      return fail("unknown-trial", idx, "trial id " + std::to_string(tid));
    TrialView& tv = views[tid];

    try {
      switch (e.kind) {
        case EventKind::GrantQueued:
          break;
        case EventKind::GrantFilled: {
          int w = e.data.at("workers").get<int>();
          if (tv.grant_pending)
            return fail("grant-accounting", idx, "grant filled twice");
          free -= w;
          if (free < 0) return fail("conservation", idx, "free workers negative");
          if (e.data.at("free_after").get<int>() != free ||
              e.data.at("total").get<int>() != total_workers)
            return fail("grant-accounting", idx, "recorded free/total disagree");
          tv.grant_pending = w;
          break;
        }
        case EventKind::TrialStarted: {
          if (tv.started) return fail("trial-state", idx, "trial started twice");
          int w = e.data.at("workers").get<int>();
          if (!tv.grant_pending || *tv.grant_pending != w)
            return fail("grant-accounting", idx, "start without matching grant");
          tv.grant_pending.reset();
          tv.started = true;
          tv.workers = w;
          replica.register_trial(tid);
          break;
        }
        case EventKind::EpochCompleted: {
          if (!tv.started || tv.finished || tv.waiting)
            return fail("trial-state", idx, "epoch outside Running state");
          int epoch = e.data.at("epoch").get<int>();
          if (epoch != tv.epochs + 1)
            return fail("epoch-sequence", idx, "epochs must advance by one");
          tv.epochs = epoch;
          break;
        }
        case EventKind::ResultReported: {
          if (!tv.started || tv.finished)
            return fail("trial-state", idx, "result outside lifetime");
          int iter = e.data.at("training_iteration").get<int>();
          if (iter != tv.epochs)
            return fail("result-iteration", idx, "iteration does not match epochs");
          int bs = e.data.at("global_batch_size").get<int>();
          if (bs != bs_local * tv.workers)
            return fail("result-batch-size", idx, "global batch size != bs_local * workers");
          tv.pending_result = TrialResult{tid, iter, e.data.at("metric").get<double>(),
                                          e.t, bs};
          break;
        }
        case EventKind::Decision: {
          if (!tv.pending_result)
            return fail("decision-without-result", idx, "no result to decide on");
          TrialResult res = *tv.pending_result;
          tv.pending_result.reset();
          std::string verdict = e.data.at("verdict").get<std::string>();
          if (e.data.contains("reason") && e.data["reason"] == "diverged") {
            if (verdict != "stop")
              return fail("decision-mismatch", idx, "diverged trial must stop");
            replica.force_stop(tid);
            tv.diverged = true;
            tv.stop_completed = false;
            break;
          }
          SchedulerDecision expected = replica.on_result(res);
          if (verdict != to_string(expected.kind))
            return fail("decision-mismatch", idx,
                        "expected verdict " + std::string(to_string(expected.kind)));
          if (expected.kind == SchedulerDecision::Kind::Stop) {
            if (e.data.at("completed").get<bool>() != expected.completed)
              return fail("completion-flag", idx, "completed flag disagrees");
            tv.stop_completed = expected.completed;
          } else if (expected.kind == SchedulerDecision::Kind::ContinueWithResources) {
            if (e.data.at("workers").get<int>() != expected.workers)
              return fail("resource-arithmetic", idx,
                          "promotion workers must be base * sf^(rung+1) = " +
                              std::to_string(expected.workers));
            int want = std::min(expected.workers, total_workers);
            if (want != tv.workers) {
              tv.change = {tv.workers, want};
              free += tv.workers;
              tv.waiting = true;
              tv.workers = 0;
            }
          }
          break;
        }
        case EventKind::ResourcesChanged: {
          if (!tv.waiting || !tv.change)
            return fail("resources-without-decision", idx,
                        "resource change without a granting decision");
          if (e.data.at("from").get<int>() != tv.change->first)
            return fail("resource-change-mismatch", idx, "previous workers disagree");
          if (e.data.at("to").get<int>() != tv.change->second)
            return fail("resource-arithmetic", idx,
                        "granted workers must be min(total, base * sf^(rung+1)) = " +
                            std::to_string(tv.change->second));
          if (!tv.grant_pending || *tv.grant_pending != tv.change->second)
            return fail("grant-accounting", idx, "resource change without matching grant");
          tv.grant_pending.reset();
          tv.workers = tv.change->second;
          tv.change.reset();
          tv.waiting = false;
          break;
        }
        case EventKind::TrialTerminated:
        case EventKind::TrialCompleted: {
          bool completed = e.kind == EventKind::TrialCompleted;
          if (!tv.started || tv.finished || tv.waiting)
            return fail("trial-state", idx, "finish outside Running state");
          if (!tv.stop_completed.has_value() || *tv.stop_completed != completed)
            return fail("completion-flag", idx, "finish kind disagrees with decision");
          int released = e.data.at("released").get<int>();
          if (released != tv.workers)
            return fail("conservation", idx, "released workers != allocation");
          free += released;
          if (free > total_workers) return fail("conservation", idx, "free exceeds total");
          if (e.data.at("free_after").get<int>() != free ||
              e.data.at("total").get<int>() != total_workers)
            return fail("grant-accounting", idx, "recorded free/total disagree");
          tv.finished = true;
          tv.workers = 0;
          break;
        }
        case EventKind::RunStarted:
          break;  // rejected before the switch
      }
    } catch (const std::exception& ex) {
      return fail("malformed-event", idx, ex.what());
    }
  }
  return std::nullopt;
}

// Parses JSONL and validates; parse failures are reported as violations.
inline std::optional<ReplayViolation> validate_event_log(std::istream& is) {
  SimEventLog log;
  try {
    log = SimEventLog::read_jsonl(is);
  } catch (const std::exception& e) {
    return ReplayViolation{"malformed-line", 0, e.what()};
  }
  return validate_events(log);
}

}  // namespace rasda
