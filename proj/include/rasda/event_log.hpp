// Copyright (c) 2026 The rasda Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace rasda {

using Json = nlohmann::ordered_json;

enum class EventKind {
  RunStarted,
  TrialStarted,
  EpochCompleted,
  ResultReported,
  Decision,
  ResourcesChanged,
  TrialTerminated,
  TrialCompleted,
  GrantQueued,
  GrantFilled,
};

inline const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::RunStarted: return "RunStarted";
    case EventKind::TrialStarted: return "TrialStarted";
    case EventKind::EpochCompleted: return "EpochCompleted";
    case EventKind::ResultReported: return "ResultReported";
    case EventKind::Decision: return "Decision";
    case EventKind::ResourcesChanged: return "ResourcesChanged";
    case EventKind::TrialTerminated: return "TrialTerminated";
    case EventKind::TrialCompleted: return "TrialCompleted";
    case EventKind::GrantQueued: return "GrantQueued";
    case EventKind::GrantFilled: return "GrantFilled";
  }
  return "?";
}

inline std::optional<EventKind> event_kind_from(const std::string& s) {
  static const std::pair<const char*, EventKind> table[] = {
      {"RunStarted", EventKind::RunStarted},
      {"TrialStarted", EventKind::TrialStarted},
      {"EpochCompleted", EventKind::EpochCompleted},
      {"ResultReported", EventKind::ResultReported},
      {"Decision", EventKind::Decision},
      {"ResourcesChanged", EventKind::ResourcesChanged},
      {"TrialTerminated", EventKind::TrialTerminated},
      {"TrialCompleted", EventKind::TrialCompleted},
      {"GrantQueued", EventKind::GrantQueued},
      {"GrantFilled", EventKind::GrantFilled},
  };
  for (auto& [name, kind] : table)
    if (s == name) return kind;
  return std::nullopt;
}

struct SimEvent {
  double t = 0;
  EventKind kind = EventKind::RunStarted;
  std::optional<int> trial;  // absent for run-level events
  Json data = Json::object();
};

// Time-ordered record of everything a run did. Serialized as JSONL, one
// object per line with fields t, kind, trial, data; identical runs produce
// byte-identical files.
class SimEventLog {
 public:
  void append(double t, EventKind kind, std::optional<int> trial, Json data) {
    if (!events_.empty() && t < events_.back().t)
      throw std::logic_error("event log time went backwards");
    events_.push_back({t, kind, trial, std::move(data)});
  }

  const std::vector<SimEvent>& events() const { return events_; }
  bool empty() const { return events_.empty(); }
  size_t size() const { return events_.size(); }
  double makespan() const { return events_.empty() ? 0.0 : events_.back().t; }

  void write_jsonl(std::ostream& os) const {
    for (const SimEvent& e : events_) {
      Json line;
      line["t"] = e.t;
      line["kind"] = to_string(e.kind);
      if (e.trial)
        line["trial"] = *e.trial;
      else
        line["trial"] = nullptr;
      line["data"] = e.data;
      os << line.dump() << '\n';
    }
  }

  // Throws std::runtime_error on malformed lines; unknown kinds are
  // reported with their line number.
  static SimEventLog read_jsonl(std::istream& is) {
    SimEventLog log;
    std::string line;
    size_t lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      if (line.empty()) continue;
      Json j;
      try {
        j = Json::parse(line);
      } catch (const std::exception& e) {
        throw std::runtime_error("line " + std::to_string(lineno) + ": " + e.what());
      }
      if (!j.contains("t") || !j.contains("kind") || !j.contains("trial") ||
          !j.contains("data"))
        throw std::runtime_error("line " + std::to_string(lineno) +
                                 ": missing t/kind/trial/data");
      auto kind = event_kind_from(j["kind"].get<std::string>());
      if (!kind)
        throw std::runtime_error("line " + std::to_string(lineno) + ": unknown kind '" +
                                 j["kind"].get<std::string>() + "'");
      SimEvent e;
      e.t = j["t"].get<double>();
      e.kind = *kind;
      if (!j["trial"].is_null()) e.trial = j["trial"].get<int>();
      e.data = j["data"];
      log.events_.push_back(std::move(e));
    }
    return log;
  }

 private:
  std::vector<SimEvent> events_;
};

}  // namespace rasda
