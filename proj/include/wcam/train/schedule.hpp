#pragma once

#include <string>

#include <nlohmann/json.hpp>

namespace wcam::train {

enum class ScheduleKind { cosine_warm_restart, step_decay };

struct ScheduleSpec {
  ScheduleKind kind = ScheduleKind::cosine_warm_restart;
  double period_epochs = 5;  // cosine restart period
  double step_epochs = 10;   // step decay interval
  double decay_factor = 0.1;
  double min_lr = 0.0;

  static ScheduleSpec cosine(double period = 5, double min_lr = 0.0) {
    return {ScheduleKind::cosine_warm_restart, period, 10, 0.1, min_lr};
  }
  static ScheduleSpec step(double every = 10, double factor = 0.1) {
    return {ScheduleKind::step_decay, 5, every, factor, 0.0};
  }

  // Cosine schedules advance every iteration, step schedules once per epoch.
  bool per_iteration() const { return kind == ScheduleKind::cosine_warm_restart; }
  void validate() const;
};

// `epoch` may be fractional for per-iteration schedules.
double lr_at(const ScheduleSpec& schedule, double epoch, double base_lr);

std::string to_string(ScheduleKind k);
ScheduleKind parse_schedule_kind(const std::string& name);
void to_json(nlohmann::json& j, const ScheduleSpec& s);
void from_json(const nlohmann::json& j, ScheduleSpec& s);

}  // namespace wcam::train
