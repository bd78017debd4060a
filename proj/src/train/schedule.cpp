#include "wcam/train/schedule.hpp"

#include <cmath>
#include <numbers>

#include "wcam/util/error.hpp"

namespace wcam::train {

void ScheduleSpec::validate() const {
  if (kind == ScheduleKind::cosine_warm_restart && !(period_epochs >= 1.0))
    throw ConfigError("cosine period must be at least one epoch");
  if (kind == ScheduleKind::step_decay && !(step_epochs >= 1.0))
    throw ConfigError("step interval must be at least one epoch");
  if (kind == ScheduleKind::step_decay && !(decay_factor > 0.0 && decay_factor < 1.0))
    throw ConfigError("decay factor must be in (0, 1)");
  if (!(min_lr >= 0.0)) throw ConfigError("min_lr must be non-negative");
}

double lr_at(const ScheduleSpec& s, double epoch, double base_lr) {
  if (!(epoch >= 0.0)) throw ArgumentError("epoch must be non-negative");
  if (s.kind == ScheduleKind::cosine_warm_restart) {
    const double t = std::fmod(epoch, s.period_epochs);
    return s.min_lr + (base_lr - s.min_lr) * (1.0 + std::cos(std::numbers::pi * t / s.period_epochs)) / 2.0;
  }
  // Divide by the inverse factor so a 0.1 decay gives exactly base_lr / 10.
  return base_lr / std::pow(1.0 / s.decay_factor, std::floor(epoch / s.step_epochs));
}

std::string to_string(ScheduleKind k) {
  return k == ScheduleKind::cosine_warm_restart ? "cosine-warm-restart" : "step-decay";
}

ScheduleKind parse_schedule_kind(const std::string& name) {
  if (name == "cosine-warm-restart" || name == "cosine") return ScheduleKind::cosine_warm_restart;
  if (name == "step-decay" || name == "step") return ScheduleKind::step_decay;
  throw ConfigError("unknown schedule '" + name + "'");
}

void to_json(nlohmann::json& j, const ScheduleSpec& s) {
  j = {{"kind", to_string(s.kind)},
       {"period_epochs", s.period_epochs},
       {"step_epochs", s.step_epochs},
       {"decay_factor", s.decay_factor},
       {"min_lr", s.min_lr}};
}

void from_json(const nlohmann::json& j, ScheduleSpec& s) {
  s = ScheduleSpec{};
  if (j.contains("kind")) s.kind = parse_schedule_kind(j.at("kind").get<std::string>());
  s.period_epochs = j.value("period_epochs", s.period_epochs);
  s.step_epochs = j.value("step_epochs", s.step_epochs);
  s.decay_factor = j.value("decay_factor", s.decay_factor);
  s.min_lr = j.value("min_lr", s.min_lr);
}

}  // namespace wcam::train
