#include "wcam/ingest/client.hpp"

#include <algorithm>
#include <thread>

#include <httplib.h>

#include "wcam/util/error.hpp"

namespace wcam::ingest {

TimePoint SystemClock::now() {
  return std::chrono::time_point_cast<std::chrono::milliseconds>(std::chrono::system_clock::now());
}

bool SystemClock::sleep_until(TimePoint deadline, std::stop_token stop) {
  std::unique_lock lock(mutex_);
  cv_.wait_until(lock, stop, deadline, [] { return false; });
  return !stop.stop_requested();
}

TimePoint ManualClock::now() {
  std::lock_guard lock(mutex_);
  return now_;
}

bool ManualClock::sleep_until(TimePoint deadline, std::stop_token stop) {
  if (stop.stop_requested()) return false;
  std::lock_guard lock(mutex_);
  now_ = std::max(now_, deadline);
  return true;
}

void ManualClock::advance(std::chrono::milliseconds by) {
  std::lock_guard lock(mutex_);
  now_ += by;
}

RateLimiter::RateLimiter(int max_concurrent, std::chrono::milliseconds spacing, Clock& clock)
    : slots_(std::clamp(max_concurrent, 1, 64)), spacing_(spacing), clock_(clock) {}

RateLimiter::Permit RateLimiter::acquire(std::stop_token stop) {
  while (!slots_.try_acquire_for(std::chrono::milliseconds{50}))
    if (stop.stop_requested()) return Permit{};
  Permit permit(this);
  TimePoint start;
  {
    std::lock_guard lock(mutex_);
    start = std::max(clock_.now(), next_start_);
    next_start_ = start + spacing_;
  }
  if (!clock_.sleep_until(start, stop)) return Permit{};
  return permit;
}

bool is_retryable(int status) { return status == 0 || status == 429 || status >= 500; }

RoadDataClient::RoadDataClient(ClientConfig config, Clock& clock)
    : config_(std::move(config)),
      clock_(clock),
      limiter_(config_.max_concurrency, config_.min_spacing, clock) {
  const auto scheme = config_.base_url.find("://");
  if (scheme == std::string::npos) throw ConfigError("base_url needs a scheme: '" + config_.base_url + "'");
  const auto slash = config_.base_url.find('/', scheme + 3);
  host_ = config_.base_url.substr(0, slash);
  if (slash != std::string::npos) prefix_ = config_.base_url.substr(slash);
  while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
  if (!httplib::Client(host_).is_valid()) throw ConfigError("unsupported base_url '" + config_.base_url + "'");
}

FetchResult RoadDataClient::attempt(const std::string& path) {
  httplib::Client cli(host_);
  cli.set_connection_timeout(config_.timeout);
  cli.set_read_timeout(config_.timeout);
  cli.set_keep_alive(false);
  httplib::Headers headers;
  if (!config_.token.empty()) headers.emplace("Authorization", "Bearer " + config_.token);

  FetchResult r;
  r.path = path;
  const auto t0 = std::chrono::steady_clock::now();
  auto res = cli.Get(prefix_ + path, headers);
  r.latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  if (!res) {
    r.error = httplib::to_string(res.error());
    return r;
  }
  r.status = res->status;
  r.body = std::move(res->body);
  return r;
}

FetchResult RoadDataClient::get(const std::string& path, std::stop_token stop) {
  FetchResult last;
  last.path = path;
  double latency = 0.0;
  auto backoff = config_.backoff;
  for (int a = 1; a <= config_.attempts; ++a) {
    {
      auto permit = limiter_.acquire(stop);
      if (!permit) {
        last.cancelled = true;
        break;
      }
      last = attempt(path);
    }
    latency += last.latency_ms;
    last.attempts = a;
    if (!is_retryable(last.status) || a == config_.attempts) break;
    if (!clock_.sleep_until(clock_.now() + backoff, stop)) {
      last.cancelled = true;
      break;
    }
    backoff *= 2;
  }
  last.latency_ms = latency;
  return last;
}

}  // namespace wcam::ingest
