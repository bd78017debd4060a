#pragma once

#include <chrono>
#include <condition_variable>
#include <mutex>
#include <semaphore>
#include <stop_token>
#include <string>
#include <utility>

#include "wcam/ingest/config.hpp"

namespace wcam::ingest {

using TimePoint = std::chrono::time_point<std::chrono::system_clock, std::chrono::milliseconds>;

class Clock {
 public:
  virtual ~Clock() = default;
  virtual TimePoint now() = 0;
  // Returns false when stop was requested before the deadline.
  virtual bool sleep_until(TimePoint deadline, std::stop_token stop) = 0;
};

class SystemClock : public Clock {
 public:
  TimePoint now() override;
  bool sleep_until(TimePoint deadline, std::stop_token stop) override;

 private:
  std::mutex mutex_;
  std::condition_variable_any cv_;
};

// Virtual time: sleeping jumps the clock forward instead of blocking.
class ManualClock : public Clock {
 public:
  explicit ManualClock(TimePoint start) : now_(start) {}
  TimePoint now() override;
  bool sleep_until(TimePoint deadline, std::stop_token stop) override;
  void advance(std::chrono::milliseconds by);

 private:
  std::mutex mutex_;
  TimePoint now_;
};

// Caps in-flight requests and spaces request starts to one host.
class RateLimiter {
 public:
  RateLimiter(int max_concurrent, std::chrono::milliseconds spacing, Clock& clock);

  class Permit {
   public:
    explicit Permit(RateLimiter* owner = nullptr) : owner_(owner) {}
    Permit(Permit&& other) noexcept : owner_(std::exchange(other.owner_, nullptr)) {}
    Permit& operator=(Permit&&) = delete;
    ~Permit() {
      if (owner_) owner_->slots_.release();
    }
    explicit operator bool() const { return owner_ != nullptr; }

   private:
    RateLimiter* owner_;
  };

  // Empty permit when cancelled while waiting.
  Permit acquire(std::stop_token stop);

 private:
  std::counting_semaphore<64> slots_;
  std::chrono::milliseconds spacing_;
  Clock& clock_;
  std::mutex mutex_;
  TimePoint next_start_{};
};

struct FetchResult {
  std::string path;
  int status = 0;     // 0 when no response arrived
  std::string body;
  std::string error;  // transport error text
  int attempts = 0;
  double latency_ms = 0.0;  // wall time summed over attempts
  bool cancelled = false;

  bool ok() const { return status == 200; }
};

bool is_retryable(int status);

class RoadDataClient {
 public:
  RoadDataClient(ClientConfig config, Clock& clock);

  // GET with retries on transport errors, 5xx and 429; other statuses return
  // after one attempt.
  FetchResult get(const std::string& path, std::stop_token stop = {});

  FetchResult camera_image(const std::string& camera_id, std::stop_token stop = {}) {
    return get("/cameras/" + camera_id + "/image", stop);
  }
  FetchResult station_sensors(const std::string& station_id, std::stop_token stop = {}) {
    return get("/stations/" + station_id + "/sensors", stop);
  }

  const ClientConfig& config() const { return config_; }
  Clock& clock() { return clock_; }

 private:
  FetchResult attempt(const std::string& path);

  ClientConfig config_;
  Clock& clock_;
  RateLimiter limiter_;
  std::string host_;    // scheme://host:port
  std::string prefix_;  // path prefix from the base url
};

}  // namespace wcam::ingest
