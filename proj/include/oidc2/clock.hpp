// Copyright 2026 The oidc2 Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>

namespace oidc2 {

/// Seconds since the Unix epoch.
using UnixTime = std::int64_t;

/// Injectable time source. All protocol decisions read time through this
/// interface so tests can pin or advance it.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual UnixTime now() const = 0;
};

class SystemClock final : public Clock {
 public:
  UnixTime now() const override {
    return std::chrono::duration_cast<std::chrono::seconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
  }
};

/// Manually driven clock; safe to read and advance from several threads.
class ManualClock final : public Clock {
 public:
  explicit ManualClock(UnixTime start = 1'700'000'000) : now_(start) {}

  UnixTime now() const override { return now_.load(); }
  void set(UnixTime t) { now_.store(t); }
  void advance(std::int64_t seconds) { now_.fetch_add(seconds); }

 private:
  std::atomic<UnixTime> now_;
};

/// Clock frozen at one instant; used to evaluate tokens at a reference time.
class FixedClock final : public Clock {
 public:
  explicit FixedClock(UnixTime t) : t_(t) {}
  UnixTime now() const override { return t_; }

 private:
  UnixTime t_;
};

}  // namespace oidc2
