#pragma once

#include <chrono>
#include <cstddef>
#include <future>
#include <memory>
#include <mutex>
#include <condition_variable>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "pckal/reliability.hpp"

namespace pckal {

struct AdapterConfig {
  /// argv of the simulator; argv[0] is resolved through PATH.
  std::vector<std::string> command;
  std::chrono::milliseconds timeout{600'000};
  /// Number of resident simulator processes.
  std::size_t concurrency = 1;
};

/// Line-protocol client for an external simulator.
///
/// Each evaluation writes one line of whitespace-separated coordinates to the child's
/// stdin and reads one line holding a single decimal number from its stdout. Children
/// are started lazily and stay resident until the simulator is destroyed. Results are
/// cached by the exact bit pattern of the input, and concurrent requests for the same
/// point share one call.
class ExternalSimulator {
 public:
  explicit ExternalSimulator(AdapterConfig config);
  ~ExternalSimulator();

  ExternalSimulator(const ExternalSimulator&) = delete;
  ExternalSimulator& operator=(const ExternalSimulator&) = delete;

  double evaluate(const Eigen::VectorXd& x);

  /// Number of request/response exchanges with the children so far.
  std::size_t invocations() const;

  const AdapterConfig& config() const noexcept { return config_; }

 private:
  class Child;

  double call(const Eigen::VectorXd& x);

  AdapterConfig config_;
  mutable std::mutex mutex_;
  std::condition_variable child_free_;
  std::vector<std::unique_ptr<Child>> idle_;
  std::size_t started_ = 0;
  std::size_t invocations_ = 0;
  std::unordered_map<std::string, std::shared_future<double>> cache_;
};

/// threshold - simulator(x), e.g. the failure and repair limit states sharing one run.
LimitState external_limit_state(std::shared_ptr<ExternalSimulator> simulator, double threshold,
                                std::string name);

}  // namespace pckal
