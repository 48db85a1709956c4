#include "pckal/external_adapter.hpp"

#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <iostream>

#include "pckal/errors.hpp"

namespace pckal {
namespace {

std::string format_line(const Eigen::VectorXd& x) {
  std::string line;
  char buf[32];
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", x[i]);
    if (i > 0) line += ' ';
    line += buf;
  }
  line += '\n';
  return line;
}

std::string cache_key(const Eigen::VectorXd& x) {
  std::string key(static_cast<std::size_t>(x.size()) * sizeof(double), '\0');
  std::memcpy(key.data(), x.data(), key.size());
  return key;
}

[[noreturn]] void fail(const std::string& message, const std::string& payload) {
  std::cerr << "pckal: external simulator failure: " << message << "; payload: '" << payload
            << "'\n";
  throw Error(ErrorCode::external_evaluator, message + " (payload: '" + payload + "')");
}

}  // namespace

/// One resident child connected through a socket pair on its stdin/stdout.
class ExternalSimulator::Child {
 public:
  explicit Child(const std::vector<std::string>& command) {
    if (command.empty()) throw Error(ErrorCode::validation, "adapter command is empty");
    int fds[2];
    if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, fds) != 0) {
      throw Error(ErrorCode::external_evaluator, "socketpair failed: " + std::string(std::strerror(errno)));
    }
    std::vector<char*> argv;
    for (const auto& a : command) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);
    pid_ = ::fork();
    if (pid_ < 0) {
      ::close(fds[0]);
      ::close(fds[1]);
      throw Error(ErrorCode::external_evaluator, "fork failed");
    }
    if (pid_ == 0) {
      ::setpgid(0, 0);
      ::dup2(fds[1], STDIN_FILENO);
      ::dup2(fds[1], STDOUT_FILENO);
      ::execvp(argv[0], argv.data());
      std::_Exit(127);
    }
    ::close(fds[1]);
    fd_ = fds[0];
  }

  ~Child() {
    if (fd_ >= 0) {
      ::shutdown(fd_, SHUT_WR);
      ::close(fd_);
    }
    if (pid_ > 0) {
      // Give the child a moment to exit on EOF before killing it.
      for (int i = 0; i < 50; ++i) {
        if (::waitpid(pid_, nullptr, WNOHANG) == pid_) return;
        ::usleep(2000);
      }
      ::kill(-pid_, SIGKILL);
      ::waitpid(pid_, nullptr, 0);
    }
  }

  Child(const Child&) = delete;
  Child& operator=(const Child&) = delete;

  double exchange(const std::string& line, std::chrono::milliseconds timeout) {
    std::size_t sent = 0;
    while (sent < line.size()) {
      const ssize_t n = ::send(fd_, line.data() + sent, line.size() - sent, MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) continue;
        broken_ = true;
        fail("cannot write to simulator (" + exit_status() + ")", trim(line));
      }
      sent += static_cast<std::size_t>(n);
    }
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    for (;;) {
      const auto newline = buffer_.find('\n');
      if (newline != std::string::npos) {
        std::string reply = buffer_.substr(0, newline);
        buffer_.erase(0, newline + 1);
        return parse(reply);
      }
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
          deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) {
        broken_ = true;
        fail("simulator timed out after " + std::to_string(timeout.count()) + " ms", trim(line));
      }
      pollfd pfd{fd_, POLLIN, 0};
      const int ready = ::poll(&pfd, 1, static_cast<int>(std::min<long long>(left.count(), 1 << 30)));
      if (ready < 0) {
        if (errno == EINTR) continue;
        broken_ = true;
        fail("poll failed", trim(line));
      }
      if (ready == 0) continue;
      char chunk[4096];
      const ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
      if (n < 0) {
        if (errno == EINTR) continue;
        broken_ = true;
        fail("read from simulator failed", trim(line));
      }
      if (n == 0) {
        broken_ = true;
        fail("simulator closed its output (" + exit_status() + ")", trim(line));
      }
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

  bool broken() const noexcept { return broken_; }

 private:
  static std::string trim(std::string s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    std::size_t start = 0;
    while (start < s.size() && std::isspace(static_cast<unsigned char>(s[start]))) ++start;
    return s.substr(start);
  }

  double parse(const std::string& reply) {
    const std::string text = trim(reply);
    char* end = nullptr;
    errno = 0;
    const double value = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE ||
        !std::isfinite(value)) {
      broken_ = true;
      fail("unparseable simulator output", text);
    }
    return value;
  }

  std::string exit_status() {
    int status = 0;
    for (int i = 0; i < 50; ++i) {
      const pid_t r = ::waitpid(pid_, &status, WNOHANG);
      if (r == pid_) {
        pid_ = -1;
        if (WIFEXITED(status)) return "exit status " + std::to_string(WEXITSTATUS(status));
        if (WIFSIGNALED(status)) return "killed by signal " + std::to_string(WTERMSIG(status));
        return "terminated";
      }
      ::usleep(2000);
    }
    return "still running";
  }

  pid_t pid_ = -1;
  int fd_ = -1;
  std::string buffer_;
  bool broken_ = false;
};

ExternalSimulator::ExternalSimulator(AdapterConfig config) : config_(std::move(config)) {
  if (config_.command.empty()) throw Error(ErrorCode::validation, "adapter command is empty");
  if (config_.concurrency == 0) config_.concurrency = 1;
  if (config_.timeout.count() <= 0) {
    throw Error(ErrorCode::validation, "adapter timeout must be positive");
  }
}

ExternalSimulator::~ExternalSimulator() = default;

std::size_t ExternalSimulator::invocations() const {
  std::lock_guard lock(mutex_);
  return invocations_;
}

double ExternalSimulator::evaluate(const Eigen::VectorXd& x) {
  const std::string key = cache_key(x);
  std::promise<double> promise;
  std::shared_future<double> result;
  bool owner = false;
  {
    std::lock_guard lock(mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end()) {
      result = it->second;
    } else {
      result = promise.get_future().share();
      cache_.emplace(key, result);
      owner = true;
    }
  }
  if (owner) {
    try {
      promise.set_value(call(x));
    } catch (...) {
      promise.set_exception(std::current_exception());
    }
  }
  return result.get();
}

double ExternalSimulator::call(const Eigen::VectorXd& x) {
  std::unique_ptr<Child> child;
  {
    std::unique_lock lock(mutex_);
    child_free_.wait(lock, [&] { return !idle_.empty() || started_ < config_.concurrency; });
    if (!idle_.empty()) {
      child = std::move(idle_.back());
      idle_.pop_back();
    } else {
      ++started_;
    }
    ++invocations_;
  }
  auto release = [&](bool keep) {
    std::unique_ptr<Child> retired;
    std::lock_guard lock(mutex_);
    if (keep) {
      idle_.push_back(std::move(child));
    } else {
      retired = std::move(child);
      --started_;
    }
    child_free_.notify_one();
  };
  try {
    if (!child) child = std::make_unique<Child>(config_.command);
    const double value = child->exchange(format_line(x), config_.timeout);
    release(true);
    return value;
  } catch (...) {
    release(false);
    throw;
  }
}

LimitState external_limit_state(std::shared_ptr<ExternalSimulator> simulator, double threshold,
                                std::string name) {
  return LimitState{std::move(name),
                    [simulator = std::move(simulator), threshold](const Eigen::VectorXd& x) {
                      return threshold - simulator->evaluate(x);
                    },
                    CostClass::expensive_external};
}

}  // namespace pckal
