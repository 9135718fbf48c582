#pragma once

#include <fcntl.h>
#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <filesystem>
#include <string>
#include <thread>

#include "flagtune/core.hpp"

namespace flagtune {

struct ProcessResult {
  int exit_code = -1;     // -1 when killed by a signal or timed out
  bool timed_out = false;
  double seconds = 0.0;   // wall clock from fork to reap
};

// Runs `command` through /bin/sh in its own process group. stdout goes to
// `stdout_path` (or /dev/null when empty), stderr to /dev/null. On timeout the
// whole group is killed.
inline ProcessResult run_shell(const std::string& command, double timeout_s,
                               const std::filesystem::path& stdout_path = {},
                               const std::filesystem::path& cwd = {}) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  const pid_t pid = ::fork();
  if (pid < 0) throw EnvironmentError(std::string("fork failed: ") + std::strerror(errno));
  if (pid == 0) {
    ::setpgid(0, 0);
    if (!cwd.empty() && ::chdir(cwd.c_str()) != 0) ::_exit(126);
    const std::string out = stdout_path.empty() ? std::string("/dev/null") : stdout_path.string();
    const int out_fd = ::open(out.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    const int null_fd = ::open("/dev/null", O_RDWR);
    if (out_fd < 0 || null_fd < 0) ::_exit(126);
    ::dup2(null_fd, STDIN_FILENO);
    ::dup2(out_fd, STDOUT_FILENO);
    ::dup2(null_fd, STDERR_FILENO);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::setpgid(pid, pid);

  ProcessResult result;
  const auto deadline = start + std::chrono::duration<double>(timeout_s);
  int status = 0;
  for (;;) {
    const pid_t r = ::waitpid(pid, &status, WNOHANG);
    if (r == pid) break;
    if (r < 0 && errno != EINTR) throw EnvironmentError(std::string("waitpid failed: ") + std::strerror(errno));
    if (clock::now() >= deadline) {
      ::kill(-pid, SIGKILL);
      ::waitpid(pid, &status, 0);
      result.timed_out = true;
      break;
    }
    std::this_thread::sleep_for(std::chrono::microseconds(200));
  }
  result.seconds = std::chrono::duration<double>(clock::now() - start).count();
  if (!result.timed_out && WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
  return result;
}

// Runs `command` and returns its stdout (trailing newline stripped); empty on failure.
inline std::string capture_shell(const std::string& command, double timeout_s = 10.0) {
  const auto tmp = std::filesystem::temp_directory_path() /
                   ("flagtune_capture_" + std::to_string(::getpid()) + ".txt");
  const auto r = run_shell(command, timeout_s, tmp);
  std::string text;
  if (r.exit_code == 0) {
    if (FILE* f = std::fopen(tmp.c_str(), "rb")) {
      char buf[4096];
      std::size_t got;
      while ((got = std::fread(buf, 1, sizeof buf, f)) > 0) text.append(buf, got);
      std::fclose(f);
    }
  }
  std::error_code ec;
  std::filesystem::remove(tmp, ec);
  while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
  return text;
}

}  // namespace flagtune
