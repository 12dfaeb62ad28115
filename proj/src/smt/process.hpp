#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

namespace rssforge::smt {

// Child process with piped stdin/stdout (stderr goes to stdout).
class Process {
 public:
  explicit Process(const std::vector<std::string>& argv);
  ~Process();
  Process(const Process&) = delete;
  Process& operator=(const Process&) = delete;

  // Writes `input`, then reads until a line equal to `marker` appears.
  // Returns the output before the marker line, or nullopt on deadline.
  // Throws SolverError if the child exits or a pipe fails.
  std::optional<std::string> transact(const std::string& input, const std::string& marker,
                                      std::chrono::steady_clock::time_point deadline);

  void kill();

 private:
  int pid_ = -1;
  int in_fd_ = -1;
  int out_fd_ = -1;
  std::string pending_;
};

}  // namespace rssforge::smt
