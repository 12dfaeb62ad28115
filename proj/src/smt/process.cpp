#include "process.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <mutex>

#include "rssforge/smt/solver.hpp"

namespace rssforge::smt {

namespace {

void ignore_sigpipe() {
  static std::once_flag once;
  std::call_once(once, [] { ::signal(SIGPIPE, SIG_IGN); });
}

std::string errno_text(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

}  // namespace

Process::Process(const std::vector<std::string>& argv) {
  if (argv.empty()) throw SolverError("empty solver command");
  ignore_sigpipe();
  int to_child[2];
  int from_child[2];
  if (::pipe2(to_child, O_CLOEXEC) != 0) throw SolverError(errno_text("pipe"));
  if (::pipe2(from_child, O_CLOEXEC) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    throw SolverError(errno_text("pipe"));
  }
  // Exec failure is reported through this pipe; it closes on successful exec.
  int status_pipe[2];
  if (::pipe2(status_pipe, O_CLOEXEC) != 0) throw SolverError(errno_text("pipe"));

  std::vector<char*> args;
  args.reserve(argv.size() + 1);
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);

  pid_t pid = ::fork();
  if (pid < 0) throw SolverError(errno_text("fork"));
  if (pid == 0) {
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    ::dup2(from_child[1], STDERR_FILENO);
    ::execvp(args[0], args.data());
    int err = errno;
    (void)!::write(status_pipe[1], &err, sizeof err);
    ::_exit(127);
  }
  ::close(to_child[0]);
  ::close(from_child[1]);
  ::close(status_pipe[1]);
  int err = 0;
  ssize_t n = ::read(status_pipe[0], &err, sizeof err);
  ::close(status_pipe[0]);
  if (n == static_cast<ssize_t>(sizeof err)) {
    ::close(to_child[1]);
    ::close(from_child[0]);
    ::waitpid(pid, nullptr, 0);
    throw SolverError("cannot start solver '" + argv[0] + "': " + std::strerror(err));
  }
  pid_ = pid;
  in_fd_ = to_child[1];
  out_fd_ = from_child[0];
  ::fcntl(in_fd_, F_SETFL, ::fcntl(in_fd_, F_GETFL) | O_NONBLOCK);
  ::fcntl(out_fd_, F_SETFL, ::fcntl(out_fd_, F_GETFL) | O_NONBLOCK);
}

Process::~Process() { kill(); }

void Process::kill() {
  if (in_fd_ >= 0) ::close(in_fd_);
  if (out_fd_ >= 0) ::close(out_fd_);
  in_fd_ = out_fd_ = -1;
  if (pid_ > 0) {
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, nullptr, 0);
    pid_ = -1;
  }
}

std::optional<std::string> Process::transact(const std::string& input, const std::string& marker,
                                             std::chrono::steady_clock::time_point deadline) {
  if (pid_ < 0) throw SolverError("solver process is not running");
  std::size_t written = 0;
  const std::string needle = marker + "\n";
  for (;;) {
    // The marker is always echoed on a line of its own.
    std::size_t at = pending_.find(needle);
    while (at != std::string::npos && at != 0 && pending_[at - 1] != '\n') at = pending_.find(needle, at + 1);
    if (at != std::string::npos && written == input.size()) {
      std::string out = pending_.substr(0, at);
      pending_.erase(0, at + needle.size());
      return out;
    }

    auto now = std::chrono::steady_clock::now();
    if (now >= deadline) return std::nullopt;
    int wait_ms = static_cast<int>(
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count() + 1);

    pollfd fds[2];
    int nfds = 0;
    fds[nfds++] = {out_fd_, POLLIN, 0};
    if (written < input.size()) fds[nfds++] = {in_fd_, POLLOUT, 0};
    int r = ::poll(fds, static_cast<nfds_t>(nfds), wait_ms);
    if (r < 0) {
      if (errno == EINTR) continue;
      throw SolverError(errno_text("poll"));
    }
    if (r == 0) continue;

    if (nfds == 2 && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
      ssize_t n = ::write(in_fd_, input.data() + written, input.size() - written);
      if (n < 0 && errno != EAGAIN && errno != EINTR) {
        throw SolverError(errno_text("write to solver"));
      }
      if (n > 0) written += static_cast<std::size_t>(n);
    }
    if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
      char buf[65536];
      ssize_t n = ::read(out_fd_, buf, sizeof buf);
      if (n == 0) throw SolverError("solver process exited unexpectedly; output so far: " + pending_);
      if (n < 0 && errno != EAGAIN && errno != EINTR) throw SolverError(errno_text("read from solver"));
      if (n > 0) pending_.append(buf, static_cast<std::size_t>(n));
    }
  }
}

}  // namespace rssforge::smt
