#include "tablemaster/executor.hpp"

#include <fcntl.h>
#include <poll.h>
#include <sched.h>
#include <signal.h>
#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <fstream>
#include <mutex>
#include <thread>

#include "text_util.hpp"

namespace tablemaster {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

std::optional<std::string> ExecutionResult::candidate_answer() const {
  auto lines = detail::split_lines(stdout_text);
  for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
    auto line = detail::trim(*it);
    if (!line.empty()) return std::string(line);
  }
  return std::nullopt;
}

namespace {

class ProcessLimiter {
 public:
  void acquire(std::size_t limit) {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return active_ < std::max<std::size_t>(limit, 1); });
    ++active_;
  }
  void release() {
    {
      std::lock_guard lock(mu_);
      --active_;
    }
    cv_.notify_one();
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::size_t active_ = 0;
};

ProcessLimiter& limiter() {
  static ProcessLimiter instance;
  return instance;
}

struct LimiterSlot {
  explicit LimiterSlot(std::size_t limit) { limiter().acquire(limit); }
  ~LimiterSlot() { limiter().release(); }
  LimiterSlot(const LimiterSlot&) = delete;
  LimiterSlot& operator=(const LimiterSlot&) = delete;
};

class ScratchDir {
 public:
  explicit ScratchDir(const fs::path& root) {
    fs::path base = root.empty() ? fs::temp_directory_path() : root;
    fs::create_directories(base);
    std::string tmpl = (base / "tm-exec-XXXXXX").string();
    if (!mkdtemp(tmpl.data())) throw Error("cannot create scratch directory: " + std::string(std::strerror(errno)));
    path_ = tmpl;
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

struct Pipe {
  int fd[2] = {-1, -1};
  Pipe() {
    if (pipe2(fd, O_CLOEXEC) != 0) throw Error("pipe failed: " + std::string(std::strerror(errno)));
  }
  ~Pipe() {
    close_read();
    close_write();
  }
  void close_read() {
    if (fd[0] >= 0) ::close(fd[0]);
    fd[0] = -1;
  }
  void close_write() {
    if (fd[1] >= 0) ::close(fd[1]);
    fd[1] = -1;
  }
};

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
}

// Everything the child needs is materialised before fork so the child only
// makes async-signal-safe calls.
struct ChildSpec {
  std::vector<std::string> args;
  std::vector<std::string> env;
  std::string workdir;
  rlim_t cpu_seconds;
  rlim_t memory_bytes;
};

[[noreturn]] void run_child(const ChildSpec& spec, std::vector<char*>& argv, std::vector<char*>& envp,
                            int out_fd, int err_fd, int info_fd) {
  setpgid(0, 0);
  char isolated = unshare(CLONE_NEWUSER | CLONE_NEWNET) == 0 ? '1' : '0';
  if (isolated == '0' && unshare(CLONE_NEWNET) == 0) isolated = '1';
  (void)!write(info_fd, &isolated, 1);

  struct rlimit lim;
  lim.rlim_cur = lim.rlim_max = spec.cpu_seconds;
  setrlimit(RLIMIT_CPU, &lim);
  lim.rlim_cur = lim.rlim_max = spec.memory_bytes;
  setrlimit(RLIMIT_AS, &lim);
  lim.rlim_cur = lim.rlim_max = 64ull << 20;
  setrlimit(RLIMIT_FSIZE, &lim);
  lim.rlim_cur = lim.rlim_max = 0;
  setrlimit(RLIMIT_CORE, &lim);

  if (chdir(spec.workdir.c_str()) != 0) _exit(126);
  int devnull = open("/dev/null", O_RDONLY);
  if (devnull >= 0) dup2(devnull, STDIN_FILENO);
  dup2(out_fd, STDOUT_FILENO);
  dup2(err_fd, STDERR_FILENO);
  execvpe(argv[0], argv.data(), envp.data());
  char failed = 'E';
  (void)!write(info_fd, &failed, 1);
  _exit(127);
}

void scrub(std::string& text, const std::string& path) {
  for (auto pos = text.find(path); pos != std::string::npos; pos = text.find(path, pos + 1)) {
    text.replace(pos, path.size(), ".");
  }
}

}  // namespace

ExecutionResult run_sandboxed(const std::string& program, const Table& table, const std::string& question,
                              const ExecutorProfile& profile) {
  if (profile.interpreter.empty()) throw ConfigError("executor profile has no interpreter command");
  LimiterSlot slot(profile.max_parallel);
  ScratchDir scratch(profile.scratch_root);
  const fs::path program_path = scratch.path() / ("program" + profile.extension);
  const fs::path table_path = scratch.path() / "table.csv";
  write_file(program_path, program);
  write_file(table_path, render_csv(table));

  ChildSpec spec;
  spec.args = profile.interpreter;
  spec.args.push_back(program_path.string());
  spec.env = {"PATH=/usr/local/bin:/usr/bin:/bin",
              "HOME=" + scratch.path().string(),
              "TMPDIR=" + scratch.path().string(),
              "LANG=C.UTF-8",
              "PYTHONDONTWRITEBYTECODE=1",
              "PYTHONHASHSEED=0",
              "PYTHONIOENCODING=utf-8",
              "OMP_NUM_THREADS=1",
              "OPENBLAS_NUM_THREADS=1",
              "TM_TABLE_PATH=" + table_path.string(),
              "TM_QUESTION=" + question};
  spec.workdir = scratch.path().string();
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(profile.timeout).count();
  spec.cpu_seconds = static_cast<rlim_t>(secs + 1);
  spec.memory_bytes = static_cast<rlim_t>(profile.memory_mb) << 20;

  std::vector<char*> argv;
  for (auto& a : spec.args) argv.push_back(a.data());
  argv.push_back(nullptr);
  std::vector<char*> envp;
  for (auto& e : spec.env) envp.push_back(e.data());
  envp.push_back(nullptr);

  Pipe out, err, info;
  const auto start = Clock::now();
  const auto deadline = start + profile.timeout;
  pid_t pid = fork();
  if (pid < 0) throw Error("fork failed: " + std::string(std::strerror(errno)));
  if (pid == 0) run_child(spec, argv, envp, out.fd[1], err.fd[1], info.fd[1]);
  setpgid(pid, pid);
  out.close_write();
  err.close_write();
  info.close_write();

  ExecutionResult result;
  std::array<pollfd, 2> fds{pollfd{out.fd[0], POLLIN, 0}, pollfd{err.fd[0], POLLIN, 0}};
  std::array<std::string*, 2> sinks{&result.stdout_text, &result.stderr_text};
  int open_fds = 2;
  char buf[4096];
  while (open_fds > 0) {
    auto now = Clock::now();
    if (now >= deadline) {
      result.timed_out = true;
      break;
    }
    int wait_ms = static_cast<int>(std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count());
    int rc = poll(fds.data(), fds.size(), std::max(wait_ms, 1));
    if (rc < 0) {
      if (errno == EINTR) continue;
      break;
    }
    for (std::size_t i = 0; i < fds.size(); ++i) {
      if (fds[i].fd < 0 || !(fds[i].revents & (POLLIN | POLLHUP | POLLERR))) continue;
      ssize_t n = read(fds[i].fd, buf, sizeof buf);
      if (n <= 0) {
        fds[i].fd = -1;
        --open_fds;
      } else if (sinks[i]->size() < profile.max_output_bytes) {
        const std::size_t room = profile.max_output_bytes - sinks[i]->size();
        sinks[i]->append(buf, std::min(room, static_cast<std::size_t>(n)));
      }
    }
  }

  int status = 0;
  bool reaped = false;
  while (!result.timed_out) {
    pid_t w = waitpid(pid, &status, WNOHANG);
    if (w == pid) {
      reaped = true;
      break;
    }
    if (Clock::now() >= deadline) {
      result.timed_out = true;
      break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  kill(-pid, SIGKILL);  // stray grandchildren included
  if (!reaped) waitpid(pid, &status, 0);
  result.duration = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start);

  if (WIFEXITED(status)) {
    result.exit_status = WEXITSTATUS(status);
  } else if (WIFSIGNALED(status)) {
    result.exit_status = 128 + WTERMSIG(status);
  }
  char flags[2] = {0, 0};
  ssize_t got = read(info.fd[0], flags, sizeof flags);
  result.network_isolated = got >= 1 && flags[0] == '1';
  if (got == 2 && flags[1] == 'E') {
    result.stderr_text += "failed to launch interpreter '" + profile.interpreter.front() + "'\n";
  }
  // Scratch names are random; keep captured output reproducible.
  scrub(result.stdout_text, scratch.path().string());
  scrub(result.stderr_text, scratch.path().string());
  return result;
}

ExecutionResult execute_program(const std::string& program, const Table& table, const std::string& question,
                                const ExecutorProfile& profile) {
  ExecutionResult result = run_sandboxed(program, table, question, profile);
  if (result.timed_out) {
    throw ExecTimeout("program exceeded " + std::to_string(profile.timeout.count()) + " ms", std::move(result));
  }
  if (result.exit_status != 0) {
    throw ExecNonZeroExit("program exited with status " + std::to_string(result.exit_status), std::move(result));
  }
  if (!result.candidate_answer()) throw ExecEmptyOutput("program printed nothing", std::move(result));
  return result;
}

}  // namespace tablemaster
