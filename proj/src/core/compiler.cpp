#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <regex>
#include <sstream>

#include "repro/analyzer.hpp"
#include "repro/error.hpp"

namespace repro::analyzer {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

constexpr std::size_t kMaxOutput = 1 << 20;

std::vector<std::string> SplitCommand(std::string_view command) {
  std::vector<std::string> parts;
  std::istringstream in{std::string(command)};
  std::string word;
  while (in >> word) parts.push_back(word);
  return parts;
}

fs::path MakeScratchDir(const fs::path& base_dir) {
  static std::atomic<unsigned long> counter{0};
  std::error_code ec;
  const fs::path base = base_dir.empty() ? fs::temp_directory_path(ec) : base_dir;
  if (ec) Fail(ErrorCode::kConfiguration, "no temp directory: " + ec.message());
  const fs::path dir = base / ("repro-javac-" + std::to_string(::getpid()) + "-" +
                               std::to_string(counter.fetch_add(1)));
  fs::create_directories(dir, ec);
  if (ec) Fail(ErrorCode::kConfiguration, "scratch dir " + dir.string() + ": " + ec.message());
  return dir;
}

std::vector<Diagnostic> ParseDiagnostics(const std::string& output) {
  static const std::regex kLocated(R"(^.*?:(\d+): error: (.*)$)");
  static const std::regex kBare(R"(^error: (.*)$)");
  std::vector<Diagnostic> out;
  std::istringstream in(output);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::smatch m;
    if (std::regex_match(line, m, kLocated)) {
      out.push_back({std::atoi(m[1].str().c_str()), m[2].str()});
    } else if (std::regex_match(line, m, kBare)) {
      out.push_back({0, m[1].str()});
    }
  }
  return out;
}

struct RunOutcome {
  bool spawned = false;
  bool timed_out = false;
  int exit_code = -1;
  std::string output;
  std::string spawn_error;
};

RunOutcome Run(const std::vector<std::string>& args, const fs::path& dir,
               std::chrono::milliseconds timeout) {
  RunOutcome r;
  std::vector<char*> argv;
  for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);
  const std::string cwd = dir.string();

  int err_pipe[2];
  int out_pipe[2];
  if (::pipe2(err_pipe, O_CLOEXEC) != 0) {
    r.spawn_error = std::strerror(errno);
    return r;
  }
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
    r.spawn_error = std::strerror(errno);
    ::close(err_pipe[0]);
    ::close(err_pipe[1]);
    return r;
  }
  const pid_t pid = ::fork();
  if (pid < 0) {
    r.spawn_error = std::strerror(errno);
    for (int fd : {err_pipe[0], err_pipe[1], out_pipe[0], out_pipe[1]}) ::close(fd);
    return r;
  }
  if (pid == 0) {
    ::setpgid(0, 0);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::dup2(out_pipe[1], STDERR_FILENO);
    int devnull = ::open("/dev/null", O_RDONLY);
    if (devnull >= 0) ::dup2(devnull, STDIN_FILENO);
    if (::chdir(cwd.c_str()) == 0) ::execvp(argv[0], argv.data());
    const int e = errno;
    [[maybe_unused]] auto n = ::write(err_pipe[1], &e, sizeof(e));
    ::_exit(127);
  }
  ::setpgid(pid, pid);
  ::close(err_pipe[1]);
  ::close(out_pipe[1]);

  int child_errno = 0;
  ssize_t got;
  do {
    got = ::read(err_pipe[0], &child_errno, sizeof(child_errno));
  } while (got < 0 && errno == EINTR);
  ::close(err_pipe[0]);
  if (got == static_cast<ssize_t>(sizeof(child_errno))) {
    ::close(out_pipe[0]);
    int status;
    ::waitpid(pid, &status, 0);
    r.spawn_error = std::strerror(child_errno);
    return r;
  }
  r.spawned = true;

  const auto deadline = Clock::now() + timeout;
  char buf[4096];
  while (true) {
    const auto left =
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
    if (left <= 0) {
      r.timed_out = true;
      break;
    }
    pollfd pfd{out_pipe[0], POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(std::min<long long>(left, 1000)));
    if (ready < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (ready == 0) continue;
    const ssize_t n = ::read(out_pipe[0], buf, sizeof(buf));
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    if (r.output.size() < kMaxOutput) r.output.append(buf, static_cast<std::size_t>(n));
  }
  ::close(out_pipe[0]);
  if (r.timed_out) ::kill(-pid, SIGKILL);
  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  if (!r.timed_out && WIFEXITED(status)) r.exit_code = WEXITSTATUS(status);
  return r;
}

}  // namespace

std::string_view ToString(CompileStatus status) {
  switch (status) {
    case CompileStatus::kSuccess:
      return "success";
    case CompileStatus::kFailure:
      return "failure";
    case CompileStatus::kUnavailable:
      return "unavailable";
    case CompileStatus::kTimeout:
      return "timeout";
  }
  return "unavailable";
}

CompilerConfig CompilerConfig::FromEnvironment() {
  CompilerConfig config;
  if (const char* env = std::getenv("REPRO_JAVAC")) config.command = env;
  return config;
}

CompileResult CheckCompilability(std::string_view snippet, const CompilerConfig& compiler) {
  return CheckCompilability(snippet, AnalyzeStructure(snippet), compiler);
}

CompileResult CheckCompilability(std::string_view snippet, const StructuralSummary& summary,
                                 const CompilerConfig& compiler) {
  CompileResult result;
  auto args = SplitCommand(compiler.command);
  if (args.empty() || args[0] == "none") {
    result.status = CompileStatus::kUnavailable;
    result.note = "compiler disabled";
    return result;
  }
  if (!summary.parse_ok) {
    result.status = CompileStatus::kFailure;
    result.note = "not parsable; compiler not invoked";
    return result;
  }
  const CompilationUnit unit = WrappedSource(snippet, summary);
  const fs::path dir = MakeScratchDir(compiler.scratch_dir);
  {
    std::ofstream out(dir / unit.file_name, std::ios::binary);
    out << unit.source;
    if (!out) {
      std::error_code ec;
      fs::remove_all(dir, ec);
      Fail(ErrorCode::kConfiguration, "cannot write to scratch dir " + dir.string());
    }
  }
  args.push_back(unit.file_name);
  const RunOutcome run = Run(args, dir, compiler.timeout);
  std::error_code ec;
  fs::remove_all(dir, ec);

  if (!run.spawned) {
    result.status = CompileStatus::kUnavailable;
    result.note = "cannot spawn " + args[0] + ": " + run.spawn_error;
  } else if (run.timed_out) {
    result.status = CompileStatus::kTimeout;
    result.note = "killed after " + std::to_string(compiler.timeout.count()) + " ms";
  } else if (run.exit_code == 0) {
    result.status = CompileStatus::kSuccess;
  } else {
    result.status = CompileStatus::kFailure;
    result.diagnostics = ParseDiagnostics(run.output);
    result.note = "exit code " + std::to_string(run.exit_code);
  }
  return result;
}

}  // namespace repro::analyzer
