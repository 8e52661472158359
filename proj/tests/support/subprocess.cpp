#include "subprocess.hpp"

#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdint>
#include <cstdio>
#include <stdexcept>

namespace testsup {

ProcResult run_process(const std::vector<std::string>& argv,
                       std::uint64_t rlimit_as_bytes) {
  int pipefd[2];
  if (pipe(pipefd) != 0) throw std::runtime_error("pipe failed");

  pid_t pid = fork();
  if (pid < 0) throw std::runtime_error("fork failed");

  if (pid == 0) {
    close(pipefd[0]);
    dup2(pipefd[1], 1);
    dup2(pipefd[1], 2);
    close(pipefd[1]);
    if (rlimit_as_bytes > 0) {
      rlimit lim{rlimit_as_bytes, rlimit_as_bytes};
      setrlimit(RLIMIT_AS, &lim);
    }
    std::vector<char*> args;
    args.reserve(argv.size() + 1);
    for (const std::string& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);
    execv(args[0], args.data());
    perror("execv");
    _exit(127);
  }

  close(pipefd[1]);
  ProcResult result;
  char buf[4096];
  ssize_t got;
  while ((got = read(pipefd[0], buf, sizeof(buf))) > 0)
    result.output.append(buf, static_cast<std::size_t>(got));
  close(pipefd[0]);

  int status = 0;
  waitpid(pid, &status, 0);
  if (WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
  else if (WIFSIGNALED(status)) result.exit_code = 128 + WTERMSIG(status);
  return result;
}

}  // namespace testsup
