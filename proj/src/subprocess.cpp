#include "veilkit/subprocess.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <csignal>
#include <cstring>

#include "veilkit/errors.hpp"

namespace veilkit {

Subprocess::Subprocess(const std::vector<std::string>& argv) {
    if (argv.empty()) throw AdapterError("subprocess: empty argv");
    // A dead child must surface as EPIPE on write, not kill the parent.
    signal(SIGPIPE, SIG_IGN);
    int in_pipe[2];   // parent -> child
    int out_pipe[2];  // child -> parent
    if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0)
        throw AdapterError(std::string("subprocess: pipe failed: ") + std::strerror(errno));

    const pid_t pid = fork();
    if (pid < 0) throw AdapterError(std::string("subprocess: fork failed: ") + std::strerror(errno));
    if (pid == 0) {
        dup2(in_pipe[0], STDIN_FILENO);
        dup2(out_pipe[1], STDOUT_FILENO);
        close(in_pipe[0]);
        close(in_pipe[1]);
        close(out_pipe[0]);
        close(out_pipe[1]);
        std::vector<char*> args;
        args.reserve(argv.size() + 1);
        for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
        args.push_back(nullptr);
        execvp(args[0], args.data());
        _exit(127);
    }
    close(in_pipe[0]);
    close(out_pipe[1]);
    pid_ = pid;
    to_child_ = in_pipe[1];
    from_child_ = out_pipe[0];
}

Subprocess::~Subprocess() {
    if (to_child_ >= 0) close(to_child_);
    if (from_child_ >= 0) close(from_child_);
    if (pid_ > 0) {
        int status = 0;
        waitpid(pid_, &status, 0);
    }
}

void Subprocess::write_line(const std::string& line) {
    std::string buf = line;
    buf.push_back('\n');
    std::size_t written = 0;
    while (written < buf.size()) {
        const ssize_t n = write(to_child_, buf.data() + written, buf.size() - written);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw AdapterError(std::string("subprocess: write failed: ") + std::strerror(errno));
        }
        written += static_cast<std::size_t>(n);
    }
}

std::string Subprocess::read_line() {
    for (;;) {
        const auto nl = read_buffer_.find('\n');
        if (nl != std::string::npos) {
            std::string line = read_buffer_.substr(0, nl);
            read_buffer_.erase(0, nl + 1);
            return line;
        }
        char chunk[4096];
        const ssize_t n = read(from_child_, chunk, sizeof(chunk));
        if (n < 0) {
            if (errno == EINTR) continue;
            throw AdapterError(std::string("subprocess: read failed: ") + std::strerror(errno));
        }
        if (n == 0) throw AdapterError("subprocess: child closed its output");
        read_buffer_.append(chunk, static_cast<std::size_t>(n));
    }
}

} // namespace veilkit
