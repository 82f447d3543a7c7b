#pragma once

#include <string>
#include <vector>

namespace veilkit {

// Minimal line-oriented child process: one writer, one reader, blocking.
// Used by the subprocess NER adapter; POSIX only.
class Subprocess {
public:
    explicit Subprocess(const std::vector<std::string>& argv);
    ~Subprocess();

    Subprocess(const Subprocess&) = delete;
    Subprocess& operator=(const Subprocess&) = delete;

    void write_line(const std::string& line);
    std::string read_line();  // without trailing newline; throws on EOF

private:
    int pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    std::string read_buffer_;
};

} // namespace veilkit
