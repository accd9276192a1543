#ifndef PUNCTR_UTIL_HPP
#define PUNCTR_UTIL_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace punctr {

// Raised when an input violates an operation's contract.
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised on malformed or unreadable files (corpora, checkpoints, plans).
class FileError : public std::runtime_error {
public:
    explicit FileError(const std::string& msg) : std::runtime_error(msg) {}
};

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);
std::vector<std::string> read_lines(const std::string& path);
bool file_exists(const std::string& path);
void ensure_dir(const std::string& path);

// Hex-encoded SHA-256 of a byte string / file contents.
std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::string& path);

// True if the byte string is well-formed UTF-8.
bool valid_utf8(const std::string& s);

std::string trim(const std::string& s);
bool starts_with(const std::string& s, const std::string& prefix);

}  // namespace punctr

#endif  // PUNCTR_UTIL_HPP
