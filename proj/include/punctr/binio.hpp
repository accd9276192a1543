#ifndef PUNCTR_BINIO_HPP
#define PUNCTR_BINIO_HPP

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "punctr/util.hpp"

// Little-endian primitive readers/writers for the versioned binary
// containers (language models, tagger checkpoints).

namespace punctr::binio {

inline void write_bytes(std::ostream& out, const void* p, size_t n) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    if (!out) throw FileError("write failed");
}

inline void read_bytes(std::istream& in, void* p, size_t n) {
    in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (in.gcount() != static_cast<std::streamsize>(n)) throw FileError("unexpected end of file");
}

template <typename T>
void write_pod(std::ostream& out, T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    write_bytes(out, &v, sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
    static_assert(std::is_trivially_copyable_v<T>);
    T v;
    read_bytes(in, &v, sizeof(T));
    return v;
}

inline void write_string(std::ostream& out, const std::string& s) {
    write_pod<uint32_t>(out, static_cast<uint32_t>(s.size()));
    write_bytes(out, s.data(), s.size());
}

inline std::string read_string(std::istream& in) {
    uint32_t n = read_pod<uint32_t>(in);
    std::string s(n, '\0');
    if (n) read_bytes(in, s.data(), n);
    return s;
}

inline void write_magic(std::ostream& out, const char magic[4], uint32_t version) {
    write_bytes(out, magic, 4);
    write_pod<uint32_t>(out, version);
}

inline void check_magic(std::istream& in, const char magic[4], uint32_t expected_version,
                        const std::string& what) {
    char buf[4];
    read_bytes(in, buf, 4);
    if (std::memcmp(buf, magic, 4) != 0) throw FileError("bad magic bytes: not a " + what);
    uint32_t version = read_pod<uint32_t>(in);
    if (version != expected_version)
        throw FileError("unsupported " + what + " format version " + std::to_string(version));
}

}  // namespace punctr::binio

#endif  // PUNCTR_BINIO_HPP
