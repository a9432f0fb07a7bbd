#pragma once
// Shared fixtures for the unit and acceptance tests.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <string>
#include <unistd.h>

#include "pgds/common.hpp"

namespace testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
  public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("pgds-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

  private:
    std::filesystem::path path_;
};

inline void append_codepoint(std::string& out, std::uint32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

// Valid UTF-8 mixing ASCII (markup characters and whitespace included), CJK,
// other BMP code points and astral code points.
inline std::string random_unicode(pgds::Rng& rng, std::size_t max_len) {
    static const char kAscii[] = " \t\n\r<>&;:/\"'abcXYZ019-_.,!?#";
    const std::size_t len = static_cast<std::size_t>(rng.below(max_len + 1));
    std::string s;
    for (std::size_t i = 0; i < len; ++i) {
        switch (rng.below(5)) {
            case 0: s.push_back(kAscii[rng.below(sizeof(kAscii) - 1)]); break;
            case 1: append_codepoint(s, static_cast<std::uint32_t>(0x20 + rng.below(0x5F))); break;
            case 2: append_codepoint(s, static_cast<std::uint32_t>(0x4E00 + rng.below(0x5000))); break;
            case 3: {
                std::uint32_t cp = static_cast<std::uint32_t>(0xA0 + rng.below(0xD000));
                if (cp >= 0xD800) cp += 0x800;  // skip surrogates
                append_codepoint(s, cp);
                break;
            }
            default: append_codepoint(s, static_cast<std::uint32_t>(0x1F300 + rng.below(0x300)));
        }
    }
    return s;
}

}  // namespace testing
