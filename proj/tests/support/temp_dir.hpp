#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <string>

#include "eaeval/errors.hpp"

namespace testsupport {

// Scratch directory removed on scope exit.
struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& prefix) {
        static std::atomic<unsigned> counter{0};
        path = std::filesystem::temp_directory_path() /
               (prefix + "-" + std::to_string(::getpid()) + "-" +
                std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path);
    }

    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }

    std::filesystem::path file(const std::string& name, const std::string& content) const {
        const auto p = path / name;
        std::ofstream out(p, std::ios::binary);
        if (!out) throw eaeval::DataError("cannot write test file " + p.string());
        out << content;
        out.close();
        return p;
    }
};

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw eaeval::DataError("cannot read test file " + p.string());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace testsupport
