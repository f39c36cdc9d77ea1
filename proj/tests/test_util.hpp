#pragma once

#include <atomic>
#include <filesystem>
#include <string>

#include <unistd.h>

// Per-test scratch directory, removed on destruction.
struct TempDir {
    std::filesystem::path path;

    TempDir() {
        static std::atomic<int> counter{0};
        path = std::filesystem::temp_directory_path() /
               ("wb_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::string str() const { return path.string(); }
    std::string sub(const std::string& rel) const { return (path / rel).string(); }
};

inline std::string src_dir() { return WB_SOURCE_DIR; }
inline std::string cli_path() { return WB_CLI_PATH; }
