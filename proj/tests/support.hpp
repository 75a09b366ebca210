#pragma once

#include <atomic>
#include <filesystem>
#include <string>

#include <unistd.h>

namespace tangle::testsupport {

inline std::string source_path(const std::string& rel) { return std::string(TANGLE_SOURCE_DIR) + "/" + rel; }

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir()
    {
        static std::atomic<int> serial{0};
        path_ = std::filesystem::temp_directory_path()
              / ("tangle-test-" + std::to_string(::getpid()) + "-" + std::to_string(serial++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

} // namespace tangle::testsupport
