#pragma once

#include <snipscan/text.hpp>

#include <atomic>
#include <chrono>
#include <filesystem>
#include <string>

namespace snipscan::testing {

inline std::filesystem::path data_path(const std::string& name) {
    return std::filesystem::path(SNIPSCAN_TEST_DATA) / name;
}

inline std::string read_data(const std::string& name) { return text::read_file(data_path(name)); }

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
        path_ = std::filesystem::temp_directory_path() /
                ("snipscan-test-" + std::to_string(stamp) + "-" + std::to_string(counter++));
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

} // namespace snipscan::testing
