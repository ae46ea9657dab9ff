#pragma once

#include <filesystem>
#include <optional>
#include <random>
#include <string>

#include "plidar/error.hpp"

namespace testing {

// Code of the plidar::Error thrown by f, or nullopt when nothing was thrown.
template <class F>
std::optional<plidar::ErrorCode> error_of(F&& f) {
  try {
    f();
  } catch (const plidar::Error& e) {
    return e.code();
  }
  return std::nullopt;
}

inline std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("plidar_test_" + name + "_" + std::to_string(std::random_device{}()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing
