#pragma once

#include <filesystem>
#include <string>

#include "stratadoe/errors.hpp"

namespace stratadoe {

// Whole-file text helpers; both throw IoError with the path in the message.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace stratadoe
