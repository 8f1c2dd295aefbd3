#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace entstats {

using EntityId = std::int64_t;

// Data or configuration problem. The CLI maps these to exit code 2.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// 12 significant digits; the one formatting path for all TSV outputs.
std::string format_g12(double v);

// Round-trip precision, used for the weights file.
std::string format_g17(double v);

} // namespace entstats
