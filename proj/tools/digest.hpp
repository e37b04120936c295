#pragma once

#include <string>

namespace tgcli {

/// Lower-case hex SHA-256 of the bytes of `data`.
std::string sha256_hex(const std::string& data);

}  // namespace tgcli
