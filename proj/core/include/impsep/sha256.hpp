#pragma once

#include <string>
#include <string_view>

namespace impsep {

// Hex digest of the exact byte content. Matches the output of sha256sum.
std::string sha256_hex(std::string_view bytes);

}  // namespace impsep
