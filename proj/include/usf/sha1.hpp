#pragma once

#include <string>

namespace usf {

/// SHA-1 hex digest of a byte string.
std::string sha1_hex(const std::string& data);

/// Git-style blob hash: sha1("blob <size>\0" + content).
std::string git_blob_sha1(const std::string& content);

}  // namespace usf
