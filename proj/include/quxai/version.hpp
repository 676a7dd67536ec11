#pragma once

namespace quxai {

inline constexpr const char* kVersion = "1.0.0";

// Version tag for persisted model documents.
inline constexpr int kModelFormatVersion = 1;

} // namespace quxai
