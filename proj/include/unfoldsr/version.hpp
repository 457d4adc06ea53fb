#pragma once

namespace unfoldsr {

inline constexpr const char* kVersion = "1.0.0";

// On-disk format revisions, embedded in `--version` output so reports can be
// traced back to the exact file layouts that produced them.
inline constexpr int kKernelFormatVersion = 1;   // "KRN1"
inline constexpr int kWeightFormatVersion = 1;   // "UWT1"

}  // namespace unfoldsr
