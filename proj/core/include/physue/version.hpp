#pragma once

namespace physue {

inline constexpr const char* kToolName = "physue";
inline constexpr const char* kVersion = "0.1.0";

/// Identifies the random-number pipeline (generator plus normal transform).
/// Runs are only comparable byte for byte when this id matches.
inline constexpr const char* kRngId = "mt19937_64+icdf-as241";

}  // namespace physue
