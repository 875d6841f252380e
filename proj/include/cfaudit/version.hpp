#pragma once

namespace cfaudit {

inline constexpr const char* kToolkitVersion = "0.1.0";
inline constexpr const char* kReportSchemaVersion = "1";
inline constexpr const char* kCohortSchemaVersion = "1";

}  // namespace cfaudit
