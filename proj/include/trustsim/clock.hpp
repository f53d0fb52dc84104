#pragma once

#include <string>

namespace trustsim {

/// Current UTC time as "2024-01-31T12:00:00.123Z".
std::string utc_now_iso8601();

}  // namespace trustsim
