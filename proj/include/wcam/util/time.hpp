#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace wcam {

using Timestamp = std::chrono::sys_seconds;

// "YYYY-MM-DDTHH:MM:SSZ"
std::string format_iso(Timestamp t);

// Accepts "YYYY-MM-DDTHH:MM:SS" followed by optional fractional seconds and a
// "Z" or "+HH:MM"/"-HH:MM" offset. Throws ArgumentError on anything else.
Timestamp parse_iso(std::string_view text);

// "YYYY-MM-DD" of the UTC day containing t.
std::string format_date(Timestamp t);

// "YYYYMMDDTHHMMSSZ", safe for file names.
std::string format_compact(Timestamp t);

Timestamp make_timestamp(int year, unsigned month, unsigned day, int hour = 0, int minute = 0, int second = 0);

}  // namespace wcam
