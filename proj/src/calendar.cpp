#include "gppx/errors.hpp"
#include "gppx/grid.hpp"

#include <fmt/format.h>

namespace gppx {

int days_in_month(int calendar_month) {
    if (calendar_month < 1 || calendar_month > 12) {
        throw ConfigError(fmt::format("calendar month {} outside 1..12", calendar_month));
    }
    return kDaysInMonth[static_cast<std::size_t>(calendar_month - 1)];
}

double seconds_in_month(int calendar_month) { return days_in_month(calendar_month) * kSecondsPerDay; }

MonthStamp Calendar::at(std::size_t index) const {
    const long total = static_cast<long>(start_month - 1) + static_cast<long>(index);
    return {start_year + static_cast<int>(total / 12), static_cast<int>(total % 12) + 1};
}

long Calendar::index_of(int year, int month) const {
    return (static_cast<long>(year) - start_year) * 12 + (month - start_month);
}

std::string Period::label() const {
    // U+2013 EN DASH, as in printed period ranges.
    if (start_year / 100 == end_year / 100) {
        return fmt::format("{}–{:02}", start_year, end_year % 100);
    }
    return fmt::format("{}–{}", start_year, end_year);
}

std::string Period::slug() const { return fmt::format("{}-{}", start_year, end_year); }

}  // namespace gppx
