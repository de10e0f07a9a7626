#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace topicforge {

enum class OperatorCategory { Military, Commercial, Private, Unknown };

inline constexpr std::array<OperatorCategory, 4> kAllCategories{
    OperatorCategory::Military, OperatorCategory::Commercial, OperatorCategory::Private,
    OperatorCategory::Unknown};

std::string_view to_string(OperatorCategory category);
std::optional<OperatorCategory> parse_category(std::string_view name);

struct AccidentRecord
{
    std::size_t record_id = 0;
    std::optional<std::chrono::year_month_day> date;
    std::string operator_raw;
    std::string narrative;
    OperatorCategory category = OperatorCategory::Unknown;

    bool operator==(const AccidentRecord&) const = default;
};

/// Case-insensitive substring rules. Both lists must be non-empty.
struct CategoryRules
{
    std::vector<std::string> military_keywords;
    std::vector<std::string> private_keywords;

    static CategoryRules defaults();
    /// Lowercases keywords and throws ConfigError on an empty list or keyword.
    void validate() const;
};

struct ColumnMap
{
    std::string operator_column = "Operator";
    std::string narrative_column = "Summary";
    std::string date_column = "Date";
};

/// Parses an RFC-4180 CSV with a header row. Records come back uncategorized
/// (category Unknown); see categorize_records.
///
/// Throws ConfigError when a mapped column is missing from the header and
/// ParseError (1-based row, header = row 1) on wrong field counts or broken
/// quoting. Unparseable dates are left empty.
std::vector<AccidentRecord> parse_records(std::istream& csv, const ColumnMap& columns = {});

/// Military > Private > Commercial (non-blank) > Unknown.
OperatorCategory categorize_operator(std::string_view operator_raw, const CategoryRules& rules);

void categorize_records(std::span<AccidentRecord> records, const CategoryRules& rules);

std::map<OperatorCategory, std::vector<AccidentRecord>>
partition_by_category(std::span<const AccidentRecord> records);

/// Accepts MM/DD/YYYY and YYYY-MM-DD.
std::optional<std::chrono::year_month_day> parse_date(std::string_view text);
std::string format_date(const std::chrono::year_month_day& date);

/// Writes records with a Date,Operator,Summary header using the given column names.
void write_records_csv(std::ostream& out, std::span<const AccidentRecord> records,
                       const ColumnMap& columns = {});

namespace csv {

using Row = std::vector<std::string>;

/// Reads all rows (including the header). Throws ParseError on broken quoting.
std::vector<Row> read_rows(std::istream& in);

/// Quotes a field when it contains a delimiter, quote or line break.
std::string escape(std::string_view field);
void write_row(std::ostream& out, std::span<const std::string> fields);

} // namespace csv

} // namespace topicforge
