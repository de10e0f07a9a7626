#include "topicforge/ingest.hpp"

#include "topicforge/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <iterator>

namespace topicforge {

namespace {

std::string lowercase(std::string_view text)
{
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
        return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c);
    });
    return out;
}

bool is_blank(std::string_view text)
{
    return std::all_of(text.begin(), text.end(), [](unsigned char c) {
        return c == ' ' || c == '\t' || c == '\r' || c == '\n';
    });
}

bool contains_any(const std::string& haystack, const std::vector<std::string>& needles)
{
    return std::any_of(needles.begin(), needles.end(), [&](const std::string& needle) {
        return haystack.find(lowercase(needle)) != std::string::npos;
    });
}

std::optional<int> parse_int(std::string_view text)
{
    int value = 0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end || text.empty()) {
        return std::nullopt;
    }
    return value;
}

std::size_t find_column(const csv::Row& header, const std::string& name)
{
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
        throw ConfigError("column '" + name + "' not found in CSV header");
    }
    return static_cast<std::size_t>(std::distance(header.begin(), it));
}

} // namespace

std::string_view to_string(OperatorCategory category)
{
    switch (category) {
    case OperatorCategory::Military:
        return "military";
    case OperatorCategory::Commercial:
        return "commercial";
    case OperatorCategory::Private:
        return "private";
    case OperatorCategory::Unknown:
        break;
    }
    return "unknown";
}

std::optional<OperatorCategory> parse_category(std::string_view name)
{
    const std::string lower = lowercase(name);
    for (auto c : kAllCategories) {
        if (lower == to_string(c)) {
            return c;
        }
    }
    return std::nullopt;
}

CategoryRules CategoryRules::defaults()
{
    return {{"military", "air force", "navy", "army", "marine", "royal air"}, {"private"}};
}

void CategoryRules::validate() const
{
    auto check = [](const std::vector<std::string>& list, const char* which) {
        if (list.empty()) {
            throw ConfigError(std::string(which) + " keyword list is empty");
        }
        for (const auto& k : list) {
            if (k.empty() || is_blank(k)) {
                throw ConfigError(std::string(which) + " keyword list contains a blank entry");
            }
        }
    };
    check(military_keywords, "military");
    check(private_keywords, "private");
}

OperatorCategory categorize_operator(std::string_view operator_raw, const CategoryRules& rules)
{
    const std::string text = lowercase(operator_raw);
    if (contains_any(text, rules.military_keywords)) {
        return OperatorCategory::Military;
    }
    if (contains_any(text, rules.private_keywords)) {
        return OperatorCategory::Private;
    }
    if (!is_blank(text)) {
        return OperatorCategory::Commercial;
    }
    return OperatorCategory::Unknown;
}

void categorize_records(std::span<AccidentRecord> records, const CategoryRules& rules)
{
    for (auto& r : records) {
        r.category = categorize_operator(r.operator_raw, rules);
    }
}

std::map<OperatorCategory, std::vector<AccidentRecord>>
partition_by_category(std::span<const AccidentRecord> records)
{
    std::map<OperatorCategory, std::vector<AccidentRecord>> buckets;
    for (auto c : kAllCategories) {
        buckets[c];
    }
    for (const auto& r : records) {
        buckets[r.category].push_back(r);
    }
    return buckets;
}

std::optional<std::chrono::year_month_day> parse_date(std::string_view text)
{
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) {
        text.remove_prefix(1);
    }
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) {
        text.remove_suffix(1);
    }
    // Socrata exports sometimes append a time ("09/17/1908 12:00:00 AM").
    if (auto space = text.find(' '); space != std::string_view::npos) {
        text = text.substr(0, space);
    }

    std::optional<int> y, m, d;
    if (text.size() == 10 && text[2] == '/' && text[5] == '/') {
        m = parse_int(text.substr(0, 2));
        d = parse_int(text.substr(3, 2));
        y = parse_int(text.substr(6, 4));
    } else if (text.size() == 10 && text[4] == '-' && text[7] == '-') {
        y = parse_int(text.substr(0, 4));
        m = parse_int(text.substr(5, 2));
        d = parse_int(text.substr(8, 2));
    }
    if (!y || !m || !d || *m < 1 || *d < 1) {
        return std::nullopt;
    }
    std::chrono::year_month_day date{std::chrono::year{*y},
                                     std::chrono::month{static_cast<unsigned>(*m)},
                                     std::chrono::day{static_cast<unsigned>(*d)}};
    if (!date.ok()) {
        return std::nullopt;
    }
    return date;
}

std::string format_date(const std::chrono::year_month_day& date)
{
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%02u/%02u/%04d", static_cast<unsigned>(date.month()),
                  static_cast<unsigned>(date.day()), static_cast<int>(date.year()));
    return buf;
}

std::vector<AccidentRecord> parse_records(std::istream& in, const ColumnMap& columns)
{
    auto rows = csv::read_rows(in);
    if (rows.empty()) {
        throw ParseError(1, "missing header row");
    }
    const csv::Row& header = rows.front();
    const std::size_t op_col = find_column(header, columns.operator_column);
    const std::size_t text_col = find_column(header, columns.narrative_column);
    const std::size_t date_col = find_column(header, columns.date_column);

    std::vector<AccidentRecord> records;
    records.reserve(rows.size() - 1);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (row.size() != header.size()) {
            throw ParseError(i + 1, "expected " + std::to_string(header.size()) +
                                        " fields, found " + std::to_string(row.size()));
        }
        AccidentRecord r;
        r.record_id = i - 1;
        r.date = parse_date(row[date_col]);
        r.operator_raw = row[op_col];
        r.narrative = row[text_col];
        records.push_back(std::move(r));
    }
    return records;
}

void write_records_csv(std::ostream& out, std::span<const AccidentRecord> records,
                       const ColumnMap& columns)
{
    const std::vector<std::string> header{columns.date_column, columns.operator_column,
                                          columns.narrative_column};
    csv::write_row(out, header);
    for (const auto& r : records) {
        const std::vector<std::string> row{r.date ? format_date(*r.date) : std::string{},
                                           r.operator_raw, r.narrative};
        csv::write_row(out, row);
    }
}

namespace csv {

std::vector<Row> read_rows(std::istream& in)
{
    std::string data{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    if (data.starts_with("\xEF\xBB\xBF")) {
        data.erase(0, 3);
    }

    std::vector<Row> rows;
    Row row;
    std::string field;
    std::size_t row_number = 1;
    std::size_t i = 0;
    const std::size_t n = data.size();

    auto end_row = [&] {
        row.push_back(std::move(field));
        field.clear();
        rows.push_back(std::move(row));
        row.clear();
        ++row_number;
    };

    while (i < n) {
        // Start of a field.
        if (data[i] == '"') {
            ++i;
            bool closed = false;
            while (i < n) {
                if (data[i] == '"') {
                    if (i + 1 < n && data[i + 1] == '"') {
                        field.push_back('"');
                        i += 2;
                        continue;
                    }
                    ++i;
                    closed = true;
                    break;
                }
                field.push_back(data[i++]);
            }
            if (!closed) {
                throw ParseError(row_number, "unterminated quoted field");
            }
            if (i < n && data[i] != ',' && data[i] != '\n' && data[i] != '\r') {
                throw ParseError(row_number, "unexpected character after closing quote");
            }
        } else {
            while (i < n && data[i] != ',' && data[i] != '\n' && data[i] != '\r') {
                if (data[i] == '"') {
                    throw ParseError(row_number, "quote inside unquoted field");
                }
                field.push_back(data[i++]);
            }
        }

        if (i >= n) {
            end_row();
            break;
        }
        if (data[i] == ',') {
            row.push_back(std::move(field));
            field.clear();
            ++i;
            if (i == n) {
                // Trailing comma on the last line: one more empty field.
                end_row();
            }
            continue;
        }
        // Line break, CRLF or LF.
        if (data[i] == '\r') {
            ++i;
            if (i < n && data[i] == '\n') {
                ++i;
            }
        } else {
            ++i;
        }
        end_row();
        // Skip blank lines.
        while (i < n && (data[i] == '\n' || data[i] == '\r')) {
            ++i;
        }
    }
    return rows;
}

std::string escape(std::string_view field)
{
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
        return std::string(field);
    }
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') {
            out += "\"\"";
        } else {
            out += c;
        }
    }
    out += '"';
    return out;
}

void write_row(std::ostream& out, std::span<const std::string> fields)
{
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) {
            out << ',';
        }
        out << escape(fields[i]);
    }
    out << '\n';
}

} // namespace csv

} // namespace topicforge
