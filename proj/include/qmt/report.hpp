#pragma once

#include <string>
#include <vector>

namespace qmt {

// One verification record: which suite ran, which check, the stable anchor
// of that check, and the measured residual against its tolerance.
struct CheckRecord {
    std::string suite;
    std::string check;
    std::string anchor;
    double residual = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

// Plain decimal or scientific rendering with 17 significant digits, enough
// to round-trip an IEEE double exactly.
std::string format_number(double x);

// One JSON object per line, fixed key order, no trailing newline variance:
// every call on equal records yields byte-identical text.
std::string render_report_json(const std::vector<CheckRecord>& records);

// Header row plus one line per record, same columns as the JSON objects.
std::string render_report_csv(const std::vector<CheckRecord>& records);

// Inverse of render_report_json; throws std::invalid_argument on malformed
// input.
std::vector<CheckRecord> parse_report_json(const std::string& text);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

} // namespace qmt
