#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace clustreg::csv {

using Row = std::vector<std::string>;

// Splits one CSV record. Fields may be double-quoted; a doubled quote inside
// a quoted field is a literal quote. Throws FormatError on an unterminated
// quote.
Row split_line(std::string_view line);

// Reads every record of a file. Blank lines are skipped; a trailing '\r' is
// stripped. Each returned row remembers its 1-based line number.
struct Record {
    std::size_t line = 0;
    Row fields;
};
std::vector<Record> read_file(const std::string& path);

// Quotes a field when it contains a comma, quote or newline.
std::string escape(std::string_view field);

void write_row(std::ostream& out, const Row& fields);

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

// Strict decimal parse: optional sign, digits, optional fraction and
// exponent. Rejects thousands separators, empty text and trailing junk.
bool parse_double(std::string_view text, double& out);
bool parse_int(std::string_view text, long long& out);

}  // namespace clustreg::csv
