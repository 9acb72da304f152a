#pragma once

#include <string>
#include <vector>

namespace aimtrace {

// Minimal CSV support for the pipeline's own file contracts: comma
// separated, newline terminated, no quoting (none of our fields contain
// commas). Blank lines and lines starting with '#' are skipped.
struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    // Index of a named column; throws Error(Format) naming the file when
    // the column is absent.
    size_t col(const std::string& name, const std::string& context) const;
};

CsvTable read_csv_file(const std::string& path);
CsvTable parse_csv(const std::string& text, const std::string& context);

}  // namespace aimtrace
