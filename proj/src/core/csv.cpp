#include "csv.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "error.h"
#include "strfmt.h"

namespace aimtrace {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) out.push_back(trim(field));
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

}  // namespace

size_t CsvTable::col(const std::string& name, const std::string& context) const {
    auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end())
        fail(ErrorKind::Format, strfmt("%s: missing column '%s'", context.c_str(), name.c_str()));
    return size_t(it - columns.begin());
}

CsvTable parse_csv(const std::string& text, const std::string& context) {
    CsvTable table;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto fields = split_fields(t);
        if (table.columns.empty()) {
            table.columns = std::move(fields);
            continue;
        }
        if (fields.size() != table.columns.size())
            fail(ErrorKind::Format,
                 strfmt("%s: row %zu has %zu fields, header has %zu", context.c_str(),
                        table.rows.size() + 1, fields.size(), table.columns.size()));
        table.rows.push_back(std::move(fields));
    }
    if (table.columns.empty())
        fail(ErrorKind::Format, strfmt("%s: empty csv", context.c_str()));
    return table;
}

CsvTable read_csv_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, strfmt("cannot open '%s' for reading", path.c_str()));
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str(), path);
}

}  // namespace aimtrace
