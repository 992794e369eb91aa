#include "soilcn/csv.hpp"

#include <fstream>
#include <sstream>

#include "soilcn/common.hpp"

namespace soilcn {

int CsvTable::column(const std::string& name) const {
    for (size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

void CsvTable::add_row(std::vector<std::string> cells) {
    rows.push_back(std::move(cells));
}

static void append_cell(std::string& out, const std::string& cell) {
    bool quote = cell.find_first_of(",\"\n") != std::string::npos;
    if (!quote) {
        out += cell;
        return;
    }
    out += '"';
    for (char c : cell) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
}

std::string to_csv(const CsvTable& t) {
    std::string out;
    for (size_t i = 0; i < t.header.size(); ++i) {
        if (i) out += ',';
        append_cell(out, t.header[i]);
    }
    out += '\n';
    for (const auto& row : t.rows) {
        for (size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            append_cell(out, row[i]);
        }
        out += '\n';
    }
    return out;
}

CsvTable from_csv(const std::string& text) {
    CsvTable t;
    std::vector<std::string> cells;
    std::string cur;
    bool in_quote = false, row_has_content = false, first_row = true;

    auto end_cell = [&] {
        cells.push_back(std::move(cur));
        cur.clear();
    };
    auto end_row = [&] {
        end_cell();
        if (first_row) {
            t.header = std::move(cells);
            first_row = false;
        } else {
            t.rows.push_back(std::move(cells));
        }
        cells.clear();
        row_has_content = false;
    };

    for (size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (in_quote) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    in_quote = false;
                }
            } else {
                cur += c;
            }
            row_has_content = true;
        } else if (c == '"') {
            in_quote = true;
            row_has_content = true;
        } else if (c == ',') {
            end_cell();
            row_has_content = true;
        } else if (c == '\n') {
            if (row_has_content || !cur.empty() || !cells.empty()) end_row();
        } else if (c != '\r') {
            cur += c;
            row_has_content = true;
        }
    }
    if (row_has_content || !cur.empty() || !cells.empty()) end_row();
    return t;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write file: " + path);
    out << text;
}

CsvTable read_csv_file(const std::string& path) {
    return from_csv(read_text_file(path));
}

void write_csv_file(const std::string& path, const CsvTable& t) {
    write_text_file(path, to_csv(t));
}

}  // namespace soilcn
