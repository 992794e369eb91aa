#ifndef SOILCN_CSV_HPP
#define SOILCN_CSV_HPP

#include <string>
#include <vector>

namespace soilcn {

// Minimal CSV table: header row plus string cells. Numeric cells are written
// with format_double so files are byte-stable.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const;  // -1 when absent
    void add_row(std::vector<std::string> cells);
};

std::string to_csv(const CsvTable& t);
CsvTable from_csv(const std::string& text);

CsvTable read_csv_file(const std::string& path);
void write_csv_file(const std::string& path, const CsvTable& t);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace soilcn

#endif
