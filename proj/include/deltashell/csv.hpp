#pragma once
#include <string>
#include <vector>

namespace ds {

// 17 significant digits, "." decimal point, locale-independent
std::string csv_number(double v);

struct CsvTable {
    std::vector<std::string> metadata; // "key: value" comment lines
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

// writes "# key: value" comments (a timestamp line is appended here, so the
// body below the comments stays byte-identical across reruns), then the
// header row, then the data rows
void write_csv(const std::string& path, const CsvTable& t);

// FNV-1a of the raw config text, printed as hex; ties outputs to their input
std::string content_hash(const std::string& text);

} // namespace ds
