#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>

#include "deltashell/csv.hpp"
#include "deltashell/errors.hpp"

namespace ds {

std::string csv_number(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string content_hash(const std::string& text)
{
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_csv(const std::string& path, const CsvTable& t)
{
    std::ofstream out(path);
    if (!out) throw config_error("cannot open output file: " + path);
    for (const std::string& m : t.metadata) out << "# " << m << "\n";
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    out << "# timestamp: "
        << std::chrono::duration_cast<std::chrono::seconds>(now).count() << "\n";
    for (size_t i = 0; i < t.header.size(); ++i)
        out << t.header[i] << (i + 1 < t.header.size() ? "," : "");
    out << "\n";
    for (const auto& row : t.rows) {
        for (size_t i = 0; i < row.size(); ++i)
            out << row[i] << (i + 1 < row.size() ? "," : "");
        out << "\n";
    }
    if (!out) throw config_error("write failed: " + path);
}

} // namespace ds
