#include "phasesim/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "phasesim/errors.hpp"

namespace phasesim {

std::string format_double(double x) {
    char buf[40];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    if (ec != std::errc{}) {
        throw NumericalError("failed to format a double");
    }
    return std::string(buf, ptr);
}

namespace {

std::string format_integer(double x) {
    const long long v = std::llround(x);
    char buf[24];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) {
        throw NumericalError("failed to format an integer");
    }
    return std::string(buf, ptr);
}

}  // namespace

CsvTable::CsvTable(std::vector<std::string> columns)
    : columns_(std::move(columns)), integer_(columns_.size(), false) {
    if (columns_.empty()) {
        throw ValidationError("csv table needs at least one column");
    }
}

void CsvTable::mark_integer(std::string_view column) {
    integer_[column_index(column)] = true;
}

void CsvTable::add_row(const std::vector<double>& values) {
    if (values.size() != columns_.size()) {
        throw ValidationError("row has " + std::to_string(values.size()) +
                              " values, table has " + std::to_string(columns_.size()) +
                              " columns");
    }
    rows_.push_back(values);
}

size_t CsvTable::column_index(std::string_view column) const {
    for (size_t i = 0; i < columns_.size(); ++i) {
        if (columns_[i] == column) return i;
    }
    throw ValidationError("no column named '" + std::string(column) + "'");
}

bool CsvTable::has_column(std::string_view column) const {
    for (const auto& name : columns_) {
        if (name == column) return true;
    }
    return false;
}

std::string CsvTable::to_string() const {
    std::string out;
    for (size_t i = 0; i < columns_.size(); ++i) {
        if (i > 0) out += ',';
        out += columns_[i];
    }
    out += '\n';
    for (const auto& row : rows_) {
        for (size_t i = 0; i < row.size(); ++i) {
            if (i > 0) out += ',';
            out += integer_[i] ? format_integer(row[i]) : format_double(row[i]);
        }
        out += '\n';
    }
    return out;
}

void CsvTable::write(const std::filesystem::path& path) const {
    write_text_file(path, to_string());
}

void write_density_csv(const GridDensity& d, const std::filesystem::path& path) {
    const GridSpec& g = d.spec();
    std::string out;
    out.reserve(static_cast<size_t>(g.nq) * g.np * 12);
    out += "# q_min=" + format_double(g.q_min) + " q_max=" + format_double(g.q_max) + "\n";
    out += "# p_min=" + format_double(g.p_min) + " p_max=" + format_double(g.p_max) + "\n";
    out += "# nq=" + std::to_string(g.nq) + " np=" + std::to_string(g.np) + "\n";
    out += "# layout=rows:q cols:p\n";
    for (int i = 0; i < g.nq; ++i) {
        for (int j = 0; j < g.np; ++j) {
            if (j > 0) out += ',';
            out += format_double(d.value(i, j));
        }
        out += '\n';
    }
    write_text_file(path, out);
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream stream(path, std::ios::binary | std::ios::trunc);
    if (!stream) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    stream.write(content.data(), static_cast<std::streamsize>(content.size()));
    stream.flush();
    if (!stream) {
        throw IoError("failed while writing " + path.string());
    }
}

}  // namespace phasesim
