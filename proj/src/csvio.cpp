#include "icd/csvio.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace icd {

std::string fmt_g(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

CsvWriter::CsvWriter(const std::string& path) : path_(path) {
    auto* os = new std::ofstream(path, std::ios::binary | std::ios::trunc);
    if (!*os) {
        delete os;
        throw std::runtime_error("csv: cannot open " + path + " for writing");
    }
    os_ = os;
}

CsvWriter::~CsvWriter() {
    try {
        close();
    } catch (...) {
        // destructor must not throw; explicit close() reports failures
    }
}

void CsvWriter::header(const std::vector<std::string>& names) {
    if (width_ != 0) throw std::logic_error("csv: header written twice");
    width_ = names.size();
    row(names);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    if (!os_) throw std::logic_error("csv: writer already closed");
    if (width_ == 0) width_ = cells.size();
    if (cells.size() != width_)
        throw std::invalid_argument("csv: row width " + std::to_string(cells.size()) +
                                    " does not match header width " + std::to_string(width_));
    auto& os = *static_cast<std::ofstream*>(os_);
    for (size_t i = 0; i < cells.size(); ++i) {
        if (i) os << ',';
        os << cells[i];
    }
    os << '\n';
}

void CsvWriter::close() {
    if (!os_) return;
    auto* os = static_cast<std::ofstream*>(os_);
    os->flush();
    const bool ok = static_cast<bool>(*os);
    delete os;
    os_ = nullptr;
    if (!ok) throw std::runtime_error("csv: write failed for " + path_);
}

int CsvTable::column(const std::string& name) const {
    for (size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

double CsvTable::num(size_t row, int col) const {
    if (row >= rows.size() || col < 0 || static_cast<size_t>(col) >= rows[row].size())
        throw std::out_of_range("csv: cell out of range");
    const std::string& s = rows[row][col];
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size())
        throw std::invalid_argument("csv: cell '" + s + "' is not a number");
    return v;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("csv: cannot open " + path);
    CsvTable t;
    std::string line;
    bool first = true;
    size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (line.back() == ',') cells.push_back("");
        if (first) {
            t.header = std::move(cells);
            first = false;
        } else {
            if (cells.size() != t.header.size())
                throw std::runtime_error("csv: " + path + ":" + std::to_string(lineno) +
                                         ": expected " + std::to_string(t.header.size()) +
                                         " cells, got " + std::to_string(cells.size()));
            t.rows.push_back(std::move(cells));
        }
    }
    if (first) throw std::runtime_error("csv: " + path + " is empty");
    return t;
}

}  // namespace icd
