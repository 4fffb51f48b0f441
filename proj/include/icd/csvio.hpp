// Deterministic CSV reading/writing: LF line endings, fixed %.12g number
// formatting, so identical data produces identical bytes.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace icd {

std::string fmt_g(double v);  // shortest round-trippable-ish %.12g form

class CsvWriter {
  public:
    explicit CsvWriter(const std::string& path);
    ~CsvWriter();
    CsvWriter(const CsvWriter&) = delete;
    CsvWriter& operator=(const CsvWriter&) = delete;

    void header(const std::vector<std::string>& names);
    void row(const std::vector<std::string>& cells);
    void close();  // throws on flush failure; also called by the destructor

  private:
    std::string path_;
    void* os_ = nullptr;  // std::ofstream, kept out of the header
    size_t width_ = 0;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const;  // -1 when absent
    double num(size_t row, int col) const;
};

CsvTable read_csv(const std::string& path);

}  // namespace icd
