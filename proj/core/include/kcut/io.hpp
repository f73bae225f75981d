#pragma once

#include "kcut/affinity.hpp"

#include <utility>

namespace kcut {

// Malformed input file; the message carries path and line number.
class ParseError : public ParameterError {
public:
    ParseError(const std::string& path, int line, const std::string& what);
    int line() const { return line_; }

private:
    int line_;
};

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);

// Comma/whitespace separated numbers; a leading non-numeric line is a header.
Mat read_csv_matrix(const std::string& path);
void write_csv_matrix(const std::string& path, const Mat& m, const std::vector<std::string>& header = {});

// One integer label per line (first column); header allowed.
std::vector<int> read_labels_csv(const std::string& path);
void write_labels_csv(const std::string& path, const std::vector<int>& labels);

// Square dense matrix, or "p,q,w" triplets (0-based) when the header says so
// or every row has three columns and the matrix is not square.
Affinity read_affinity(const std::string& path);

using Series = std::vector<std::pair<std::string, std::vector<double>>>;

std::string svg_scatter(const Mat& points, const std::vector<int>& labels, const std::string& title = "");
std::string svg_lines(const Series& series, const std::string& title = "", const std::string& xlabel = "",
                      const std::string& ylabel = "");

}  // namespace kcut
