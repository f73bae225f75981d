#include "kcut/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace kcut {

ParseError::ParseError(const std::string& path, int line, const std::string& what)
    : ParameterError(path + ":" + std::to_string(line) + ": " + what), line_(line) {}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParameterError("cannot open '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ParameterError("cannot write '" + path + "'");
    os << text;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',' || c == ' ' || c == '\t' || c == ';') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

bool parse_double(const std::string& s, double& v) {
    try {
        size_t used = 0;
        v = std::stod(s, &used);
        return used == s.size();
    } catch (const std::exception&) {
        return false;
    }
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

Table read_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParameterError("cannot open '" + path + "'");
    Table t;
    std::string line;
    int lineno = 0;
    size_t width = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line[0] == '#') continue;
        auto f = split_fields(line);
        if (f.empty()) continue;
        std::vector<double> row(f.size());
        bool numeric = true;
        for (size_t i = 0; i < f.size() && numeric; ++i) numeric = parse_double(f[i], row[i]);
        if (!numeric) {
            if (t.rows.empty() && t.header.empty()) {
                t.header = f;
                continue;
            }
            throw ParseError(path, lineno, "non-numeric field");
        }
        for (double v : row)
            if (!std::isfinite(v)) throw ParseError(path, lineno, "non-finite value");
        if (width == 0) width = row.size();
        else if (row.size() != width)
            throw ParseError(path, lineno,
                             "expected " + std::to_string(width) + " fields, found " + std::to_string(row.size()));
        t.rows.push_back(std::move(row));
    }
    if (t.rows.empty()) throw ParseError(path, lineno, "no data rows");
    return t;
}

Mat to_matrix(const Table& t) {
    Mat m(t.rows.size(), t.rows[0].size());
    for (size_t i = 0; i < t.rows.size(); ++i)
        for (size_t j = 0; j < t.rows[i].size(); ++j) m(i, j) = t.rows[i][j];
    return m;
}

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

}  // namespace

Mat read_csv_matrix(const std::string& path) { return to_matrix(read_table(path)); }

void write_csv_matrix(const std::string& path, const Mat& m, const std::vector<std::string>& header) {
    std::ostringstream os;
    for (size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    if (!header.empty()) os << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? "," : "") << fmt(m(i, j));
        os << '\n';
    }
    write_text(path, os.str());
}

std::vector<int> read_labels_csv(const std::string& path) {
    Table t = read_table(path);
    std::vector<int> out;
    out.reserve(t.rows.size());
    for (size_t i = 0; i < t.rows.size(); ++i) {
        double v = t.rows[i][0];
        if (v != std::floor(v)) throw ParseError(path, static_cast<int>(i + 1 + !t.header.empty()), "label is not an integer");
        out.push_back(static_cast<int>(v));
    }
    return out;
}

void write_labels_csv(const std::string& path, const std::vector<int>& labels) {
    std::ostringstream os;
    os << "label\n";
    for (int l : labels) os << l << '\n';
    write_text(path, os.str());
}

Affinity read_affinity(const std::string& path) {
    Table t = read_table(path);
    const size_t rows = t.rows.size(), cols = t.rows[0].size();
    std::string h;
    for (auto& s : t.header) h += s + ",";
    const bool triplets = h == "p,q,w," || (cols == 3 && rows != 3);
    if (!triplets) {
        if (rows != cols) throw ParseError(path, static_cast<int>(rows), "dense affinity must be square");
        Mat A = to_matrix(t);
        if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, A.cwiseAbs().maxCoeff()))
            throw ParameterError("affinity in '" + path + "' is not symmetric");
        return Affinity::dense(0.5 * (A + A.transpose()));
    }
    int n = 0;
    std::vector<Eigen::Triplet<double>> trip;
    for (size_t i = 0; i < rows; ++i) {
        const auto& r = t.rows[i];
        if (r[0] < 0 || r[1] < 0 || r[0] != std::floor(r[0]) || r[1] != std::floor(r[1]))
            throw ParseError(path, static_cast<int>(i + 2), "triplet indices must be nonnegative integers");
        n = std::max({n, static_cast<int>(r[0]) + 1, static_cast<int>(r[1]) + 1});
        trip.emplace_back(static_cast<int>(r[0]), static_cast<int>(r[1]), r[2]);
    }
    SpMat A(n, n);
    A.setFromTriplets(trip.begin(), trip.end());
    SpMat At = A.transpose();
    if ((A - At).norm() > 1e-9 * std::max(1.0, A.norm()))
        throw ParameterError("affinity in '" + path + "' is not symmetric");
    return Affinity::sparse(A);
}

namespace {

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#17becf", "#8c564b", "#7f7f7f"};

std::string esc(const std::string& s) {
    std::string o;
    for (char c : s) {
        if (c == '<') o += "&lt;";
        else if (c == '>') o += "&gt;";
        else if (c == '&') o += "&amp;";
        else o += c;
    }
    return o;
}

}  // namespace

std::string svg_scatter(const Mat& points, const std::vector<int>& labels, const std::string& title) {
    if (points.cols() < 2 || points.rows() != static_cast<Eigen::Index>(labels.size()))
        throw DimensionError("scatter needs n x 2 points and n labels");
    const double W = 480, H = 480, pad = 30;
    double x0 = points.col(0).minCoeff(), x1 = points.col(0).maxCoeff();
    double y0 = points.col(1).minCoeff(), y1 = points.col(1).maxCoeff();
    double s = std::max({x1 - x0, y1 - y0, 1e-12});
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!title.empty()) os << "<text x=\"" << pad << "\" y=\"20\" font-size=\"14\">" << esc(title) << "</text>\n";
    for (Eigen::Index p = 0; p < points.rows(); ++p) {
        double x = pad + (points(p, 0) - x0) / s * (W - 2 * pad);
        double y = H - pad - (points(p, 1) - y0) / s * (H - 2 * pad);
        os << "<circle cx=\"" << x << "\" cy=\"" << y << "\" r=\"2.5\" fill=\"" << kColors[labels[p] % 8] << "\"/>\n";
    }
    os << "</svg>\n";
    return os.str();
}

std::string svg_lines(const Series& series, const std::string& title, const std::string& xlabel,
                      const std::string& ylabel) {
    const double W = 640, H = 400, pad = 50;
    double lo = INFINITY, hi = -INFINITY;
    size_t len = 1;
    for (auto& [name, v] : series)
        for (double x : v)
            if (std::isfinite(x)) {
                lo = std::min(lo, x);
                hi = std::max(hi, x);
                len = std::max(len, v.size());
            }
    if (!(hi >= lo)) lo = 0, hi = 1;
    if (hi == lo) hi = lo + 1;
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<line x1=\"" << pad << "\" y1=\"" << H - pad << "\" x2=\"" << W - pad << "\" y2=\"" << H - pad
       << "\" stroke=\"black\"/>\n<line x1=\"" << pad << "\" y1=\"" << pad << "\" x2=\"" << pad << "\" y2=\""
       << H - pad << "\" stroke=\"black\"/>\n";
    if (!title.empty()) os << "<text x=\"" << pad << "\" y=\"24\" font-size=\"14\">" << esc(title) << "</text>\n";
    if (!xlabel.empty())
        os << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" font-size=\"12\">" << esc(xlabel) << "</text>\n";
    if (!ylabel.empty()) os << "<text x=\"4\" y=\"" << pad - 8 << "\" font-size=\"12\">" << esc(ylabel) << "</text>\n";
    os << "<text x=\"4\" y=\"" << H - pad << "\" font-size=\"10\">" << fmt(lo) << "</text>\n";
    os << "<text x=\"4\" y=\"" << pad + 10 << "\" font-size=\"10\">" << fmt(hi) << "</text>\n";
    int idx = 0;
    for (auto& [name, v] : series) {
        const char* col = kColors[idx % 8];
        os << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"";
        for (size_t i = 0; i < v.size(); ++i) {
            if (!std::isfinite(v[i])) continue;
            double x = pad + (len > 1 ? static_cast<double>(i) / (len - 1) : 0.0) * (W - 2 * pad);
            double y = H - pad - (v[i] - lo) / (hi - lo) * (H - 2 * pad);
            os << x << ',' << y << ' ';
        }
        os << "\"/>\n<text x=\"" << W - pad - 140 << "\" y=\"" << pad + 16 * idx << "\" font-size=\"11\" fill=\""
           << col << "\">" << esc(name) << "</text>\n";
        ++idx;
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace kcut
