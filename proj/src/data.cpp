#include "tda/data.hpp"

#include "tda/error.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace tda {

CaseControlData::CaseControlData(Eigen::MatrixXd v, std::vector<int> d, std::vector<std::string> names)
    : values(std::move(v)), disease(std::move(d)), marker_names(std::move(names)) {
    observed = values.array().isNaN() == false;
    if (marker_names.empty()) {
        for (int j = 0; j < values.cols(); ++j) marker_names.push_back("Y" + std::to_string(j + 1));
    }
}

Eigen::Index CaseControlData::count(int d) const {
    Eigen::Index n = 0;
    for (int x : disease) n += (x == d);
    return n;
}

void CaseControlData::validate() const {
    if (static_cast<Eigen::Index>(disease.size()) != values.rows() || observed.rows() != values.rows() ||
        observed.cols() != values.cols())
        throw ParseError("data: inconsistent dimensions");
    if (static_cast<int>(marker_names.size()) != values.cols()) throw ParseError("data: marker name count mismatch");
    for (int d : disease)
        if (d != 0 && d != 1) throw ParseError("data: disease labels must be 0 or 1");
    if (count(0) < 1 || count(1) < 1) throw InsufficientData("data: both classes need at least one row");
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        if (!observed.row(i).any()) throw ParseError("data: row " + std::to_string(i + 1) + " has no observed marker");
    }
}

CaseControlData CaseControlData::rows(const std::vector<Eigen::Index>& idx) const {
    CaseControlData out;
    out.values.resize(static_cast<Eigen::Index>(idx.size()), values.cols());
    out.observed.resize(static_cast<Eigen::Index>(idx.size()), values.cols());
    out.disease.reserve(idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r) {
        out.values.row(static_cast<Eigen::Index>(r)) = values.row(idx[r]);
        out.observed.row(static_cast<Eigen::Index>(r)) = observed.row(idx[r]);
        out.disease.push_back(disease[static_cast<std::size_t>(idx[r])]);
    }
    out.marker_names = marker_names;
    return out;
}

CaseControlData CaseControlData::markers(const std::vector<int>& idx) const {
    CaseControlData out;
    out.values.resize(values.rows(), static_cast<Eigen::Index>(idx.size()));
    out.observed.resize(values.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t c = 0; c < idx.size(); ++c) {
        out.values.col(static_cast<Eigen::Index>(c)) = values.col(idx[c]);
        out.observed.col(static_cast<Eigen::Index>(c)) = observed.col(idx[c]);
        out.marker_names.push_back(marker_names[static_cast<std::size_t>(idx[c])]);
    }
    out.disease = disease;
    return out;
}

std::vector<Eigen::Index> CaseControlData::class_rows(int d) const {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < n_rows(); ++i)
        if (disease[static_cast<std::size_t>(i)] == d) idx.push_back(i);
    return idx;
}

Eigen::MatrixXd CaseControlData::class_values(int d) const {
    const auto idx = class_rows(d);
    Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), values.cols());
    for (std::size_t r = 0; r < idx.size(); ++r) {
        for (Eigen::Index j = 0; j < values.cols(); ++j)
            out(static_cast<Eigen::Index>(r), j) =
                observed(idx[r], j) ? values(idx[r], j) : std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

std::uint64_t row_pattern(const MaskMatrix& observed, Eigen::Index i) {
    std::uint64_t p = 0;
    for (Eigen::Index j = 0; j < observed.cols(); ++j)
        if (observed(i, j)) p |= (std::uint64_t{1} << j);
    return p;
}

std::vector<int> pattern_columns(std::uint64_t pattern, int n_markers) {
    std::vector<int> cols;
    for (int j = 0; j < n_markers; ++j)
        if (pattern & (std::uint64_t{1} << j)) cols.push_back(j);
    return cols;
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    std::string t = s.substr(b, e - b + 1);
    if (t.size() >= 2 && t.front() == '"' && t.back() == '"') t = t.substr(1, t.size() - 2);
    return t;
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (*first == '+') ++first;
    auto res = std::from_chars(first, last, out);
    return res.ec == std::errc() && res.ptr == last && std::isfinite(out);
}

} // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    bool quoted = false;
    for (char c : line) {
        if (c == '"') {
            quoted = !quoted;
            cur.push_back(c);
        } else if (c == ',' && !quoted) {
            cells.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    cells.push_back(trim(cur));
    return cells;
}

CaseControlData parse_csv(const std::string& text, const std::string& disease_col) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("csv: empty input");
    const auto header = split_csv_line(line);
    int dcol = -1;
    std::vector<int> marker_cols;
    std::vector<std::string> names;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == disease_col) {
            dcol = static_cast<int>(c);
        } else {
            marker_cols.push_back(static_cast<int>(c));
            names.push_back(header[c]);
        }
    }
    if (dcol < 0) throw ParseError("csv: disease column '" + disease_col + "' not found");
    if (marker_cols.empty()) throw ParseError("csv: no marker columns");

    std::vector<std::vector<double>> rows;
    std::vector<int> disease;
    std::size_t lineno = 1;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw ParseError("csv: line " + std::to_string(lineno) + " has " + std::to_string(cells.size()) +
                             " fields, expected " + std::to_string(header.size()));
        double dv = 0.0;
        if (!parse_double(cells[static_cast<std::size_t>(dcol)], dv) || (dv != 0.0 && dv != 1.0))
            throw ParseError("csv: line " + std::to_string(lineno) + ": disease value must be 0 or 1");
        disease.push_back(static_cast<int>(dv));
        std::vector<double> row;
        for (int c : marker_cols) {
            const auto& cell = cells[static_cast<std::size_t>(c)];
            double v = 0.0;
            if (cell == "NA") {
                row.push_back(nan);
            } else if (parse_double(cell, v)) {
                row.push_back(v);
            } else {
                throw ParseError("csv: line " + std::to_string(lineno) + ": non-numeric marker value '" + cell + "'");
            }
        }
        rows.push_back(std::move(row));
    }
    Eigen::MatrixXd values(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(marker_cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < marker_cols.size(); ++j)
            values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    CaseControlData data(std::move(values), std::move(disease), std::move(names));
    data.validate();
    return data;
}

CaseControlData read_csv(const std::string& path, const std::string& disease_col) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_csv(ss.str(), disease_col);
}

std::string format_real(double x) {
    if (std::isnan(x)) return "NA";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string to_csv(const CaseControlData& data, const std::string& disease_col) {
    std::ostringstream out;
    out << disease_col;
    for (const auto& n : data.marker_names) out << ',' << n;
    out << '\n';
    for (Eigen::Index i = 0; i < data.n_rows(); ++i) {
        out << data.disease[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < data.values.cols(); ++j)
            out << ',' << (data.observed(i, j) ? format_real(data.values(i, j)) : std::string("NA"));
        out << '\n';
    }
    return out.str();
}

void write_csv(const CaseControlData& data, const std::string& path, const std::string& disease_col) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write '" + path + "'");
    out << to_csv(data, disease_col);
}

} // namespace tda
