#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace tda {

using MaskMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Case-control biomarker sample: N x J values, 0/1 labels and an observation mask.
/// Missing cells hold NaN in `values` and false in `observed`.
struct CaseControlData {
    Eigen::MatrixXd values;
    std::vector<int> disease;
    MaskMatrix observed;
    std::vector<std::string> marker_names;

    CaseControlData() = default;
    /// Fully observed data; NaN entries are treated as missing.
    CaseControlData(Eigen::MatrixXd values, std::vector<int> disease, std::vector<std::string> names = {});

    Eigen::Index n_rows() const { return values.rows(); }
    int n_markers() const { return static_cast<int>(values.cols()); }
    Eigen::Index count(int d) const;
    bool complete() const { return observed.all(); }

    /// Throws DegenerateData / ParseError when the invariants do not hold.
    void validate() const;

    CaseControlData rows(const std::vector<Eigen::Index>& idx) const;
    CaseControlData markers(const std::vector<int>& idx) const;
    std::vector<Eigen::Index> class_rows(int d) const;
    /// Values of class-d rows with missing entries as NaN.
    Eigen::MatrixXd class_values(int d) const;
};

/// Observation pattern of one row as a bit mask (bit j set when marker j is observed).
std::uint64_t row_pattern(const MaskMatrix& observed, Eigen::Index i);
std::vector<int> pattern_columns(std::uint64_t pattern, int n_markers);

/// Reads a CSV with a header row; `disease_col` holds 0/1, every other column is
/// a marker; the literal token NA marks a missing value.
CaseControlData read_csv(const std::string& path, const std::string& disease_col = "disease");
CaseControlData parse_csv(const std::string& text, const std::string& disease_col = "disease");
void write_csv(const CaseControlData& data, const std::string& path, const std::string& disease_col = "disease");
std::string to_csv(const CaseControlData& data, const std::string& disease_col = "disease");

/// Formats a double with 17 significant digits.
std::string format_real(double x);
std::vector<std::string> split_csv_line(const std::string& line);

} // namespace tda
