#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "assetlens/econ/records.hpp"

namespace assetlens::econ {

struct Regressor {
    std::string column;
    bool log_transform = false;

    std::string label() const {
        return log_transform ? "ln(" + column + ")" : column;
    }
};

struct CategoricalControl {
    std::string column;
    std::string base_level;
};

// One regression specification: outcome, transformed regressors, and
// categorical controls expanded against a base level.
struct SpecModel {
    std::string name;
    std::string outcome;
    bool log_outcome = false;
    std::vector<Regressor> regressors;
    std::vector<CategoricalControl> categoricals;
};

struct DroppedRow {
    std::size_t row = 0;
    std::string reason;
};

struct Design {
    Eigen::MatrixXd x;                      // intercept first
    Eigen::VectorXd y;
    std::vector<std::string> column_names;  // parallel to x columns
    std::vector<DroppedRow> dropped;
    std::vector<std::size_t> kept_rows;     // original row indices
};

// Applies transforms, drops rows with missing outcome values or non-positive
// values under a log transform (each drop is reported), and expands
// categoricals into dummy columns against the base level.
Design build_design(const RecordTable& records, const SpecModel& spec);

struct OlsFit {
    std::string spec_name;
    std::vector<std::string> names;  // intercept first
    Eigen::VectorXd coef;
    Eigen::VectorXd se;              // classical homoskedastic
    Eigen::VectorXd t;
    Eigen::VectorXd p;               // two-sided, Student-t with N-k df
    double r2 = 0.0;
    std::size_t n = 0;

    int term(const std::string& name) const;  // -1 when absent
};

// Least squares via Householder QR; classical standard errors from
// sigma^2 * diag((X'X)^-1). Throws NumericError naming a dependent column on
// rank deficiency.
OlsFit ols_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
               const std::vector<std::string>& names);

OlsFit fit_spec(const RecordTable& records, const SpecModel& spec);

// The four nested stunting specifications (m1..m4) over the canonical
// column names, with state dummies for village-level tables that carry a
// state column.
std::vector<SpecModel> standard_specs(bool with_state_controls = false,
                                      const std::string& base_state = "UP");

std::vector<OlsFit> run_specs(const RecordTable& records,
                              const std::vector<SpecModel>& specs);

// Fixed-width b/se comparison table, one column per fit.
std::string format_comparison_table(const std::vector<OlsFit>& fits);

}  // namespace assetlens::econ
