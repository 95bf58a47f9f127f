#include "assetlens/econ/ols.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include "assetlens/common/error.hpp"

namespace assetlens::econ {

Design build_design(const RecordTable& records, const SpecModel& spec) {
    const std::vector<double>& outcome = records.numeric(spec.outcome);
    std::vector<const std::vector<double>*> reg_cols;
    for (const Regressor& r : spec.regressors) reg_cols.push_back(&records.numeric(r.column));

    struct DummySet {
        const std::vector<std::string>* values;
        std::vector<std::string> levels;  // excluding base
    };
    std::vector<DummySet> dummies;
    for (const CategoricalControl& c : spec.categoricals) {
        DummySet d;
        d.values = &records.categorical(c.column);
        std::set<std::string> levels(d.values->begin(), d.values->end());
        levels.erase(c.base_level);
        d.levels.assign(levels.begin(), levels.end());
        dummies.push_back(std::move(d));
    }

    Design design;
    for (std::size_t row = 0; row < records.rows; ++row) {
        std::string reason;
        const double y = outcome[row];
        if (std::isnan(y))
            reason = "missing outcome " + spec.outcome;
        else if (spec.log_outcome && y <= 0.0)
            reason = "non-positive outcome under log: " + spec.outcome;
        for (std::size_t ri = 0; ri < spec.regressors.size() && reason.empty(); ++ri) {
            const double v = (*reg_cols[ri])[row];
            if (std::isnan(v))
                reason = "missing regressor " + spec.regressors[ri].column;
            else if (spec.regressors[ri].log_transform && v <= 0.0)
                reason = "non-positive value under log: " + spec.regressors[ri].column;
        }
        if (!reason.empty())
            design.dropped.push_back({row, reason});
        else
            design.kept_rows.push_back(row);
    }
    if (design.kept_rows.empty())
        throw InputError("no usable rows left for spec " + spec.name);

    std::size_t n_dummy = 0;
    for (const DummySet& d : dummies) n_dummy += d.levels.size();
    const std::size_t n = design.kept_rows.size();
    const std::size_t k = 1 + spec.regressors.size() + n_dummy;

    design.x = Eigen::MatrixXd(n, k);
    design.y = Eigen::VectorXd(n);
    design.column_names.push_back("const");
    for (const Regressor& r : spec.regressors) design.column_names.push_back(r.label());
    for (std::size_t di = 0; di < dummies.size(); ++di)
        for (const std::string& level : dummies[di].levels)
            design.column_names.push_back(spec.categoricals[di].column + "=" + level);

    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t row = design.kept_rows[i];
        const double y = outcome[row];
        design.y(static_cast<Eigen::Index>(i)) = spec.log_outcome ? std::log(y) : y;
        std::size_t col = 0;
        design.x(i, col++) = 1.0;
        for (std::size_t ri = 0; ri < spec.regressors.size(); ++ri) {
            const double v = (*reg_cols[ri])[row];
            design.x(i, col++) = spec.regressors[ri].log_transform ? std::log(v) : v;
        }
        for (const DummySet& d : dummies)
            for (const std::string& level : d.levels)
                design.x(i, col++) = (*d.values)[row] == level ? 1.0 : 0.0;
    }
    return design;
}

int OlsFit::term(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return static_cast<int>(i);
    return -1;
}

OlsFit ols_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
               const std::vector<std::string>& names) {
    const Eigen::Index n = x.rows();
    const Eigen::Index k = x.cols();
    if (n <= k)
        throw InputError("ols needs more rows than design columns (" +
                         std::to_string(n) + " rows, " + std::to_string(k) +
                         " columns)");
    if (names.size() != static_cast<std::size_t>(k))
        throw InputError("ols column name count does not match design");

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    qr.setThreshold(1e-10);
    if (qr.rank() < k) {
        // The permutation puts dependent columns last.
        const auto perm = qr.colsPermutation().indices();
        const std::string culprit = names[static_cast<std::size_t>(perm(k - 1))];
        throw NumericError("design matrix is rank deficient; dependent column: " +
                           culprit);
    }

    OlsFit fit;
    fit.names = names;
    fit.n = static_cast<std::size_t>(n);
    fit.coef = qr.solve(y);

    const Eigen::VectorXd residuals = y - x * fit.coef;
    const double ssr = residuals.squaredNorm();
    const double dof = static_cast<double>(n - k);
    const double sigma2 = ssr / dof;

    // (X'X)^-1 from the pivoted QR factorization: X P = Q R.
    const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
    const Eigen::MatrixXd rinv =
        r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
    const Eigen::MatrixXd perm = qr.colsPermutation();
    const Eigen::MatrixXd xtx_inv = perm * (rinv * rinv.transpose()) * perm.transpose();

    fit.se = (sigma2 * xtx_inv.diagonal().array()).sqrt().matrix();
    fit.t = Eigen::VectorXd(k);
    fit.p = Eigen::VectorXd(k);
    const boost::math::students_t dist(dof);
    for (Eigen::Index j = 0; j < k; ++j) {
        if (fit.se(j) > 0.0) {
            fit.t(j) = fit.coef(j) / fit.se(j);
            fit.p(j) =
                2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(fit.t(j))));
        } else {
            // Exact fit: zero residual variance.
            const double inf = std::numeric_limits<double>::infinity();
            fit.t(j) = fit.coef(j) == 0.0 ? 0.0 : (fit.coef(j) > 0.0 ? inf : -inf);
            fit.p(j) = fit.coef(j) == 0.0 ? 1.0 : 0.0;
        }
    }

    const double mean_y = y.mean();
    const double sst = (y.array() - mean_y).matrix().squaredNorm();
    fit.r2 = sst > 0.0 ? 1.0 - ssr / sst : 1.0;
    return fit;
}

OlsFit fit_spec(const RecordTable& records, const SpecModel& spec) {
    const Design design = build_design(records, spec);
    OlsFit fit = ols_fit(design.x, design.y, design.column_names);
    fit.spec_name = spec.name;
    return fit;
}

std::vector<SpecModel> standard_specs(bool with_state_controls,
                                      const std::string& base_state) {
    SpecModel m1;
    m1.name = "m1";
    m1.outcome = "stunting";
    m1.regressors = {{"opendefecation", true}};

    SpecModel m2 = m1;
    m2.name = "m2";
    m2.regressors.push_back({"mpce", true});
    m2.regressors.push_back({"kcal2", false});
    m2.regressors.push_back({"kcal_cereal", false});
    m2.regressors.push_back({"householdsizeunder5", false});

    SpecModel m3 = m2;
    m3.name = "m3";
    m3.regressors.push_back({"literacy_rate", false});
    m3.regressors.push_back({"women_lit", false});

    SpecModel m4 = m3;
    m4.name = "m4";
    m4.regressors.push_back({"mom_folic", false});
    m4.regressors.push_back({"women_sec_edu", false});
    m4.regressors.push_back({"mom_full_ant_care", false});
    m4.regressors.push_back({"ceasarean_birth", false});
    m4.regressors.push_back({"children_vita", false});
    m4.regressors.push_back({"women_bmi_below_norm", false});
    m4.regressors.push_back({"clean_fuel", false});

    std::vector<SpecModel> specs = {m1, m2, m3, m4};
    if (with_state_controls)
        for (SpecModel& s : specs)
            s.categoricals.push_back({"state", base_state});
    return specs;
}

std::vector<OlsFit> run_specs(const RecordTable& records,
                              const std::vector<SpecModel>& specs) {
    std::vector<OlsFit> fits;
    fits.reserve(specs.size());
    for (const SpecModel& spec : specs) fits.push_back(fit_spec(records, spec));
    return fits;
}

std::string format_comparison_table(const std::vector<OlsFit>& fits) {
    // Row order: union of non-intercept terms by first appearance, then the
    // intercept, then R^2 and N.
    std::vector<std::string> terms;
    for (const OlsFit& fit : fits)
        for (const std::string& name : fit.names)
            if (name != "const" && std::find(terms.begin(), terms.end(), name) == terms.end())
                terms.push_back(name);
    terms.push_back("const");

    constexpr int kLabelWidth = 26;
    constexpr int kColWidth = 12;
    std::ostringstream out;
    out << std::left << std::setw(kLabelWidth) << "";
    for (const OlsFit& fit : fits)
        out << std::right << std::setw(kColWidth)
            << (fit.spec_name.empty() ? "fit" : fit.spec_name);
    out << "\n" << std::left << std::setw(kLabelWidth) << "";
    for (std::size_t i = 0; i < fits.size(); ++i)
        out << std::right << std::setw(kColWidth) << "b/se";
    out << "\n";

    auto fmt = [](double v) {
        std::ostringstream s;
        s << std::fixed << std::setprecision(3) << v;
        return s.str();
    };
    for (const std::string& term : terms) {
        out << std::left << std::setw(kLabelWidth) << term;
        for (const OlsFit& fit : fits) {
            const int idx = fit.term(term);
            out << std::right << std::setw(kColWidth)
                << (idx >= 0 ? fmt(fit.coef(idx)) : "");
        }
        out << "\n" << std::left << std::setw(kLabelWidth) << "";
        for (const OlsFit& fit : fits) {
            const int idx = fit.term(term);
            out << std::right << std::setw(kColWidth)
                << (idx >= 0 ? "(" + fmt(fit.se(idx)) + ")" : "");
        }
        out << "\n";
    }
    out << std::left << std::setw(kLabelWidth) << "R-squared";
    for (const OlsFit& fit : fits) out << std::right << std::setw(kColWidth) << fmt(fit.r2);
    out << "\n" << std::left << std::setw(kLabelWidth) << "N";
    for (const OlsFit& fit : fits)
        out << std::right << std::setw(kColWidth) << fit.n;
    out << "\n";
    return out.str();
}

}  // namespace assetlens::econ
