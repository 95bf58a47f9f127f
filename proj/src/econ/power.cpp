#include "assetlens/econ/power.hpp"

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/non_central_f.hpp>

#include "assetlens/common/error.hpp"

namespace assetlens::econ {

void PowerSpec::validate() const {
    if (!(effect_size_f2 > 0.0)) throw ConfigError("effect size f2 must be > 0");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must be in (0,1)");
    if (!(power > alpha && power < 1.0))
        throw ConfigError("requested power must be in (alpha, 1)");
    if (predictors < 1) throw ConfigError("predictor count must be >= 1");
}

double regression_power(const PowerSpec& spec, std::size_t n) {
    spec.validate();
    const double df1 = static_cast<double>(spec.predictors);
    if (n < spec.predictors + 2) return 0.0;
    const double df2 = static_cast<double>(n - spec.predictors - 1);
    const double lambda = spec.effect_size_f2 * static_cast<double>(n);

    const boost::math::fisher_f central(df1, df2);
    const double f_crit = boost::math::quantile(central, 1.0 - spec.alpha);
    const boost::math::non_central_f noncentral(df1, df2, lambda);
    return boost::math::cdf(boost::math::complement(noncentral, f_crit));
}

std::size_t power_sample_size(const PowerSpec& spec) {
    spec.validate();
    std::size_t lo = spec.predictors + 2;
    if (regression_power(spec, lo) >= spec.power) return lo;

    std::size_t hi = lo;
    while (regression_power(spec, hi) < spec.power) {
        if (hi > 100000000)
            throw NumericError("power target unreachable below 1e8 samples");
        hi *= 2;
    }
    // Power is monotone in N for this test; bisect the first adequate N.
    while (lo + 1 < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (regression_power(spec, mid) >= spec.power)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

}  // namespace assetlens::econ
