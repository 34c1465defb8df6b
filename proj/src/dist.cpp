#include "ergo/dist.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <utility>

#include "ergo/errors.hpp"
#include "ergo/numeric/format.hpp"
#include "ergo/numeric/quadrature.hpp"
#include "ergo/numeric/stats.hpp"

namespace ergo {

namespace {

constexpr double inv_sqrt_2pi = 0.3989422804014327;

double gaussian_pdf(double x, double mean, double sd) {
    const double z = (x - mean) / sd;
    return inv_sqrt_2pi / sd * std::exp(-0.5 * z * z);
}

// Multiples of sigma at which the quadrature is anchored. The far entries
// matter on transformed infinite supports, where the bump can sit many
// panel widths away from everything else.
constexpr double anchor_sigmas[] = {-38.0, -20.0, -12.0, -8.0, -5.0, -3.0,
                                    -2.0,  -1.0,  0.0,   1.0,  2.0,  3.0,
                                    5.0,   8.0,   12.0,  20.0, 38.0};

double integrate_or_throw(const std::function<double(double)>& f, double lo,
                          double hi, const std::vector<double>& breaks) {
    auto q = integrate(f, lo, hi, 1e-10, 1e-13, breaks);
    if (!q.converged)
        throw math_error("density quadrature failed to converge on [" +
                         format_double(lo) + ", " + format_double(hi) + "]");
    return q.value;
}

std::pair<double, double> gaussian_moments(const BrownianDrift& bd, double u0,
                                           double t, VarianceConvention vc) {
    bd.validate();
    if (!(t > 0.0)) throw validation_error("density time must be positive");
    if (!(bd.volatility > 0.0))
        throw validation_error("zero utility volatility leaves a point mass, not a density");
    const double spread =
        vc == VarianceConvention::brownian ? std::sqrt(t) : t;
    return {u0 + bd.drift * t, bd.volatility * spread};
}

}  // namespace

Density::Density(parts p)
    : pdf_(std::move(p.pdf)),
      support_(p.support),
      t_(p.t),
      name_(std::move(p.name)),
      anchor_x_(std::move(p.anchors)) {
    if (!pdf_) throw validation_error("density needs a pdf");
    if (!(t_ > 0.0)) throw validation_error("density time must be positive");
    if (!(support_.lo < support_.hi))
        throw validation_error("density support is empty");
    std::sort(anchor_x_.begin(), anchor_x_.end());
    anchor_x_.erase(std::remove_if(anchor_x_.begin(), anchor_x_.end(),
                                   [this](double x) {
                                       return !support_.contains(x);
                                   }),
                    anchor_x_.end());
    anchor_x_.erase(std::unique(anchor_x_.begin(), anchor_x_.end()),
                    anchor_x_.end());
    if (anchor_x_.empty())
        throw validation_error("density needs at least one anchor inside the support");

    anchor_cdf_.resize(anchor_x_.size());
    anchor_cdf_[0] = integrate_or_throw(pdf_, support_.lo, anchor_x_[0], {});
    for (std::size_t i = 1; i < anchor_x_.size(); ++i)
        anchor_cdf_[i] = anchor_cdf_[i - 1] + integrate_or_throw(
                                                  pdf_, anchor_x_[i - 1],
                                                  anchor_x_[i], {});
    const double total =
        anchor_cdf_.back() +
        integrate_or_throw(pdf_, anchor_x_.back(), support_.hi, {});
    if (std::fabs(total - 1.0) > 1e-6)
        throw validation_error("density mass is " + format_double(total) +
                               ", not 1; the distribution leaks outside the support");
}

double Density::pdf(double x) const {
    if (!support_.contains(x)) return 0.0;
    return pdf_(x);
}

double Density::cdf(double x) const {
    if (!(x > support_.lo)) return 0.0;
    if (!(x < support_.hi)) return 1.0;
    auto it = std::upper_bound(anchor_x_.begin(), anchor_x_.end(), x);
    if (it == anchor_x_.begin())
        return integrate_or_throw(pdf_, support_.lo, x, {});
    const std::size_t i = std::size_t(it - anchor_x_.begin()) - 1;
    if (anchor_x_[i] == x) return anchor_cdf_[i];
    return anchor_cdf_[i] + integrate_or_throw(pdf_, anchor_x_[i], x, {});
}

Density utility_density(const BrownianDrift& bd, double u0, double t,
                        VarianceConvention vc) {
    const auto [mean, sd] = gaussian_moments(bd, u0, t, vc);
    Density::parts p;
    p.pdf = [mean, sd](double u) { return gaussian_pdf(u, mean, sd); };
    p.support = {-INFINITY, INFINITY};
    p.t = t;
    for (double k : anchor_sigmas) p.anchors.push_back(mean + k * sd);
    p.name = "utility_level";
    return Density(std::move(p));
}

Density wealth_density(const UtilityFunction& u, const BrownianDrift& bd,
                       double x0, double t, VarianceConvention vc) {
    const Interval dom = u.domain();
    if (!dom.contains(x0))
        throw validation_error("initial wealth " + format_double(x0) +
                               " is outside the utility domain");
    const auto [mean, sd] = gaussian_moments(bd, u.value(x0), t, vc);
    Density::parts p;
    p.pdf = [u, mean, sd](double x) {
        // Beyond 39 sigma the Gaussian factor is a hard zero in doubles;
        // skip the derivative product before u'(x) can overflow it to NaN.
        const double z = (u.value(x) - mean) / sd;
        if (!(std::fabs(z) < 39.0)) return 0.0;
        return inv_sqrt_2pi / sd * std::exp(-0.5 * z * z) * u.derivative(x);
    };
    p.support = dom;
    p.t = t;
    for (double k : anchor_sigmas) {
        // Levels outside the utility's range have no preimage; the mass
        // check at construction decides whether what is lost matters.
        try {
            const double x = u.inverse(mean + k * sd);
            if (dom.contains(x)) p.anchors.push_back(x);
        } catch (const math_error&) {
        }
    }
    p.name = u.name() + "_wealth";
    return Density(std::move(p));
}

DensityCheck validate_density(const Density& d, std::vector<double> samples) {
    if (samples.size() < 1000)
        throw validation_error("density validation needs at least 1000 samples");
    const Interval sup = d.support();
    for (double x : samples)
        if (!std::isfinite(x) || !sup.contains(x))
            throw validation_error("sample " + format_double(x) +
                                   " lies outside the density support");
    std::sort(samples.begin(), samples.end());
    DensityCheck check;
    check.n = samples.size();
    check.ks = ks_statistic(samples, [&d](double x) { return d.cdf(x); });
    check.threshold = 1.63 / std::sqrt(double(check.n));
    check.pass = check.ks < check.threshold;
    return check;
}

void write_density_csv(std::ostream& os, const Density& d,
                       const std::vector<double>& grid) {
    if (grid.empty()) throw validation_error("density grid is empty");
    os << "x,pdf\n";
    for (double x : grid) {
        if (!std::isfinite(x))
            throw validation_error("density grid point is not finite");
        os << format_double(x) << ',' << format_double(d.pdf(x)) << '\n';
    }
}

}  // namespace ergo
