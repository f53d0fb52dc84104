#include "trustsim/stats.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "trustsim/error.hpp"

namespace trustsim {
namespace {

// Modified Lentz evaluation of the incomplete-beta continued fraction.
double beta_continued_fraction(double a, double b, double x) {
    constexpr int kMaxIter = 500;
    constexpr double kEps = 1e-16;
    constexpr double kTiny = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

struct Moments {
    double mean;
    double var;  // unbiased
};

Moments moments(std::span<const double> xs) {
    const double n = static_cast<double>(xs.size());
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return {mean, ss / (n - 1.0)};
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double log_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
    return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_upper_tail(double t, double df) {
    if (std::isnan(t) || !(df > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    if (std::isinf(t)) return t > 0 ? 0.0 : 1.0;
    const double x = df / (df + t * t);
    const double half_tail = 0.5 * regularized_incomplete_beta(0.5 * df, 0.5, x);
    return t >= 0.0 ? half_tail : 1.0 - half_tail;
}

TestResult one_tailed_t_test(std::span<const double> a, std::span<const double> b, TTestVariant variant,
                             std::string name) {
    if (a.size() < 2 || b.size() < 2) throw DegenerateSample("each sample needs at least two values");
    const auto ma = moments(a);
    const auto mb = moments(b);
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());

    TestResult r;
    r.name = std::move(name);
    r.sample_sizes = {a.size(), b.size()};
    r.mean_a = ma.mean;
    r.mean_b = mb.mean;

    double se2 = 0.0;
    if (variant == TTestVariant::Welch) {
        const double va = ma.var / na;
        const double vb = mb.var / nb;
        se2 = va + vb;
        if (!(se2 > 0.0)) throw DegenerateSample("combined variance is zero");
        r.variant = "welch";
        r.degrees_of_freedom = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    } else {
        const double pooled = ((na - 1.0) * ma.var + (nb - 1.0) * mb.var) / (na + nb - 2.0);
        se2 = pooled * (1.0 / na + 1.0 / nb);
        if (!(se2 > 0.0)) throw DegenerateSample("combined variance is zero");
        r.variant = "student";
        r.degrees_of_freedom = na + nb - 2.0;
    }
    r.statistic = (ma.mean - mb.mean) / std::sqrt(se2);
    r.p_value = student_t_upper_tail(r.statistic, r.degrees_of_freedom);
    return r;
}

}  // namespace trustsim
