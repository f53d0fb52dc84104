#pragma once

#include <span>
#include <string>
#include <utility>

namespace trustsim {

/// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double regularized_incomplete_beta(double a, double b, double x);

/// P(T > t) for Student's t with `df` degrees of freedom.
double student_t_upper_tail(double t, double df);

enum class TTestVariant { Welch, Student };

struct TestResult {
    std::string name;
    std::string variant;  // "welch" or "student"
    std::string tail = "one_sided_greater";
    double statistic = 0.0;
    double degrees_of_freedom = 0.0;
    double p_value = 0.0;
    std::pair<std::size_t, std::size_t> sample_sizes;
    double mean_a = 0.0;
    double mean_b = 0.0;
};

/// Independent-samples t-test of H1: mean(a) > mean(b).
/// Throws DegenerateSample when either side has fewer than two values or the
/// combined variance is zero.
TestResult one_tailed_t_test(std::span<const double> a, std::span<const double> b,
                             TTestVariant variant = TTestVariant::Welch, std::string name = {});

}  // namespace trustsim
