#include "support/oracles.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <cmath>

namespace trustsim::testing {

PatternFlags brute_force_patterns(const RepeatedTranscript &t, int multiplier) {
    const auto &r = t.rounds;
    const std::size_t n = r.size();
    constexpr long double eps = 1e-12L;
    PatternFlags f;

    // Pattern 1: in every round the trustee returns more than was sent.
    f.returned_exceeds_sent = true;
    for (const auto &x : r)
        if (!(static_cast<long double>(x.returned.in_cents()) > static_cast<long double>(x.sent.in_cents())))
            f.returned_exceeds_sent = false;

    // Pattern 2: returned / (3 × sent) moves by at most 10% between successive
    // turns, except for the last round.
    std::vector<std::optional<long double>> ratio;
    for (const auto &x : r) {
        if (x.sent.in_cents() == 0) ratio.emplace_back();
        else
            ratio.emplace_back(static_cast<long double>(x.returned.in_cents()) /
                               (multiplier * static_cast<long double>(x.sent.in_cents())));
    }
    int defined = 0;
    bool all_within = true;
    for (std::size_t a = 0; a < n; ++a) {
        const std::size_t b = a + 1;
        if (b >= n - 1) break;  // the pair ending at the final round is exempt
        if (!ratio[a] || !ratio[b]) continue;
        ++defined;
        if (std::fabs(*ratio[b] - *ratio[a]) > 0.1L + eps) all_within = false;
    }
    f.stable_ratio = defined > 0 && all_within;

    // Pattern 3: no frequent fluctuations in the amount sent, i.e. at most one
    // direction reversal made of two moves of at least $3 each.
    int reversals = 0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const long double before = (r[i].sent.in_cents() - r[i - 1].sent.in_cents()) / 100.0L;
        const long double after = (r[i + 1].sent.in_cents() - r[i].sent.in_cents()) / 100.0L;
        const bool big = std::fabs(before) >= 3.0L - eps && std::fabs(after) >= 3.0L - eps;
        if (big && ((before > 0) != (after > 0))) ++reversals;
    }
    f.few_fluctuations = reversals <= 1;
    return f;
}

ReferenceTest reference_t_test(std::span<const double> a, std::span<const double> b, bool welch) {
    auto mean = [](std::span<const double> x) {
        long double s = 0;
        for (double v : x) s += v;
        return s / x.size();
    };
    auto var = [](std::span<const double> x, long double m) {
        long double s = 0;
        for (double v : x) s += (v - m) * (v - m);
        return s / (x.size() - 1);
    };
    const long double na = a.size(), nb = b.size();
    const long double ma = mean(a), mb = mean(b);
    const long double va = var(a, ma), vb = var(b, mb);
    ReferenceTest r{};
    if (welch) {
        const long double se2 = va / na + vb / nb;
        r.statistic = (ma - mb) / std::sqrt(se2);
        r.df = se2 * se2 / ((va / na) * (va / na) / (na - 1) + (vb / nb) * (vb / nb) / (nb - 1));
    } else {
        const long double sp2 = ((na - 1) * va + (nb - 1) * vb) / (na + nb - 2);
        r.statistic = (ma - mb) / std::sqrt(sp2 * (1 / na + 1 / nb));
        r.df = na + nb - 2;
    }
    const boost::math::students_t_distribution<long double> dist(r.df);
    r.p_value = boost::math::cdf(boost::math::complement(dist, r.statistic));
    return r;
}

RepeatedTranscript random_transcript(std::mt19937_64 &rng) {
    auto uniform = [&](int lo, int hi) { return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1)); };
    const int rounds = uniform(2, 10);
    const bool steady = uniform(0, 2) == 0;
    const int ratio_thirds = uniform(0, 3);  // returned ≈ (ratio/3)·3·sent
    GameSpec spec = GameSpec::defaults(GameKind::RepeatedTrust);
    spec.rounds = rounds;
    RepeatedTranscript t;
    for (int i = 0; i < rounds; ++i) {
        const int sent = uniform(0, 10);
        int returned = uniform(0, 3 * sent);
        if (steady) returned = std::min(3 * sent, std::max(0, ratio_thirds * sent + uniform(-1, 1)));
        t = repeated_game_advance(t, spec, Money::dollars(sent), Money::dollars(returned));
    }
    return t;
}

RepeatedTranscript transcript_of(const std::vector<double> &sent, const std::vector<double> &returned, int multiplier) {
    GameSpec spec = GameSpec::defaults(GameKind::RepeatedTrust);
    spec.multiplier = multiplier;
    spec.rounds = static_cast<int>(sent.size());
    RepeatedTranscript t;
    for (std::size_t i = 0; i < sent.size(); ++i)
        t = repeated_game_advance(t, spec, Money::cents(std::llround(sent[i] * 100)),
                                  Money::cents(std::llround(returned[i] * 100)));
    return t;
}

}  // namespace trustsim::testing
