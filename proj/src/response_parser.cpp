#include "trustsim/response_parser.hpp"

#include <array>
#include <cctype>
#include <regex>
#include <vector>

namespace trustsim {
namespace {

constexpr std::array<std::string_view, 20> kNumberWords{
    "zero", "one",    "two",    "three",    "four",     "five",    "six",      "seven",     "eight",    "nine",
    "ten",  "eleven", "twelve", "thirteen", "fourteen", "fifteen", "sixteen", "seventeen", "eighteen", "nineteen"};

#define TS_NUM R"((\d+(?:\.\d{1,2})?(?!\d|\.\d)|zero|one|two|three|four|five|six|seven|eight|nine|ten|eleven|twelve|thirteen|fourteen|fifteen|sixteen|seventeen|eighteen|nineteen)\b)"

const std::regex &final_sentence_re() {
    static const std::regex re(R"(\bfinally,?\s+i\s+will\s+give\s+(?:back\s+)?\$?\s?)" TS_NUM R"((?:\s*dollars?\b)?)",
                               std::regex::icase);
    return re;
}

const std::regex &give_phrase_re() {
    static const std::regex re(
        R"(\b(?:give|gives|giving|send|sends|sending|return|returning)\s+(?:back\s+)?(?:(?:you|them|the other player)\s+)?(?:\$\s?)" TS_NUM
        R"(|)" TS_NUM R"(\s*dollars?\b))",
        std::regex::icase);
    return re;
}

const std::regex &dollar_sign_re() {
    static const std::regex re(R"(\$\s?(\d+(?:\.\d{1,2})?)(?!\d|\.\d))");
    return re;
}

#undef TS_NUM

std::optional<Money> number_to_money(std::string token) {
    for (auto &c : token) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    for (std::size_t i = 0; i < kNumberWords.size(); ++i)
        if (token == kNumberWords[i]) return Money::dollars(static_cast<std::int64_t>(i));
    return Money::parse(token);
}

std::optional<ParsedDecision> last_amount_match(const std::string &s, const std::regex &re, const char *rule) {
    std::optional<ParsedDecision> best;
    for (auto it = std::sregex_iterator(s.begin(), s.end(), re); it != std::sregex_iterator(); ++it) {
        const auto &m = *it;
        std::optional<Money> amount;
        for (std::size_t g = 1; g < m.size() && !amount; ++g)
            if (m[g].matched) amount = number_to_money(m[g].str());
        if (!amount) continue;
        const auto begin = static_cast<std::size_t>(m.position(0));
        best = ParsedDecision{*amount, TextSpan{begin, begin + static_cast<std::size_t>(m.length(0))}, rule};
    }
    return best;
}

struct Sentence {
    std::size_t begin;
    std::size_t end;  // one past the terminal punctuation
};

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::vector<Sentence> split_sentences(std::string_view text) {
    std::vector<Sentence> out;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        while (i < n && is_space(text[i])) ++i;
        if (i >= n) break;
        const std::size_t begin = i;
        std::size_t end = n;
        while (i < n) {
            const char c = text[i];
            if (c == '\n') {
                end = i;
                break;
            }
            if (c == '.' || c == '!' || c == '?') {
                std::size_t j = i;
                while (j < n && (text[j] == '.' || text[j] == '!' || text[j] == '?' || text[j] == '"' ||
                                 text[j] == '\'' || text[j] == ')'))
                    ++j;
                if (j >= n || is_space(text[j])) {
                    end = j;
                    i = j;
                    break;
                }
                i = j;
                continue;
            }
            ++i;
        }
        if (i >= n) end = std::min(end, n);
        // trim trailing whitespace for newline-terminated sentences
        while (end > begin && is_space(text[end - 1])) --end;
        if (end > begin) out.push_back({begin, end});
        if (i < n && text[i] == '\n') ++i;
    }
    return out;
}

std::string segment_text(std::string_view source, const std::optional<TextSpan> &span) {
    if (!span) return {};
    return std::string(source.substr(span->begin, span->end - span->begin));
}

}  // namespace

std::string_view to_string(TrustChoice c) { return c == TrustChoice::Trust ? "trust" : "not_trust"; }

std::optional<ParsedDecision> extract_amount(std::string_view text) {
    const std::string s(text);
    if (auto d = last_amount_match(s, final_sentence_re(), "final_sentence")) return d;
    if (auto d = last_amount_match(s, give_phrase_re(), "give_phrase")) return d;
    return last_amount_match(s, dollar_sign_re(), "dollar_sign");
}

std::optional<ParsedDecision> extract_choice(std::string_view text) {
    static const std::regex negative(
        R"((?:\bnot\s+(?:to\s+)?|n't\s+|n’t\s+|\bcannot\s+|\bnever\s+)trust\b|\bdistrust\b|\bdeclin(?:e|ed|ing)\b)",
        std::regex::icase);
    static const std::regex affirmative(
        R"(\bi\s+(?:will\s+|would\s+|'ll\s+|shall\s+)?(?:choose\s+to\s+|decide\s+to\s+)?trust\b|\bchoose\s+(?:to\s+)?trust\b|\bdecided?\s+to\s+trust\b|\btrust\s+(?:the\s+other\s+player|the\s+bet|them|him|her)\b)",
        std::regex::icase);

    const auto sentences = split_sentences(text);
    for (auto it = sentences.rbegin(); it != sentences.rend(); ++it) {
        const std::string s(text.substr(it->begin, it->end - it->begin));
        std::vector<TextSpan> neg;
        for (auto m = std::sregex_iterator(s.begin(), s.end(), negative); m != std::sregex_iterator(); ++m) {
            const auto b = static_cast<std::size_t>(m->position(0));
            neg.push_back({b, b + static_cast<std::size_t>(m->length(0))});
        }
        std::vector<TextSpan> pos;
        for (auto m = std::sregex_iterator(s.begin(), s.end(), affirmative); m != std::sregex_iterator(); ++m) {
            const auto b = static_cast<std::size_t>(m->position(0));
            const TextSpan span{b, b + static_cast<std::size_t>(m->length(0))};
            bool overlaps = false;
            for (const auto &n : neg)
                if (span.begin < n.end && n.begin < span.end) overlaps = true;
            if (!overlaps) pos.push_back(span);
        }
        if (neg.empty() && pos.empty()) continue;
        if (!neg.empty() && !pos.empty()) return std::nullopt;
        const TextSpan local = neg.empty() ? pos.back() : neg.back();
        return ParsedDecision{neg.empty() ? TrustChoice::Trust : TrustChoice::NotTrust,
                              TextSpan{it->begin + local.begin, it->begin + local.end},
                              neg.empty() ? "affirmative_phrase" : "negated_phrase"};
    }
    return std::nullopt;
}

std::string BdiSegments::belief_text(std::string_view source) const { return segment_text(source, belief); }
std::string BdiSegments::desire_text(std::string_view source) const { return segment_text(source, desire); }
std::string BdiSegments::intention_text(std::string_view source) const { return segment_text(source, intention); }

BdiSegments extract_bdi(std::string_view text) {
    static const std::regex cues[3] = {
        std::regex(R"(\bbelie(?:f|fs|ve|ves|ved|ving)\b)", std::regex::icase),
        std::regex(R"(\bdesir(?:e|es|ed)\b)", std::regex::icase),
        std::regex(R"(\bintend(?:s|ed|ing)?\b|\bintentions?\b)", std::regex::icase),
    };
    static const std::regex finally_re(R"(^finally\b)", std::regex::icase);

    const auto sentences = split_sentences(text);
    // For each cue kind, the index of the sentence that opens its segment.
    std::array<std::optional<std::size_t>, 3> opener{};
    std::vector<int> opened_by(sentences.size(), -1);
    for (std::size_t si = 0; si < sentences.size(); ++si) {
        const std::string s(text.substr(sentences[si].begin, sentences[si].end - sentences[si].begin));
        int best = -1;
        std::ptrdiff_t best_pos = 0;
        for (int k = 0; k < 3; ++k) {
            if (opener[k]) continue;
            std::smatch m;
            if (std::regex_search(s, m, cues[k]) && (best < 0 || m.position(0) < best_pos)) {
                best = k;
                best_pos = m.position(0);
            }
        }
        if (best >= 0) {
            opener[best] = si;
            opened_by[si] = best;
        }
    }

    std::vector<bool> stops(sentences.size(), false);
    for (std::size_t si = 0; si < sentences.size(); ++si) {
        const std::string s(text.substr(sentences[si].begin, sentences[si].end - sentences[si].begin));
        stops[si] = opened_by[si] >= 0 || std::regex_search(s, finally_re);
    }

    BdiSegments out;
    std::array<std::optional<TextSpan> *, 3> slots{&out.belief, &out.desire, &out.intention};
    std::vector<char> covered(text.size(), 0);
    for (int k = 0; k < 3; ++k) {
        if (!opener[k]) continue;
        const std::size_t first = *opener[k];
        std::size_t last = first;
        while (last + 1 < sentences.size() && !stops[last + 1]) ++last;
        const TextSpan span{sentences[first].begin, sentences[last].end};
        *slots[k] = span;
        for (std::size_t i = span.begin; i < span.end; ++i) covered[i] = 1;
    }
    for (std::size_t i = 0; i < text.size(); ++i)
        if (!covered[i]) out.residual += text[i];
    return out;
}

bool classify_validity(const std::optional<ParsedDecision> &decision, const MoneyRange &bounds) {
    if (!decision) return false;
    if (!decision->is_amount()) return false;
    return bounds.contains(decision->amount());
}

bool classify_validity(const std::optional<ParsedDecision> &decision) {
    return decision.has_value() && !decision->is_amount();
}

bool is_strictly_positive(const std::optional<ParsedDecision> &decision) {
    return decision && decision->is_amount() && decision->amount() > Money{};
}

std::string canonical_amount_sentence(Money amount) { return "Finally, I will give " + amount.to_string() + " dollars."; }

std::string canonical_choice_sentence(TrustChoice choice) {
    return choice == TrustChoice::Trust ? "Finally, I choose to trust." : "Finally, I choose not to trust.";
}

}  // namespace trustsim
