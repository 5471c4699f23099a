#include <doctest.h>

#include <random>

#include "copyguard/metrics.hpp"
#include "copyguard/stubs.hpp"

using namespace copyguard;

namespace {

// ---------------------------------------------------------------------------
// Independent oracles. These stay brute force on purpose; they share no code
// with the implementations they check.
// ---------------------------------------------------------------------------

// Clipped n-gram overlap by direct scanning, no hash maps.
double oracle_rouge_n(const Tokens& cand, const Tokens& ref, int n) {
    auto ngram_at = [n](const Tokens& t, std::size_t i) {
        return std::vector<std::string>(t.begin() + i, t.begin() + i + n);
    };
    if (static_cast<int>(ref.size()) < n) return 0.0;

    std::size_t total_ref = ref.size() - n + 1;
    std::vector<bool> counted(total_ref, false);
    std::size_t overlap = 0;
    for (std::size_t i = 0; i < total_ref; ++i) {
        if (counted[i]) continue;
        auto gram = ngram_at(ref, i);
        std::size_t c_ref = 0;
        for (std::size_t j = 0; j < total_ref; ++j) {
            if (ngram_at(ref, j) == gram) {
                c_ref++;
                counted[j] = true;
            }
        }
        std::size_t c_gen = 0;
        if (static_cast<int>(cand.size()) >= n) {
            for (std::size_t j = 0; j + n <= cand.size(); ++j) {
                if (ngram_at(cand, j) == gram) c_gen++;
            }
        }
        overlap += std::min(c_ref, c_gen);
    }
    return static_cast<double>(overlap) / static_cast<double>(total_ref);
}

bool is_subsequence(const Tokens& needle, const Tokens& haystack) {
    std::size_t i = 0;
    for (const auto& tok : haystack) {
        if (i < needle.size() && needle[i] == tok) ++i;
    }
    return i == needle.size();
}

// LCS length by exhaustive subsequence enumeration of the shorter sequence.
std::size_t oracle_lcs(const Tokens& a, const Tokens& b) {
    const Tokens& small = a.size() <= b.size() ? a : b;
    const Tokens& large = a.size() <= b.size() ? b : a;
    REQUIRE(small.size() <= 16);
    std::size_t best = 0;
    for (std::uint32_t mask = 0; mask < (1u << small.size()); ++mask) {
        Tokens sub;
        for (std::size_t i = 0; i < small.size(); ++i) {
            if (mask & (1u << i)) sub.push_back(small[i]);
        }
        if (sub.size() > best && is_subsequence(sub, large)) best = sub.size();
    }
    return best;
}

Tokens random_tokens(std::mt19937_64& rng, int max_len) {
    static const std::vector<std::string> alphabet = {"a", "b", "c"};
    std::uniform_int_distribution<int> len(0, max_len);
    std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
    Tokens out;
    int n = len(rng);
    for (int i = 0; i < n; ++i) out.push_back(alphabet[pick(rng)]);
    return out;
}

}  // namespace

TEST_CASE("tokenize basics") {
    CHECK(tokenize("Hello, World!") == Tokens{"hello", "world"});
    CHECK(tokenize("") == Tokens{});
    CHECK(tokenize("a  b\tc") == Tokens{"a", "b", "c"});
    CHECK(tokenize("I'd say so.") == Tokens{"i'd", "say", "so"});
    CHECK(tokenize("...---...") == Tokens{});
    // Unicode whitespace and French accents survive.
    CHECK(tokenize("caf\xC3\xA9\xC2\xA0noir") == Tokens{"caf\xC3\xA9", "noir"});
    CHECK(tokenize("\xC3\x89T\xC3\x89") == Tokens{"\xC3\xA9t\xC3\xA9"});
}

TEST_CASE("rouge_n frozen examples") {
    CHECK(rouge_n({"a", "b"}, {"a", "b"}, 1) == doctest::Approx(1.0));
    CHECK(rouge_n({"x", "y"}, {"a", "b"}, 1) == doctest::Approx(0.0));
    // Clipped unigram counts, checked against the brute-force oracle.
    Tokens cand{"a", "b", "a"}, ref{"a", "a", "c"};
    CHECK(oracle_rouge_n(cand, ref, 1) == doctest::Approx(2.0 / 3.0));
    CHECK(rouge_n(cand, ref, 1) == doctest::Approx(2.0 / 3.0));
    // No reference n-grams -> 0.
    CHECK(rouge_n({"a"}, {}, 1) == 0.0);
    CHECK(rouge_n({"a", "b"}, {"a"}, 2) == 0.0);
    CHECK_THROWS_AS(rouge_n({}, {}, 0), std::invalid_argument);
}

TEST_CASE("lcs_len frozen examples") {
    Tokens x{"p", "q", "r"};
    CHECK(lcs_len(x, x) == 3);
    CHECK(lcs_len({"a", "b", "c"}, {"b", "c", "d"}) == 2);
    CHECK(oracle_lcs({"a", "b", "c"}, {"b", "c", "d"}) == 2);
    CHECK(lcs_len(x, {}) == 0);
    CHECK(lcs_len({}, x) == 0);
}

TEST_CASE("rouge_l frozen examples") {
    auto same = rouge_l(std::string("one two three"), std::string("one two three"));
    CHECK(same.recall == doctest::Approx(1.0));
    CHECK(same.precision == doctest::Approx(1.0));
    CHECK(same.f1 == doctest::Approx(1.0));

    // LCS = 2 by hand and by the enumeration oracle.
    CHECK(oracle_lcs(tokenize("a b c d"), tokenize("a c")) == 2);
    auto s = rouge_l(std::string("a b c d"), std::string("a c"));
    CHECK(s.recall == doctest::Approx(1.0));
    CHECK(s.precision == doctest::Approx(0.5));
    CHECK(s.f1 == doctest::Approx(2.0 / 3.0));

    auto empty = rouge_l(Tokens{}, Tokens{"a"});
    CHECK(empty.precision == 0.0);
    CHECK(empty.f1 == 0.0);
    CHECK_THROWS_AS(rouge_l(Tokens{"a"}, Tokens{"a"}, 0.0), std::invalid_argument);
}

TEST_CASE("rouge agrees with oracles on random token pairs") {
    std::mt19937_64 rng(7);
    for (int it = 0; it < 400; ++it) {
        Tokens a = random_tokens(rng, 10);
        Tokens b = random_tokens(rng, 10);
        CAPTURE(it);
        CHECK(lcs_len(a, b) == oracle_lcs(a, b));
        CHECK(lcs_len(a, b) <= std::min(a.size(), b.size()));
        for (int n = 1; n <= 3; ++n)
            CHECK(rouge_n(a, b, n) == doctest::Approx(oracle_rouge_n(a, b, n)).epsilon(1e-12));

        auto s = rouge_l(a, b);
        CHECK(s.recall >= 0.0);
        CHECK(s.recall <= 1.0);
        CHECK(s.precision >= 0.0);
        CHECK(s.precision <= 1.0);
        CHECK(s.f1 >= 0.0);
        CHECK(s.f1 <= 1.0);

        // Exchange symmetry at beta = 1.
        auto t = rouge_l(b, a);
        CHECK(s.recall == doctest::Approx(t.precision));
        CHECK(s.precision == doctest::Approx(t.recall));
        CHECK(s.f1 == doctest::Approx(t.f1));
    }
}

TEST_CASE("cosine_sim") {
    std::vector<double> v{0.3, -1.2, 4.0};
    CHECK(cosine_sim(v, v) == doctest::Approx(1.0));
    CHECK(cosine_sim({1, 0}, {0, 1}) == doctest::Approx(0.0));
    CHECK(cosine_sim({1, 0}, {1, 1}) == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK_THROWS_AS(cosine_sim({1, 0}, {1, 0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(cosine_sim({0, 0}, {1, 0}), std::invalid_argument);
}

TEST_CASE("bert_score under the one-hot embedder") {
    OneHotEmbedding emb;

    auto identity = bert_score("alpha beta gamma", "alpha beta gamma", emb);
    CHECK(identity.p == doctest::Approx(1.0));
    CHECK(identity.r == doctest::Approx(1.0));
    CHECK(identity.f == doctest::Approx(1.0));

    auto disjoint = bert_score("alpha beta", "gamma delta", emb);
    CHECK(disjoint.p == doctest::Approx(0.0));
    CHECK(disjoint.r == doctest::Approx(0.0));
    CHECK(disjoint.f == doctest::Approx(0.0));

    // Exhaustive max-matching by hand: one shared token on each side.
    auto half = bert_score("a b", "a c", emb);
    CHECK(half.p == doctest::Approx(0.5));
    CHECK(half.r == doctest::Approx(0.5));
    CHECK(half.f == doctest::Approx(0.5));

    CHECK_THROWS_AS(bert_score("", "a", emb), std::invalid_argument);
    CHECK_THROWS_AS(bert_score("a", "...", emb), std::invalid_argument);
}

TEST_CASE("one-hot bert_score degenerates to exact token matching") {
    std::mt19937_64 rng(11);
    for (int it = 0; it < 50; ++it) {
        Tokens a = random_tokens(rng, 6);
        Tokens b = random_tokens(rng, 6);
        if (a.empty() || b.empty()) continue;
        std::string sa, sb;
        for (const auto& t : a) sa += t + " ";
        for (const auto& t : b) sb += t + " ";

        OneHotEmbedding emb;
        auto s = bert_score(sa, sb, emb);

        std::size_t matched = 0;
        for (const auto& tok : a)
            if (std::find(b.begin(), b.end(), tok) != b.end()) ++matched;
        CHECK(s.p == doctest::Approx(static_cast<double>(matched) / a.size()));
    }
}

TEST_CASE("judge_refusal parses standalone yes/no") {
    ScriptedChat yes("yes"), no("No."), maybe("maybe"), tricky("Eyes? Noise... no");
    CHECK(judge_refusal("ctx", "q", "resp", yes) == 1);
    CHECK(judge_refusal("ctx", "q", "resp", no) == 0);
    CHECK_THROWS_AS(judge_refusal("ctx", "q", "resp", maybe), ProviderError);
    // "Eyes" and "Noise" are not standalone words.
    CHECK(judge_refusal("ctx", "q", "resp", tricky) == 0);
}

TEST_CASE("judge_refusal substitutes the vendored prompt") {
    struct Capture : ChatProvider {
        std::string sys, usr;
        std::string complete(const std::optional<std::string>& system,
                             const std::string& user) override {
            sys = system.value_or("");
            usr = user;
            return "no";
        }
    } capture;
    judge_refusal("CTX-42", "QUERY-42", "RESP-42", capture);
    CHECK(capture.sys.find("rejection to an instruction") != std::string::npos);
    CHECK(capture.usr.find("- Context: CTX-42") != std::string::npos);
    CHECK(capture.usr.find("- User Query: QUERY-42") != std::string::npos);
    CHECK(capture.usr.find("- Model Response: RESP-42") != std::string::npos);
    CHECK(capture.usr.find("{context}") == std::string::npos);
}

TEST_CASE("aggregate_compliance nested mean") {
    CHECK(aggregate_compliance({{1.0, 1.0}, {1.0, 1.0}}) == doctest::Approx(1.0));
    CHECK(aggregate_compliance({{1.0, 0.0}, {0.0, 0.0}}) == doctest::Approx(0.25));
    CHECK(aggregate_compliance({{0.2, 0.4, 0.6}}) == doctest::Approx(0.4));
    CHECK_THROWS_AS(aggregate_compliance({}), std::invalid_argument);
    CHECK_THROWS_AS(aggregate_compliance({{}}), std::invalid_argument);
    CHECK_THROWS_AS(aggregate_compliance({{1.0}, {1.0, 0.5}}), std::invalid_argument);
}

TEST_CASE("aggregate_compliance properties") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> dim(1, 8);

    for (int it = 0; it < 100; ++it) {
        int rows = dim(rng), cols = dim(rng);
        std::vector<std::vector<double>> m(rows, std::vector<double>(cols));
        double grand = 0.0;
        for (auto& row : m) {
            for (auto& v : row) {
                v = unit(rng);
                grand += v;
            }
        }
        grand /= rows * cols;
        CHECK(aggregate_compliance(m) == doctest::Approx(grand).epsilon(1e-12));

        // Row and column permutation invariance.
        auto shuffled = m;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        std::vector<std::size_t> perm(static_cast<std::size_t>(cols));
        std::iota(perm.begin(), perm.end(), 0u);
        std::shuffle(perm.begin(), perm.end(), rng);
        for (auto& row : shuffled) {
            auto orig = row;
            for (int c = 0; c < cols; ++c) row[c] = orig[perm[c]];
        }
        CHECK(aggregate_compliance(shuffled) == doctest::Approx(aggregate_compliance(m)));

        double c = unit(rng);
        std::vector<std::vector<double>> constant(rows, std::vector<double>(cols, c));
        CHECK(aggregate_compliance(constant) == doctest::Approx(c));
    }
}

TEST_CASE("percent formatting rounds half-even") {
    CHECK(format_pct(1.0) == "100.00");
    CHECK(format_pct(0.666666) == "66.67");
    CHECK(format_pct(0.0) == "0.00");
    // 1/32 and 3/32 are exact in binary; scaled they are true .5 ties.
    CHECK(percent_2dp(0.03125) == doctest::Approx(3.12));  // 312.5 -> 312
    CHECK(percent_2dp(0.09375) == doctest::Approx(9.38));  // 937.5 -> 938
}
