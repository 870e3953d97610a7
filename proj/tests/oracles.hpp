#pragma once

// Test-only reference implementations, kept independent of the library
// code paths they check.

#include <cstddef>
#include <map>
#include <set>
#include <vector>

namespace oracles {

// Plain recursion over the edit-distance definition, no memoization.
// Exponential; callers keep sequences short.
template <typename T>
size_t levenshtein_recursive(const std::vector<T>& a, const std::vector<T>& b,
                             size_t i = 0, size_t j = 0) {
    if (i == a.size()) return b.size() - j;
    if (j == b.size()) return a.size() - i;
    size_t del = levenshtein_recursive(a, b, i + 1, j) + 1;
    size_t ins = levenshtein_recursive(a, b, i, j + 1) + 1;
    size_t sub = levenshtein_recursive(a, b, i + 1, j + 1) + (a[i] == b[j] ? 0 : 1);
    return std::min(del, std::min(ins, sub));
}

struct WeightedScores {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// Support-weighted multiclass scores computed per class from first
// principles. gold/pred are class indices; pred < 0 marks a rejected
// (malformed) prediction that can never match.
inline WeightedScores weighted_scores_bruteforce(const std::vector<int>& gold,
                                                 const std::vector<int>& pred) {
    WeightedScores out;
    size_t n = gold.size();
    if (n == 0) return out;

    std::set<int> classes(gold.begin(), gold.end());
    size_t correct = 0;
    for (size_t i = 0; i < n; ++i)
        if (pred[i] == gold[i]) ++correct;
    out.accuracy = static_cast<double>(correct) / static_cast<double>(n);

    for (int c : classes) {
        size_t tp = 0, fp = 0, fn = 0, support = 0;
        for (size_t i = 0; i < n; ++i) {
            if (gold[i] == c) ++support;
            if (pred[i] == c && gold[i] == c) ++tp;
            if (pred[i] == c && gold[i] != c) ++fp;
            if (gold[i] == c && pred[i] != c) ++fn;
        }
        double p = (tp + fp) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
        double r = (tp + fn) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
        double f = (p + r) > 0 ? 2.0 * p * r / (p + r) : 0.0;
        double weight = static_cast<double>(support) / static_cast<double>(n);
        out.precision += weight * p;
        out.recall += weight * r;
        out.f1 += weight * f;
    }
    return out;
}

}  // namespace oracles
