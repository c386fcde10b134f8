#pragma once

// Deliberately naive reference implementations. None of them reuse library code.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <random>
#include <set>
#include <vector>

namespace oracle {

// P(score of a random attack > score of a random normal), ties counted 1/2.
inline double mann_whitney_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    double wins = 0.0;
    double pairs = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 1) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] != 0) continue;
            pairs += 1.0;
            if (scores[i] > scores[j]) wins += 1.0;
            else if (scores[i] == scores[j]) wins += 0.5;
        }
    }
    return wins / pairs;
}

template <class T>
double entropy_bits(const std::vector<T>& values) {
    if (values.empty()) return 0.0;
    std::map<T, double> freq;
    for (const auto& v : values) freq[v] += 1.0;
    double h = 0.0;
    for (const auto& [_, c] : freq) {
        const double p = c / static_cast<double>(values.size());
        h += p * std::log2(1.0 / p);
    }
    return h;
}

inline double stddev(const std::vector<double>& v) {
    long double mean = 0;
    for (double x : v) mean += x;
    mean /= static_cast<long double>(v.size());
    long double ss = 0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return static_cast<double>(std::sqrt(ss / static_cast<long double>(v.size())));
}

struct Counts {
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

inline Counts confusion(const std::vector<double>& probas, const std::vector<int>& labels, double threshold) {
    Counts c;
    for (std::size_t i = 0; i < probas.size(); ++i) {
        const bool predicted = !(probas[i] < threshold);
        if (predicted && labels[i] == 1) ++c.tp;
        if (predicted && labels[i] == 0) ++c.fp;
        if (!predicted && labels[i] == 1) ++c.fn;
        if (!predicted && labels[i] == 0) ++c.tn;
    }
    return c;
}

struct BestSplit {
    int feature = -1;  // 0-based
    double threshold = 0.0;
    // Weighted child impurity sum(n_child * gini_child) as the exact fraction num/den.
    long long num = 0;
    long long den = 1;
    double impurity() const { return static_cast<double>(num) / static_cast<double>(den); }
};

// Exhaustive search over every (feature, midpoint) split of the rows in exact
// rational arithmetic. n * gini = 2ab/n for a attacks and b normals.
// Ties: lowest impurity, then lowest feature, then lowest threshold.
inline BestSplit exhaustive_split(const std::vector<std::vector<double>>& rows, const std::vector<int>& y) {
    BestSplit best;
    const std::size_t d = rows.front().size();
    for (std::size_t f = 0; f < d; ++f) {
        std::set<double> distinct;
        for (const auto& r : rows) distinct.insert(r[f]);
        std::vector<double> v(distinct.begin(), distinct.end());
        for (std::size_t k = 0; k + 1 < v.size(); ++k) {
            const double t = (v[k] + v[k + 1]) / 2.0;
            long long nl = 0, al = 0, nr = 0, ar = 0;
            for (std::size_t i = 0; i < rows.size(); ++i) {
                if (rows[i][f] <= t) {
                    ++nl;
                    al += y[i];
                } else {
                    ++nr;
                    ar += y[i];
                }
            }
            const long long num = 2 * (al * (nl - al) * nr + ar * (nr - ar) * nl);
            const long long den = nl * nr;
            bool better = best.feature < 0;
            if (!better) {
                const long long lhs = num * best.den;
                const long long rhs = best.num * den;
                better = lhs < rhs || (lhs == rhs && (static_cast<int>(f) < best.feature ||
                                                      (static_cast<int>(f) == best.feature && t < best.threshold)));
            }
            if (better) best = {static_cast<int>(f), t, num, den};
        }
    }
    return best;
}

}  // namespace oracle
