#pragma once

#include "botwin/error.hpp"
#include "botwin/window.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <iterator>
#include <ranges>
#include <span>
#include <string_view>
#include <vector>

namespace botwin {

inline constexpr int kFeatureCount = 45;

enum class FeatureCategory { Extracted, Analyzed };
enum class FeatureGroup { Connection, IpAddress, Port, Protocol };

struct FeatureDescriptor {
    int id;  // 1-based
    std::string_view name;
    FeatureCategory category;
    FeatureGroup group;
};

/// The 45 window features, ordered by id.
const std::array<FeatureDescriptor, kFeatureCount>& feature_schema();

/// Name of feature `id` (1-based).
std::string_view feature_name(int id);

template <class Scalar>
using FeatureRow = Eigen::Matrix<Scalar, kFeatureCount, 1>;

template <class Scalar>
using FeatureMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, kFeatureCount, Eigen::RowMajor>;

struct FeatureVector {
    int scenario_id = 1;
    std::int64_t window_index = 0;
    FeatureRow<double> x = FeatureRow<double>::Zero();
    int y = 0;
};

/// Row-major design matrix with labels; the unit every model trains on.
struct Dataset {
    FeatureMatrix<double> X;
    Eigen::VectorXi y;
    std::vector<std::int64_t> window_index;

    Eigen::Index rows() const { return X.rows(); }
    std::size_t size() const { return static_cast<std::size_t>(X.rows()); }
    std::size_t positives() const { return static_cast<std::size_t>(y.count()); }

    Dataset subset(std::span<const std::size_t> rows) const;
    static Dataset from_vectors(std::span<const FeatureVector> vectors);
};

// ---------------------------------------------------------------- kernels

/// Shannon entropy in bits of a frequency table. Zero counts contribute
/// nothing; throws ContractError when every count is zero.
template <class Scalar = double, std::ranges::input_range Counts>
Scalar shannon_entropy(const Counts& counts) {
    Scalar total = 0;
    for (const auto c : counts) {
        if (c < 0) throw ContractError("shannon_entropy: negative count");
        total += static_cast<Scalar>(c);
    }
    if (!(total > 0)) throw ContractError("shannon_entropy: distribution is undefined (all counts are zero)");
    Scalar h = 0;
    for (const auto c : counts) {
        if (c == 0) continue;
        const Scalar p = static_cast<Scalar>(c) / total;
        h -= p * std::log2(p);
    }
    return h;
}

/// Entropy of the empirical distribution of `values`, each distinct value a
/// category. Empty input yields 0. Result does not depend on input order.
template <class T>
double value_entropy(std::vector<T> values) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    std::vector<std::size_t> counts;
    for (std::size_t i = 0; i < values.size();) {
        std::size_t j = i;
        while (j < values.size() && values[j] == values[i]) ++j;
        counts.push_back(j - i);
        i = j;
    }
    return shannon_entropy<double>(counts);
}

/// Population standard deviation sqrt(sum((v - mean)^2) / n).
template <class Derived>
typename Derived::Scalar population_stddev(const Eigen::DenseBase<Derived>& values) {
    using Scalar = typename Derived::Scalar;
    if (values.size() == 0) throw ContractError("population_stddev: empty sequence");
    const Scalar mean = values.mean();
    const Scalar ss = (values.derived().array() - mean).square().sum();
    return std::sqrt(ss / static_cast<Scalar>(values.size()));
}

inline double population_stddev(std::span<const double> values) {
    return population_stddev(Eigen::Map<const Eigen::ArrayXd>(values.data(), static_cast<Eigen::Index>(values.size())));
}

enum class IpClass { A, B, C, NA };

/// Classful IPv4 bucket from the first octet; anything unparseable is NA.
IpClass ip_class(std::string_view addr);

/// Computes the 45 features of one non-empty window. The result is
/// independent of the order of `window.flows`.
FeatureVector extract_features(const WindowAggregate& window);

std::vector<FeatureVector> extract_all(std::span<const WindowAggregate> windows, unsigned jobs = 1);

// ---------------------------------------------------------------- CSV

/// Header `window_index,<45 feature names>,label`, 17 significant digits.
void write_feature_csv(std::ostream& out, std::span<const FeatureVector> vectors);
void write_feature_csv(std::ostream& out, const Dataset& data);
Dataset read_feature_csv(std::istream& in);
Dataset read_feature_csv_file(const std::string& path);

}  // namespace botwin
