#pragma once

#include "botwin/features.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace botwin {

struct ConfusionMatrix {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t tn = 0;

    std::size_t total() const { return tp + fp + fn + tn; }
    bool operator==(const ConfusionMatrix&) const = default;
};

struct RocPoint {
    double threshold;  // +inf for the (0,0) origin
    double fpr;
    double tpr;
};

struct EvalReport {
    ConfusionMatrix confusion;
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double threshold = 0.5;
    // Set when the metric's denominator was zero and 0 was reported instead.
    bool precision_undefined = false;
    bool recall_undefined = false;
    bool f1_undefined = false;
    std::vector<RocPoint> roc;
    std::optional<double> auc;
};

/// Attack (1) iff proba >= threshold.
std::vector<int> apply_threshold(std::span<const double> probas, double threshold);

ConfusionMatrix confusion_matrix(std::span<const int> predicted, std::span<const int> actual);

/// Accuracy, precision, recall and F1 from a confusion matrix. Degenerate
/// denominators yield 0 with the matching *_undefined flag set.
EvalReport metrics_from_confusion(const ConfusionMatrix& cm, double threshold = 0.5);

/// Thresholds `probas` and scores them against `labels`. No ROC/AUC.
EvalReport compute_metrics(std::span<const double> probas, std::span<const int> labels, double threshold);

struct RocCurve {
    std::vector<RocPoint> points;  // from (0,0) to (1,1), one step per distinct score
    double auc = 0.0;
};

/// ROC by sweeping every distinct score (ties form one step), AUC by the
/// trapezoid rule. Throws ContractError unless both classes are present.
RocCurve roc_auc(std::span<const double> probas, std::span<const int> labels);

/// compute_metrics plus roc/auc when both classes are present.
EvalReport evaluate(std::span<const double> probas, std::span<const int> labels, double threshold);

// ---------------------------------------------------------------- splitting

struct IndexSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// Seeded shuffle; the first floor(fraction * n) shuffled rows train. With
/// `stratify`, the rule is applied to each label separately.
IndexSplit split_indices(std::span<const int> labels, double fraction, std::uint64_t seed, bool stratify = false);

std::pair<Dataset, Dataset> split_train_test(const Dataset& data, double fraction = 0.7, std::uint64_t seed = 0,
                                             bool stratify = false);

/// k disjoint folds covering [0, n); sizes differ by at most one.
std::vector<std::vector<std::size_t>> kfold_indices(std::span<const int> labels, int k, std::uint64_t seed,
                                                    bool stratify = false);

/// Trains on `train`, returns attack probabilities for every row of `test`.
using Trainer = std::function<std::vector<double>(const Dataset& train, const Dataset& test)>;

struct KFoldResult {
    std::vector<std::vector<std::size_t>> folds;
    std::vector<EvalReport> reports;
    /// Unweighted means of accuracy/precision/recall/F1 (and AUC when every
    /// fold has one); its confusion matrix is the sum over folds.
    EvalReport mean;
};

KFoldResult kfold(const Dataset& data, int k, std::uint64_t seed, const Trainer& trainer, double threshold = 0.5,
                  unsigned jobs = 1, bool stratify = false);

// ---------------------------------------------------------------- CSV

/// Columns: name,threshold,tp,fp,fn,tn,accuracy,precision,recall,f1,auc,flags
void write_report_csv_header(std::ostream& out);
void write_report_csv_row(std::ostream& out, const std::string& name, const EvalReport& r);
/// Columns: threshold,fpr,tpr
void write_roc_csv(std::ostream& out, std::span<const RocPoint> roc);

}  // namespace botwin
