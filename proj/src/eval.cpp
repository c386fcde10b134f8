#include "botwin/eval.hpp"

#include "botwin/parallel.hpp"
#include "botwin/random.hpp"
#include "botwin/text.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

namespace botwin {

std::vector<int> apply_threshold(std::span<const double> probas, double threshold) {
    std::vector<int> out(probas.size());
    std::transform(probas.begin(), probas.end(), out.begin(), [threshold](double p) { return p >= threshold ? 1 : 0; });
    return out;
}

ConfusionMatrix confusion_matrix(std::span<const int> predicted, std::span<const int> actual) {
    if (predicted.size() != actual.size()) throw ContractError("confusion_matrix: length mismatch");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const bool p = predicted[i] != 0;
        const bool a = actual[i] != 0;
        if (p && a) ++cm.tp;
        else if (p) ++cm.fp;
        else if (a) ++cm.fn;
        else ++cm.tn;
    }
    return cm;
}

EvalReport metrics_from_confusion(const ConfusionMatrix& cm, double threshold) {
    EvalReport r;
    r.confusion = cm;
    r.threshold = threshold;
    const auto tp = static_cast<double>(cm.tp);
    if (cm.total() > 0) r.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
    if (cm.tp + cm.fp > 0) r.precision = tp / static_cast<double>(cm.tp + cm.fp);
    else r.precision_undefined = true;
    if (cm.tp + cm.fn > 0) r.recall = tp / static_cast<double>(cm.tp + cm.fn);
    else r.recall_undefined = true;
    if (r.precision + r.recall > 0.0) r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
    else r.f1_undefined = true;
    return r;
}

EvalReport compute_metrics(std::span<const double> probas, std::span<const int> labels, double threshold) {
    if (probas.size() != labels.size()) throw ContractError("compute_metrics: length mismatch");
    if (probas.empty()) throw ContractError("compute_metrics: no predictions");
    const auto predicted = apply_threshold(probas, threshold);
    return metrics_from_confusion(confusion_matrix(predicted, labels), threshold);
}

RocCurve roc_auc(std::span<const double> probas, std::span<const int> labels) {
    if (probas.size() != labels.size()) throw ContractError("roc_auc: length mismatch");
    const auto positives = static_cast<std::size_t>(std::count_if(labels.begin(), labels.end(), [](int l) { return l != 0; }));
    const std::size_t negatives = labels.size() - positives;
    if (positives == 0 || negatives == 0) throw ContractError("roc_auc: both classes must be present");

    std::vector<std::size_t> order(probas.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return probas[a] > probas[b]; });

    RocCurve curve;
    curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
    std::size_t tp = 0, fp = 0;
    double auc = 0.0;
    for (std::size_t i = 0; i < order.size();) {
        const double score = probas[order[i]];
        for (; i < order.size() && probas[order[i]] == score; ++i) (labels[order[i]] != 0 ? tp : fp)++;
        RocPoint p{score, static_cast<double>(fp) / static_cast<double>(negatives),
                   static_cast<double>(tp) / static_cast<double>(positives)};
        const RocPoint& prev = curve.points.back();
        auc += (p.fpr - prev.fpr) * (p.tpr + prev.tpr) / 2.0;
        curve.points.push_back(p);
    }
    curve.auc = auc;
    return curve;
}

EvalReport evaluate(std::span<const double> probas, std::span<const int> labels, double threshold) {
    EvalReport r = compute_metrics(probas, labels, threshold);
    const bool has_pos = std::any_of(labels.begin(), labels.end(), [](int l) { return l != 0; });
    const bool has_neg = std::any_of(labels.begin(), labels.end(), [](int l) { return l == 0; });
    if (has_pos && has_neg) {
        auto curve = roc_auc(probas, labels);
        r.roc = std::move(curve.points);
        r.auc = curve.auc;
    }
    return r;
}

IndexSplit split_indices(std::span<const int> labels, double fraction, std::uint64_t seed, bool stratify) {
    if (!(fraction > 0.0 && fraction < 1.0)) throw ContractError("split: fraction must be in (0, 1)");
    if (labels.size() < 2) throw ContractError("split: need at least two rows");
    Rng rng(seed);
    IndexSplit out;
    auto take = [&](std::vector<std::size_t> idx) {
        std::shuffle(idx.begin(), idx.end(), rng);
        const auto n_train = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(idx.size())));
        out.train.insert(out.train.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
        out.test.insert(out.test.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
    };
    if (stratify) {
        std::vector<std::size_t> neg, pos;
        for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] != 0 ? pos : neg).push_back(i);
        take(std::move(neg));
        take(std::move(pos));
    } else {
        std::vector<std::size_t> all(labels.size());
        std::iota(all.begin(), all.end(), std::size_t{0});
        take(std::move(all));
    }
    return out;
}

std::pair<Dataset, Dataset> split_train_test(const Dataset& data, double fraction, std::uint64_t seed,
                                             bool stratify) {
    const std::span<const int> labels(data.y.data(), data.size());
    const IndexSplit s = split_indices(labels, fraction, seed, stratify);
    return {data.subset(s.train), data.subset(s.test)};
}

std::vector<std::vector<std::size_t>> kfold_indices(std::span<const int> labels, int k, std::uint64_t seed,
                                                    bool stratify) {
    if (k < 2) throw ContractError("kfold: k must be at least 2");
    const std::size_t n = labels.size();
    if (static_cast<std::size_t>(k) > n) throw ContractError("kfold: more folds than rows");
    Rng rng(seed);
    std::vector<std::size_t> order;
    order.reserve(n);
    if (stratify) {
        // Shuffle each class, then deal rows round-robin so every fold gets its share.
        std::vector<std::size_t> neg, pos;
        for (std::size_t i = 0; i < n; ++i) (labels[i] != 0 ? pos : neg).push_back(i);
        std::shuffle(neg.begin(), neg.end(), rng);
        std::shuffle(pos.begin(), pos.end(), rng);
        order = neg;
        order.insert(order.end(), pos.begin(), pos.end());
        std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
        for (std::size_t i = 0; i < n; ++i) folds[i % static_cast<std::size_t>(k)].push_back(order[i]);
        return folds;
    }
    order.resize(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
    const std::size_t base = n / static_cast<std::size_t>(k);
    const std::size_t extra = n % static_cast<std::size_t>(k);
    std::size_t pos = 0;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        const std::size_t size = base + (f < extra ? 1 : 0);
        folds[f].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                        order.begin() + static_cast<std::ptrdiff_t>(pos + size));
        pos += size;
    }
    return folds;
}

KFoldResult kfold(const Dataset& data, int k, std::uint64_t seed, const Trainer& trainer, double threshold,
                  unsigned jobs, bool stratify) {
    KFoldResult result;
    const std::span<const int> labels(data.y.data(), data.size());
    result.folds = kfold_indices(labels, k, seed, stratify);
    result.reports.resize(result.folds.size());

    parallel_for(result.folds.size(), jobs, [&](std::size_t f) {
        std::vector<std::size_t> train_rows;
        for (std::size_t g = 0; g < result.folds.size(); ++g)
            if (g != f) train_rows.insert(train_rows.end(), result.folds[g].begin(), result.folds[g].end());
        std::sort(train_rows.begin(), train_rows.end());
        const Dataset train = data.subset(train_rows);
        const Dataset test = data.subset(result.folds[f]);
        const std::vector<double> probas = trainer(train, test);
        if (probas.size() != test.size()) throw ContractError("kfold: trainer returned wrong number of scores");
        result.reports[f] = evaluate(probas, std::span<const int>(test.y.data(), test.size()), threshold);
    });

    EvalReport& mean = result.mean;
    mean.threshold = threshold;
    const auto folds = static_cast<double>(result.reports.size());
    bool all_auc = true;
    double auc_sum = 0.0;
    for (const auto& r : result.reports) {
        mean.confusion.tp += r.confusion.tp;
        mean.confusion.fp += r.confusion.fp;
        mean.confusion.fn += r.confusion.fn;
        mean.confusion.tn += r.confusion.tn;
        mean.accuracy += r.accuracy;
        mean.precision += r.precision;
        mean.recall += r.recall;
        mean.f1 += r.f1;
        mean.precision_undefined |= r.precision_undefined;
        mean.recall_undefined |= r.recall_undefined;
        mean.f1_undefined |= r.f1_undefined;
        if (r.auc) auc_sum += *r.auc;
        else all_auc = false;
    }
    mean.accuracy /= folds;
    mean.precision /= folds;
    mean.recall /= folds;
    mean.f1 /= folds;
    if (all_auc) mean.auc = auc_sum / folds;
    return result;
}

void write_report_csv_header(std::ostream& out) {
    out << "name,threshold,tp,fp,fn,tn,accuracy,precision,recall,f1,auc,flags\n";
}

void write_report_csv_row(std::ostream& out, const std::string& name, const EvalReport& r) {
    std::string flags;
    auto add = [&flags](const char* f) {
        if (!flags.empty()) flags += '|';
        flags += f;
    };
    if (r.precision_undefined) add("precision_undefined");
    if (r.recall_undefined) add("recall_undefined");
    if (r.f1_undefined) add("f1_undefined");
    out << name << ',' << text::format_double(r.threshold) << ',' << r.confusion.tp << ',' << r.confusion.fp << ','
        << r.confusion.fn << ',' << r.confusion.tn << ',' << text::format_double17(r.accuracy) << ','
        << text::format_double17(r.precision) << ',' << text::format_double17(r.recall) << ','
        << text::format_double17(r.f1) << ',' << (r.auc ? text::format_double17(*r.auc) : std::string()) << ','
        << flags << '\n';
}

void write_roc_csv(std::ostream& out, std::span<const RocPoint> roc) {
    out << "threshold,fpr,tpr\n";
    for (const auto& p : roc)
        out << (std::isinf(p.threshold) ? std::string("inf") : text::format_double17(p.threshold)) << ','
            << text::format_double17(p.fpr) << ',' << text::format_double17(p.tpr) << '\n';
}

}  // namespace botwin
