#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fcmdnn {

struct ConfusionMatrix {
    long tp = 0;
    long fp = 0;
    long tn = 0;
    long fn = 0;

    long total() const noexcept { return tp + fp + tn + fn; }
    ConfusionMatrix& operator+=(const ConfusionMatrix& other) noexcept;
    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

/// Counts with `positive_class` (Sick = 1 by default) as the positive label:
/// fp is a negative predicted positive, fn a positive predicted negative.
ConfusionMatrix confusion(const std::vector<int>& predicted, const std::vector<int>& actual, int positive_class = 1);

/// Criteria are std::nullopt when their denominator is zero; `undefined`
/// names the cause for each missing entry.
struct MetricsReport {
    ConfusionMatrix cm;
    std::optional<double> acc;
    std::optional<double> ppv;
    std::optional<double> sen;
    std::optional<double> spc;
    std::optional<double> f1;
    std::optional<double> fpr;
    std::optional<double> fnr;
    std::optional<double> auc;
    std::map<std::string, std::string> undefined;
    /// Mean reports only: how many folds each criterion was averaged over.
    std::map<std::string, int> defined_counts;

    static std::optional<double> percent(const std::optional<double>& v) {
        return v ? std::optional<double>(*v * 100.0) : std::nullopt;
    }
};

/// Criterion names in the fixed report column order.
inline const std::vector<std::string> kCriteria = {"acc", "ppv", "sen", "spc", "f1", "fpr", "fnr", "auc"};

std::optional<double> criterion(const MetricsReport& report, const std::string& name);

/// All threshold criteria from a confusion matrix; auc is left unset.
MetricsReport report(const ConfusionMatrix& cm);

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
};

struct RocResult {
    double auc = 0.0;
    std::vector<RocPoint> curve; // (0,0), one point per distinct threshold (descending), ends at (1,1)
};

/// AUC as P(score of a random positive > random negative), ties count 1/2.
RocResult roc_auc(const std::vector<double>& scores, const std::vector<int>& actual, int positive_class = 1);

/// Trapezoidal area under a curve of (fpr, tpr) points in emission order.
double trapezoid_area(const std::vector<RocPoint>& curve);

struct FoldEvaluation {
    MetricsReport report; // includes auc when both classes are present
    std::vector<double> scores; // sick score per test sample
    std::vector<int> actual;
};

/// Per-fold evaluation from predicted labels and sick scores.
FoldEvaluation evaluate_fold(const std::vector<int>& predicted, const std::vector<double>& scores,
                             const std::vector<int>& actual);

struct Aggregate {
    MetricsReport pooled; // union of matrices and concatenated scores
    MetricsReport mean;   // unweighted mean of defined per-fold values
};

Aggregate aggregate(const std::vector<FoldEvaluation>& folds);

/// Header and row in the fixed column order ACC, PPV, SEN, SPC, F1-Score, FPR,
/// FNR, AUC; values in percent, "NA" when undefined.
std::string csv_header();
std::string csv_row(const MetricsReport& report);

} // namespace fcmdnn
