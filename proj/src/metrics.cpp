#include "fcmdnn/metrics.hpp"

#include "fcmdnn/error.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

namespace fcmdnn {

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) noexcept {
    tp += other.tp;
    fp += other.fp;
    tn += other.tn;
    fn += other.fn;
    return *this;
}

ConfusionMatrix confusion(const std::vector<int>& predicted, const std::vector<int>& actual, int positive_class) {
    if (predicted.size() != actual.size()) {
        throw Error(ErrorKind::shape_mismatch, "predicted and actual label lists differ in length");
    }
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const bool pred_pos = predicted[i] == positive_class;
        const bool act_pos = actual[i] == positive_class;
        if (act_pos) {
            ++(pred_pos ? cm.tp : cm.fn);
        } else {
            ++(pred_pos ? cm.fp : cm.tn);
        }
    }
    return cm;
}

std::optional<double> criterion(const MetricsReport& r, const std::string& name) {
    if (name == "acc") return r.acc;
    if (name == "ppv") return r.ppv;
    if (name == "sen") return r.sen;
    if (name == "spc") return r.spc;
    if (name == "f1") return r.f1;
    if (name == "fpr") return r.fpr;
    if (name == "fnr") return r.fnr;
    if (name == "auc") return r.auc;
    throw Error(ErrorKind::configuration, "unknown criterion " + name);
}

namespace {

std::optional<double>& slot(MetricsReport& r, const std::string& name) {
    if (name == "acc") return r.acc;
    if (name == "ppv") return r.ppv;
    if (name == "sen") return r.sen;
    if (name == "spc") return r.spc;
    if (name == "f1") return r.f1;
    if (name == "fpr") return r.fpr;
    if (name == "fnr") return r.fnr;
    return r.auc;
}

std::optional<double> ratio(long num, long den, MetricsReport& r, const char* name, const char* cause) {
    if (den == 0) {
        r.undefined[name] = cause;
        return std::nullopt;
    }
    return static_cast<double>(num) / static_cast<double>(den);
}

} // namespace

MetricsReport report(const ConfusionMatrix& cm) {
    if (cm.tp < 0 || cm.fp < 0 || cm.tn < 0 || cm.fn < 0) throw Error(ErrorKind::domain, "negative count");
    if (cm.total() == 0) throw Error(ErrorKind::insufficient_data, "empty confusion matrix");
    MetricsReport r;
    r.cm = cm;
    r.acc = ratio(cm.tp + cm.tn, cm.fp + cm.fn + cm.tp + cm.tn, r, "acc", "no samples");
    r.ppv = ratio(cm.tp, cm.tp + cm.fp, r, "ppv", "no positive predictions (TP+FP=0)");
    r.spc = ratio(cm.tn, cm.tn + cm.fp, r, "spc", "no actual negatives (TN+FP=0)");
    r.sen = ratio(cm.tp, cm.tp + cm.fn, r, "sen", "no actual positives (TP+FN=0)");
    r.f1 = ratio(2 * cm.tp, 2 * cm.tp + cm.fp + cm.fn, r, "f1", "2TP+FP+FN=0");
    if (r.spc) {
        r.fpr = 1.0 - *r.spc;
    } else {
        r.undefined["fpr"] = r.undefined["spc"];
    }
    if (r.sen) {
        r.fnr = 1.0 - *r.sen;
    } else {
        r.undefined["fnr"] = r.undefined["sen"];
    }
    r.undefined["auc"] = "not computed";
    return r;
}

RocResult roc_auc(const std::vector<double>& scores, const std::vector<int>& actual, int positive_class) {
    if (scores.size() != actual.size()) throw Error(ErrorKind::shape_mismatch, "scores and labels differ in length");
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    long pos = 0;
    for (const int y : actual) pos += y == positive_class ? 1 : 0;
    const long neg = static_cast<long>(actual.size()) - pos;
    if (pos == 0 || neg == 0) throw Error(ErrorKind::undefined_auc, "AUC needs both classes present");

    // Concordant pairs counted in half-units so ties stay exact in integers.
    RocResult out;
    out.curve.push_back({0.0, 0.0});
    long tp = 0;
    long fp = 0;
    long long twice_concordant = 0;
    for (std::size_t i = 0; i < order.size();) {
        long group_pos = 0;
        long group_neg = 0;
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            ++(actual[order[j]] == positive_class ? group_pos : group_neg);
            ++j;
        }
        // Positives in this group beat every negative ranked strictly below
        // (neg - fp - group_neg) and tie with the group's negatives.
        twice_concordant += 2LL * group_pos * (neg - fp - group_neg) + 1LL * group_pos * group_neg;
        tp += group_pos;
        fp += group_neg;
        out.curve.push_back({static_cast<double>(fp) / static_cast<double>(neg),
                             static_cast<double>(tp) / static_cast<double>(pos)});
        i = j;
    }
    out.auc = static_cast<double>(twice_concordant) / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
    return out;
}

double trapezoid_area(const std::vector<RocPoint>& curve) {
    double area = 0.0;
    for (std::size_t i = 1; i < curve.size(); ++i) {
        area += (curve[i].fpr - curve[i - 1].fpr) * (curve[i].tpr + curve[i - 1].tpr) * 0.5;
    }
    return area;
}

FoldEvaluation evaluate_fold(const std::vector<int>& predicted, const std::vector<double>& scores,
                             const std::vector<int>& actual) {
    FoldEvaluation fe;
    fe.report = report(confusion(predicted, actual));
    fe.scores = scores;
    fe.actual = actual;
    try {
        fe.report.auc = roc_auc(scores, actual).auc;
        fe.report.undefined.erase("auc");
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::undefined_auc) throw;
        fe.report.undefined["auc"] = "single-class test set";
    }
    return fe;
}

Aggregate aggregate(const std::vector<FoldEvaluation>& folds) {
    if (folds.empty()) throw Error(ErrorKind::insufficient_data, "no fold reports to aggregate");
    ConfusionMatrix total;
    std::vector<double> scores;
    std::vector<int> actual;
    for (const auto& f : folds) {
        total += f.report.cm;
        scores.insert(scores.end(), f.scores.begin(), f.scores.end());
        actual.insert(actual.end(), f.actual.begin(), f.actual.end());
    }

    Aggregate agg;
    agg.pooled = report(total);
    try {
        agg.pooled.auc = roc_auc(scores, actual).auc;
        agg.pooled.undefined.erase("auc");
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::undefined_auc) throw;
        agg.pooled.undefined["auc"] = "single-class data";
    }

    agg.mean.cm = total;
    for (const auto& name : kCriteria) {
        double sum = 0.0;
        int count = 0;
        for (const auto& f : folds) {
            if (const auto v = criterion(f.report, name)) {
                sum += *v;
                ++count;
            }
        }
        agg.mean.defined_counts[name] = count;
        if (count > 0) {
            slot(agg.mean, name) = sum / count;
        } else {
            agg.mean.undefined[name] = "undefined in every fold";
        }
    }
    return agg;
}

std::string csv_header() { return "ACC,PPV,SEN,SPC,F1-Score,FPR,FNR,AUC"; }

std::string csv_row(const MetricsReport& r) {
    std::string row;
    for (std::size_t i = 0; i < kCriteria.size(); ++i) {
        if (i) row += ',';
        const auto v = MetricsReport::percent(criterion(r, kCriteria[i]));
        if (v) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.2f", *v);
            row += buf;
        } else {
            row += "NA";
        }
    }
    return row;
}

} // namespace fcmdnn
