#pragma once
// Independent checks shared by the unit tests and the acceptance binary.

#include "fcmdnn/fcm.hpp"
#include "fcmdnn/metrics.hpp"
#include "fcmdnn/network.hpp"
#include "fcmdnn/partition.hpp"
#include "fcmdnn/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <string>

namespace oracles {

using namespace fcmdnn;

struct Outcome {
    bool ok = true;
    std::string detail;
    void fail(const std::string& why) {
        if (ok) detail = why;
        ok = false;
    }
};

// ---- FCM ----

struct FcmSuite {
    Outcome outcome;
    double worst_row_error = 0.0;
    double worst_increase = 0.0;
    int runs = 0;
};

inline Matrix random_blobs(Rng& rng, int n, int d, int blobs) {
    Matrix centers(blobs, d);
    for (int i = 0; i < blobs; ++i)
        for (int j = 0; j < d; ++j) centers(i, j) = rng.uniform(-5.0, 5.0);
    Matrix x(n, d);
    for (int k = 0; k < n; ++k) {
        const auto b = static_cast<int>(rng.below(static_cast<std::uint64_t>(blobs)));
        for (int j = 0; j < d; ++j) x(k, j) = centers(b, j) + rng.normal();
    }
    return x;
}

inline FcmSuite fcm_descent_suite(int runs, std::uint64_t seed) {
    FcmSuite s;
    Rng rng(seed);
    for (int r = 0; r < runs; ++r) {
        const int c = 2 + static_cast<int>(rng.below(4));       // 2..5
        const int d = 1 + static_cast<int>(rng.below(8));       // 1..8
        const int n = c + static_cast<int>(rng.below(201 - c)); // c..200
        const Matrix x = random_blobs(rng, n, d, 1 + static_cast<int>(rng.below(5)));
        FcmConfig cfg;
        cfg.num_clusters = c;
        cfg.fuzzifier = rng.uniform(1.3, 3.0);
        cfg.max_iterations = 100;
        cfg.min_gain = r % 2 == 0 ? 1e-4 : 1e-9;
        cfg.seed = rng.next();
        const FcmState st = run_fcm(x, cfg, [&](const FcmIteration& it) {
            for (Eigen::Index k = 0; k < it.memberships.rows(); ++k) {
                const double e = std::abs(it.memberships.row(k).sum() - 1.0);
                s.worst_row_error = std::max(s.worst_row_error, e);
                if (e > 1e-9) s.outcome.fail("row sum off by " + std::to_string(e));
            }
        });
        for (std::size_t t = 1; t < st.objective_history.size(); ++t) {
            const double inc = st.objective_history[t] - st.objective_history[t - 1];
            s.worst_increase = std::max(s.worst_increase, inc);
            if (inc > 1e-12) {
                std::ostringstream o;
                o << "objective rose by " << inc << " in run " << r << " step " << t;
                s.outcome.fail(o.str());
            }
        }
        ++s.runs;
    }
    return s;
}

/// Best objective over all crisp 2-partitions of 1-D points, each side at its mean.
inline double best_crisp_objective(const std::vector<double>& pts) {
    const int n = static_cast<int>(pts.size());
    double best = std::numeric_limits<double>::infinity();
    for (int mask = 1; mask < (1 << n) - 1; ++mask) {
        double sum[2] = {0, 0};
        int cnt[2] = {0, 0};
        for (int i = 0; i < n; ++i) {
            const int side = (mask >> i) & 1;
            sum[side] += pts[static_cast<std::size_t>(i)];
            ++cnt[side];
        }
        double j = 0.0;
        for (int i = 0; i < n; ++i) {
            const int side = (mask >> i) & 1;
            const double diff = pts[static_cast<std::size_t>(i)] - sum[side] / cnt[side];
            j += diff * diff;
        }
        best = std::min(best, j);
    }
    return best;
}

struct CrispSuite {
    Outcome outcome;
    int instances = 0;
};

inline CrispSuite fcm_crisp_oracle_suite(int per_size, std::uint64_t seed) {
    CrispSuite s;
    Rng rng(seed);
    for (int n = 2; n <= 6; ++n) {
        for (int r = 0; r < per_size; ++r) {
            std::vector<double> pts(static_cast<std::size_t>(n));
            for (auto& p : pts) p = rng.uniform(-10.0, 10.0);
            Matrix x(n, 1);
            for (int i = 0; i < n; ++i) x(i, 0) = pts[static_cast<std::size_t>(i)];
            FcmConfig cfg;
            cfg.num_clusters = 2;
            cfg.max_iterations = 1000;
            cfg.min_gain = 1e-13;
            cfg.seed = rng.next();
            const FcmState st = run_fcm(x, cfg);
            const double fuzzy = objective(x, st.memberships, st.centers, cfg.fuzzifier);
            const double crisp = best_crisp_objective(pts);
            if (fuzzy > crisp + 1e-9 * std::max(1.0, crisp)) {
                std::ostringstream o;
                o << "n=" << n << ": fuzzy " << fuzzy << " > crisp " << crisp;
                s.outcome.fail(o.str());
            }
            ++s.instances;
        }
    }
    return s;
}

// ---- gradients ----

struct GradientSuite {
    Outcome outcome;
    double worst_relative_error = 0.0;
    int networks = 0;
    int checked = 0;
    int skipped = 0;
    std::set<std::string> covered;
};

inline NetworkSpec random_spec(Rng& rng, int variant) {
    NetworkSpec spec;
    const int in = 3 + static_cast<int>(rng.below(4));
    const Activation hidden = variant % 4 == 3 ? Activation::sigmoid : Activation::maxout;
    const int depth = 1 + static_cast<int>(rng.below(3));
    int width = in;
    for (int l = 0; l < depth; ++l) {
        const int out = 2 + static_cast<int>(rng.below(5));
        spec.layers.push_back({width, out, hidden, 2 + static_cast<int>(rng.below(2))});
        width = out;
    }
    if (variant % 2 == 0) {
        spec.layers.push_back({width, 1, Activation::sigmoid, 2});
    } else {
        spec.layers.push_back({width, 2 + static_cast<int>(rng.below(4)), Activation::softmax, 2});
    }
    spec.l1 = variant % 3 == 0 ? 0.0 : 1e-5;
    spec.l2 = variant % 5 == 4 ? 1e-3 : 0.0;
    spec.seed = rng.next();
    spec.validate();
    return spec;
}

inline bool same_winners(const Trace& a, const Trace& b) {
    for (std::size_t l = 0; l < a.winners.size(); ++l) {
        if (a.winners[l].size() != b.winners[l].size()) return false;
        if (a.winners[l].size() && a.winners[l] != b.winners[l]) return false;
    }
    return true;
}

inline GradientSuite gradient_suite(int networks, std::uint64_t seed) {
    constexpr double h = 1e-5;
    GradientSuite s;
    Rng rng(seed);
    for (int v = 0; v < networks; ++v) {
        const NetworkSpec spec = random_spec(rng, v);
        NetworkParams params = initialize(spec, spec.seed);
        for (auto& layer : params.layers) {
            for (auto& w : layer.weights) w *= 2.0;
            for (auto& b : layer.biases)
                for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = rng.uniform(-0.5, 0.5);
        }
        const int batch = 1 + static_cast<int>(rng.below(5));
        Eigen::MatrixXd x(spec.input_width(), batch);
        for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = rng.uniform(-1.0, 1.0);
        std::vector<int> labels;
        for (int b = 0; b < batch; ++b) labels.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(spec.class_count()))));
        const Eigen::MatrixXd targets = make_targets(spec, labels);

        const Trace base = forward_batch(spec, params, x);
        const ParamSet grads = backward(spec, params, base, targets);

        auto check = [&](double& slot, double analytic) {
            const double saved = slot;
            slot = saved + h;
            const Trace tp = forward_batch(spec, params, x);
            const double lp = batch_loss(spec, params, x, targets, true);
            slot = saved - h;
            const Trace tm = forward_batch(spec, params, x);
            const double lm = batch_loss(spec, params, x, targets, true);
            slot = saved;
            if (!same_winners(base, tp) || !same_winners(base, tm)) {
                ++s.skipped; // a maxout kink lies inside the stencil
                return;
            }
            const double numeric = (lp - lm) / (2.0 * h);
            const double rel = std::abs(analytic - numeric) / std::max(1e-7, std::abs(analytic) + std::abs(numeric));
            s.worst_relative_error = std::max(s.worst_relative_error, rel);
            ++s.checked;
            if (rel >= 1e-4) {
                std::ostringstream o;
                o << "network " << v << ": analytic " << analytic << " numeric " << numeric;
                s.outcome.fail(o.str());
            }
        };
        for (std::size_t l = 0; l < spec.layers.size(); ++l) {
            auto& layer = params.layers[l];
            for (std::size_t p = 0; p < layer.weights.size(); ++p) {
                for (Eigen::Index i = 0; i < layer.weights[p].size(); ++i) {
                    check(layer.weights[p].data()[i], grads[l].weights[p].data()[i]);
                }
                for (Eigen::Index i = 0; i < layer.biases[p].size(); ++i) {
                    check(layer.biases[p].data()[i], grads[l].biases[p].data()[i]);
                }
            }
            s.covered.insert(to_string(spec.layers[l].activation));
        }
        if (spec.l1 > 0.0) s.covered.insert("l1");
        ++s.networks;
    }
    for (const char* need : {"maxout", "sigmoid", "softmax", "l1"}) {
        if (!s.covered.count(need)) s.outcome.fail(std::string("no network covered ") + need);
    }
    return s;
}

// ---- metrics ----

struct MetricsSuite {
    Outcome outcome;
    int matrices = 0;
    double worst_auc_gap = 0.0;
};

/// Pairwise concordance count, ties worth one half.
inline double brute_force_auc(const std::vector<double>& scores, const std::vector<int>& actual) {
    double wins = 0.0;
    long pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (actual[i] != 1) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (actual[j] != 0) continue;
            wins += scores[i] > scores[j] ? 1.0 : scores[i] == scores[j] ? 0.5 : 0.0;
            ++pairs;
        }
    }
    return wins / static_cast<double>(pairs);
}

inline MetricsSuite metrics_suite(int matrices, std::uint64_t seed) {
    MetricsSuite s;
    Rng rng(seed);
    auto expect = [&](const std::optional<double>& got, long num, long den, const char* name) {
        if (den == 0) {
            if (got) s.outcome.fail(std::string(name) + " should be undefined");
            return;
        }
        const double want = static_cast<double>(num) / static_cast<double>(den);
        if (!got || *got != want) s.outcome.fail(std::string(name) + " differs from direct substitution");
    };
    for (int i = 0; i < matrices; ++i) {
        ConfusionMatrix cm{static_cast<long>(rng.below(60)), static_cast<long>(rng.below(60)),
                           static_cast<long>(rng.below(60)), static_cast<long>(rng.below(60))};
        if (i % 10 == 0) cm.tp = 0; // exercise undefined ratios
        if (i % 15 == 0) cm.fp = 0;
        if (cm.total() == 0) cm.tn = 1;
        const MetricsReport r = report(cm);
        expect(r.acc, cm.tp + cm.tn, cm.tp + cm.tn + cm.fp + cm.fn, "acc");
        expect(r.ppv, cm.tp, cm.tp + cm.fp, "ppv");
        expect(r.sen, cm.tp, cm.tp + cm.fn, "sen");
        expect(r.spc, cm.tn, cm.tn + cm.fp, "spc");
        expect(r.f1, 2 * cm.tp, 2 * cm.tp + cm.fp + cm.fn, "f1");
        if (r.spc && (!r.fpr || *r.fpr != 1.0 - *r.spc)) s.outcome.fail("fpr != 1 - spc");
        if (r.sen && (!r.fnr || *r.fnr != 1.0 - *r.sen)) s.outcome.fail("fnr != 1 - sen");
        if (!r.spc && r.fpr) s.outcome.fail("fpr defined without spc");
        if (!r.sen && r.fnr) s.outcome.fail("fnr defined without sen");
        ++s.matrices;
    }
    for (int i = 0; i < 300; ++i) {
        const int n = 2 + static_cast<int>(rng.below(80));
        std::vector<double> scores(static_cast<std::size_t>(n));
        std::vector<int> actual(static_cast<std::size_t>(n));
        const bool coarse = i % 2 == 0; // coarse scores create ties
        for (int k = 0; k < n; ++k) {
            scores[static_cast<std::size_t>(k)] = coarse ? static_cast<double>(rng.below(5)) / 4.0 : rng.uniform();
            actual[static_cast<std::size_t>(k)] = static_cast<int>(rng.below(2));
        }
        actual[0] = 0;
        actual[1] = 1;
        const RocResult roc = roc_auc(scores, actual);
        const double gap = std::max(std::abs(roc.auc - trapezoid_area(roc.curve)),
                                    std::abs(roc.auc - brute_force_auc(scores, actual)));
        s.worst_auc_gap = std::max(s.worst_auc_gap, gap);
        if (gap > 1e-12) s.outcome.fail("rank AUC differs from curve area by " + std::to_string(gap));
    }
    if (roc_auc({0.9, 0.8, 0.2, 0.1}, {1, 1, 0, 0}).auc != 1.0) s.outcome.fail("separated scores AUC != 1");
    if (roc_auc({0.4, 0.4, 0.4, 0.4, 0.4}, {1, 0, 1, 0, 0}).auc != 0.5) s.outcome.fail("tied scores AUC != 0.5");
    return s;
}

// ---- partition ----

struct PartitionSuite {
    Outcome outcome;
    int plans = 0;
};

inline PartitionSuite partition_suite(std::uint64_t seed) {
    PartitionSuite s;
    Rng rng(seed);
    for (int n = 50; n <= 60; ++n) {
        for (const int k : {5, 7, 10}) {
            std::vector<int> labels(static_cast<std::size_t>(n));
            for (auto& l : labels) l = static_cast<int>(rng.below(2));
            for (const bool stratified : {false, true}) {
                const FoldPlan plan = make_fold_plan(n, k, rng.next(), stratified ? std::optional(labels) : std::nullopt);
                const std::string tag = "n=" + std::to_string(n) + " k=" + std::to_string(k);
                std::vector<int> seen(static_cast<std::size_t>(n), 0);
                std::size_t lo = SIZE_MAX, hi = 0;
                for (const auto& f : plan.folds) {
                    lo = std::min(lo, f.test_indices.size());
                    hi = std::max(hi, f.test_indices.size());
                    for (const int i : f.test_indices) ++seen[static_cast<std::size_t>(i)];
                    std::vector<int> all;
                    for (const auto* part : {&f.test_indices, &f.train_indices, &f.validation_indices}) {
                        all.insert(all.end(), part->begin(), part->end());
                    }
                    std::sort(all.begin(), all.end());
                    if (std::adjacent_find(all.begin(), all.end()) != all.end()) s.outcome.fail(tag + ": roles overlap");
                    if (static_cast<int>(all.size()) != n) s.outcome.fail(tag + ": roles do not cover all indices");
                }
                if (plan.folds.size() != static_cast<std::size_t>(k)) s.outcome.fail(tag + ": wrong fold count");
                if (std::any_of(seen.begin(), seen.end(), [](int c) { return c != 1; })) {
                    s.outcome.fail(tag + ": test sets not a partition");
                }
                if (hi - lo > 1) s.outcome.fail(tag + ": test sizes differ by more than 1");
                if (stratified) {
                    for (int cls = 0; cls < 2; ++cls) {
                        const long total = std::count(labels.begin(), labels.end(), cls);
                        const double expected = static_cast<double>(total) / k;
                        for (const auto& f : plan.folds) {
                            long c = 0;
                            for (const int i : f.test_indices) c += labels[static_cast<std::size_t>(i)] == cls;
                            if (std::abs(static_cast<double>(c) - expected) > 1.0) {
                                s.outcome.fail(tag + ": class " + std::to_string(cls) + " unbalanced");
                            }
                        }
                    }
                }
                ++s.plans;
            }
        }
    }
    return s;
}

} // namespace oracles
