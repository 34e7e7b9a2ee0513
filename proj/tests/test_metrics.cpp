#include "fcmdnn/error.hpp"
#include "fcmdnn/metrics.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace fcmdnn;

TEST_SUITE("metrics") {

TEST_CASE("confusion counts") {
    CHECK(confusion({1, 1, 0, 0}, {1, 1, 0, 0}) == ConfusionMatrix{2, 0, 2, 0});
    CHECK(confusion({0, 0, 1, 1}, {1, 1, 0, 0}) == ConfusionMatrix{0, 2, 0, 2});
    CHECK(confusion({1, 0, 1, 0}, {1, 1, 0, 0}) == ConfusionMatrix{1, 1, 1, 1});
    CHECK(confusion({1, 0, 1, 0}, {1, 1, 0, 0}, 0) == ConfusionMatrix{1, 1, 1, 1});
    CHECK_THROWS_AS(confusion({1}, {1, 0}), Error);
}

TEST_CASE("confusion is invariant under a shared permutation") {
    const std::vector<int> p{1, 0, 1, 1, 0, 0, 1}, a{1, 1, 0, 1, 0, 1, 0};
    const std::vector<int> order{6, 2, 0, 5, 1, 3, 4};
    std::vector<int> pp, aa;
    for (const int i : order) {
        pp.push_back(p[static_cast<std::size_t>(i)]);
        aa.push_back(a[static_cast<std::size_t>(i)]);
    }
    CHECK(confusion(p, a) == confusion(pp, aa));
}

TEST_CASE("criteria by direct substitution") {
    const MetricsReport r = report({99, 0, 100, 1});
    CHECK(*r.acc == 199.0 / 200.0);
    CHECK(*r.ppv == 1.0);
    CHECK(*r.sen == 0.99);
    CHECK(*r.spc == 1.0);
    CHECK(*r.f1 == 198.0 / 199.0);
    CHECK(*r.f1 == doctest::Approx(0.994975).epsilon(1e-6));
    CHECK(*r.fpr == 0.0);
    CHECK(*r.fnr == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(*MetricsReport::percent(r.acc) == doctest::Approx(99.5));
}

TEST_CASE("zero denominators are undefined, not zero") {
    const MetricsReport r = report({0, 0, 10, 0});
    CHECK(*r.acc == 1.0);
    CHECK(*r.spc == 1.0);
    CHECK_FALSE(r.ppv);
    CHECK_FALSE(r.sen);
    CHECK_FALSE(r.f1);
    CHECK_FALSE(r.fnr);
    CHECK(r.undefined.count("ppv"));
    CHECK(r.undefined.count("sen"));
    CHECK(csv_row(r) == "100.00,NA,NA,100.00,NA,0.00,NA,NA");
}

TEST_CASE("symmetric matrix") {
    const MetricsReport r = report({25, 25, 25, 25});
    for (const auto& v : {r.acc, r.ppv, r.sen, r.spc, r.f1}) CHECK(*v == 0.5);
}

TEST_CASE("empty or negative matrices are rejected") {
    CHECK_THROWS_AS(report({0, 0, 0, 0}), Error);
    CHECK_THROWS_AS(report({-1, 2, 0, 0}), Error);
}

TEST_CASE("F1 is the harmonic mean of PPV and SEN") {
    const MetricsReport r = report({13, 4, 20, 7});
    CHECK(*r.f1 == doctest::Approx(2.0 * *r.ppv * *r.sen / (*r.ppv + *r.sen)).epsilon(1e-14));
}

TEST_CASE("AUC examples") {
    CHECK(roc_auc({0.9, 0.8, 0.2, 0.1}, {1, 1, 0, 0}).auc == 1.0);
    CHECK(roc_auc({0.3, 0.3, 0.3, 0.3}, {1, 0, 1, 0}).auc == 0.5);
    CHECK(roc_auc({0.8, 0.3, 0.5, 0.1}, {1, 1, 0, 0}).auc == 0.75);
    try {
        roc_auc({0.1, 0.2}, {1, 1});
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::undefined_auc);
    }
}

TEST_CASE("ROC curve shape") {
    const RocResult r = roc_auc({0.8, 0.3, 0.5, 0.1, 0.5}, {1, 1, 0, 0, 1});
    REQUIRE(r.curve.size() == 5); // origin plus four distinct thresholds
    CHECK(r.curve.front().fpr == 0.0);
    CHECK(r.curve.front().tpr == 0.0);
    CHECK(r.curve.back().fpr == 1.0);
    CHECK(r.curve.back().tpr == 1.0);
    for (std::size_t i = 1; i < r.curve.size(); ++i) {
        CHECK(r.curve[i].fpr >= r.curve[i - 1].fpr);
        CHECK(r.curve[i].tpr >= r.curve[i - 1].tpr);
    }
}

TEST_CASE("reversing scores maps AUC to its complement") {
    Rng rng(3);
    std::vector<double> s;
    std::vector<int> y;
    for (int i = 0; i < 40; ++i) {
        s.push_back(static_cast<double>(rng.below(7)));
        y.push_back(i % 3 == 0);
    }
    std::vector<double> neg;
    for (const double v : s) neg.push_back(-v);
    CHECK(roc_auc(neg, y).auc == doctest::Approx(1.0 - roc_auc(s, y).auc).epsilon(1e-15));
}

TEST_CASE("random matrices and score sets") {
    const auto s = oracles::metrics_suite(1000, 5);
    CHECK_MESSAGE(s.outcome.ok, s.outcome.detail);
}

TEST_CASE("fold evaluation marks single-class AUC as undefined") {
    const FoldEvaluation fe = evaluate_fold({1, 1}, {0.9, 0.7}, {1, 1});
    CHECK_FALSE(fe.report.auc);
    CHECK(fe.report.undefined.count("auc"));
}

TEST_CASE("aggregation") {
    const FoldEvaluation a = evaluate_fold({1, 0}, {0.9, 0.1}, {1, 0});
    const FoldEvaluation b = evaluate_fold({0, 1}, {0.2, 0.6}, {1, 0});
    const Aggregate pooled = aggregate({a, b});
    CHECK(pooled.pooled.cm == ConfusionMatrix{1, 1, 1, 1});
    CHECK(*pooled.pooled.acc == 0.5);
    CHECK(*pooled.mean.acc == 0.5);
    CHECK(pooled.mean.defined_counts.at("acc") == 2);

    const Aggregate single = aggregate({a});
    for (const auto& name : kCriteria) CHECK(criterion(single.pooled, name) == criterion(single.mean, name));

    const Aggregate same = aggregate({b, b, b});
    for (const auto& name : kCriteria) CHECK(criterion(same.mean, name) == criterion(b.report, name));

    CHECK_THROWS_AS(aggregate({}), Error);
}

TEST_CASE("mean excludes undefined folds and counts them") {
    const FoldEvaluation a = evaluate_fold({0, 0}, {0.1, 0.2}, {0, 0}); // no positives
    const FoldEvaluation b = evaluate_fold({1, 0}, {0.9, 0.1}, {1, 0});
    const Aggregate agg = aggregate({a, b});
    CHECK(agg.mean.defined_counts.at("sen") == 1);
    CHECK(*agg.mean.sen == 1.0);
    CHECK(agg.mean.defined_counts.at("acc") == 2);
}

TEST_CASE("CSV header follows the results table") {
    CHECK(csv_header() == "ACC,PPV,SEN,SPC,F1-Score,FPR,FNR,AUC");
    const FoldEvaluation a = evaluate_fold({1, 0, 1, 0}, {0.9, 0.1, 0.8, 0.3}, {1, 0, 1, 1});
    CHECK(csv_row(a.report) == "75.00,100.00,66.67,100.00,80.00,0.00,33.33,100.00");
}

}
