#include "fcmdnn/fcm.hpp"

#include "fcmdnn/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace fcmdnn {

void FcmConfig::validate() const {
    if (!(fuzzifier > 1.0)) throw Error(ErrorKind::configuration, "fuzzifier must be > 1");
    if (num_clusters < 2) throw Error(ErrorKind::configuration, "need at least 2 clusters");
    if (max_iterations < 1) throw Error(ErrorKind::configuration, "max_iterations must be >= 1");
    if (!(min_gain > 0.0)) throw Error(ErrorKind::configuration, "min_gain must be > 0");
}

namespace {

// u^m with an exact fast path for the default fuzzifier.
inline double weight(double u, double m) { return m == 2.0 ? u * u : std::pow(u, m); }

void check_dims(const Matrix& x, const Matrix& centers) {
    if (x.cols() != centers.cols()) {
        throw Error(ErrorKind::shape_mismatch, "data has " + std::to_string(x.cols()) +
                                                   " columns, centers have " + std::to_string(centers.cols()));
    }
}

void check_memberships(const Matrix& x, const Matrix& u, const Matrix& centers) {
    check_dims(x, centers);
    if (u.rows() != x.rows() || u.cols() != centers.rows()) {
        throw Error(ErrorKind::shape_mismatch, "membership matrix must be n x c");
    }
}

} // namespace

Matrix distances(const Matrix& x, const Matrix& centers) {
    check_dims(x, centers);
    Matrix d(x.rows(), centers.rows());
    for (Eigen::Index k = 0; k < x.rows(); ++k) {
        for (Eigen::Index i = 0; i < centers.rows(); ++i) {
            d(k, i) = (x.row(k) - centers.row(i)).norm();
        }
    }
    return d;
}

Matrix update_memberships(const Matrix& dist, double fuzzifier) {
    if (!(fuzzifier > 1.0)) throw Error(ErrorKind::domain, "fuzzifier must be > 1");
    const double p = 2.0 / (fuzzifier - 1.0);
    Matrix u = Matrix::Zero(dist.rows(), dist.cols());
    for (Eigen::Index k = 0; k < dist.rows(); ++k) {
        Eigen::Index zeros = 0;
        for (Eigen::Index i = 0; i < dist.cols(); ++i) {
            const double d = dist(k, i);
            if (!(d >= 0.0)) throw Error(ErrorKind::domain, "distances must be non-negative");
            if (d == 0.0) ++zeros;
        }
        if (zeros > 0) {
            for (Eigen::Index i = 0; i < dist.cols(); ++i) {
                if (dist(k, i) == 0.0) u(k, i) = 1.0 / static_cast<double>(zeros);
            }
            continue;
        }
        for (Eigen::Index i = 0; i < dist.cols(); ++i) {
            double denom = 0.0;
            for (Eigen::Index j = 0; j < dist.cols(); ++j) {
                const double ratio = dist(k, i) / dist(k, j);
                denom += p == 2.0 ? ratio * ratio : std::pow(ratio, p);
            }
            u(k, i) = 1.0 / denom; // overflow of denom gives 0, the correct limit
        }
    }
    return u;
}

CenterUpdate update_centers(const Matrix& x, const Matrix& memberships, double fuzzifier, Rng& rng) {
    if (memberships.rows() != x.rows()) throw Error(ErrorKind::shape_mismatch, "membership rows must equal n");
    if (x.rows() == 0) throw Error(ErrorKind::insufficient_data, "no data points");
    CenterUpdate out;
    out.centers = Matrix::Zero(memberships.cols(), x.cols());
    for (Eigen::Index i = 0; i < memberships.cols(); ++i) {
        double mass = 0.0;
        for (Eigen::Index k = 0; k < x.rows(); ++k) {
            const double w = weight(memberships(k, i), fuzzifier);
            if (w == 0.0) continue;
            out.centers.row(i) += w * x.row(k);
            mass += w;
        }
        if (mass > 0.0) {
            out.centers.row(i) /= mass;
        } else {
            out.centers.row(i) = x.row(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(x.rows()))));
            out.reseeded.push_back(static_cast<int>(i));
        }
    }
    return out;
}

double objective(const Matrix& x, const Matrix& memberships, const Matrix& centers, double fuzzifier) {
    check_memberships(x, memberships, centers);
    long double total = 0.0L;
    for (Eigen::Index i = 0; i < centers.rows(); ++i) {
        for (Eigen::Index k = 0; k < x.rows(); ++k) {
            total += static_cast<long double>(weight(memberships(k, i), fuzzifier)) *
                     static_cast<long double>((x.row(k) - centers.row(i)).squaredNorm());
        }
    }
    return static_cast<double>(total);
}

double intra_cluster_distance_sum(const Matrix& x, const Matrix& memberships, const Matrix& centers,
                                  double fuzzifier) {
    check_memberships(x, memberships, centers);
    long double total = 0.0L;
    for (Eigen::Index i = 0; i < centers.rows(); ++i) {
        for (Eigen::Index k = 0; k < x.rows(); ++k) {
            total += static_cast<long double>(weight(memberships(k, i), fuzzifier)) *
                     static_cast<long double>((x.row(k) - centers.row(i)).norm());
        }
    }
    return static_cast<double>(total);
}

FcmState run_fcm(const Matrix& x, const FcmConfig& config, const std::function<void(const FcmIteration&)>& observer) {
    config.validate();
    const auto n = x.rows();
    const auto c = static_cast<Eigen::Index>(config.num_clusters);
    if (n < c) {
        throw Error(ErrorKind::insufficient_data,
                    std::to_string(n) + " samples cannot form " + std::to_string(c) + " clusters");
    }

    Rng rng(config.seed);
    FcmState state;
    if (config.initial_centers) {
        if (config.initial_centers->rows() != c || config.initial_centers->cols() != x.cols()) {
            throw Error(ErrorKind::shape_mismatch, "initial centers must be c x d");
        }
        state.centers = *config.initial_centers;
    } else {
        // c distinct data points: partial Fisher-Yates over the indices.
        std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
        std::iota(idx.begin(), idx.end(), Eigen::Index{0});
        state.centers.resize(c, x.cols());
        for (Eigen::Index i = 0; i < c; ++i) {
            const auto j = static_cast<std::size_t>(i) + rng.below(static_cast<std::uint64_t>(n - i));
            std::swap(idx[static_cast<std::size_t>(i)], idx[j]);
            state.centers.row(i) = x.row(idx[static_cast<std::size_t>(i)]);
        }
    }

    for (int it = 1; it <= config.max_iterations; ++it) {
        state.memberships = update_memberships(distances(x, state.centers), config.fuzzifier);
        CenterUpdate update = update_centers(x, state.memberships, config.fuzzifier, rng);
        state.reseeded_centers += static_cast<int>(update.reseeded.size());
        state.centers = std::move(update.centers);
        const double j = objective(x, state.memberships, state.centers, config.fuzzifier);
        state.objective_history.push_back(j);
        state.iterations_run = it;
        if (observer) observer(FcmIteration{it, state.memberships, state.centers, j});
        if (it > 1) {
            const double prev = state.objective_history[state.objective_history.size() - 2];
            if (std::abs(j - prev) < config.min_gain) {
                state.converged = true;
                break;
            }
        }
    }
    // Emit the partition matrix for the final centers.
    state.memberships = update_memberships(distances(x, state.centers), config.fuzzifier);
    return state;
}

int nearest_center(const Eigen::Ref<const Eigen::RowVectorXd>& point, const Matrix& centers) {
    if (point.size() != centers.cols()) throw Error(ErrorKind::shape_mismatch, "point/center width mismatch");
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < centers.rows(); ++i) {
        const double d = (point - centers.row(i)).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(i);
        }
    }
    return best;
}

namespace {

int argmax_row(const Matrix& u, Eigen::Index row) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < u.cols(); ++i) {
        if (u(row, i) > u(row, best)) best = i;
    }
    return static_cast<int>(best);
}

std::vector<int> members_of(const Dataset& dataset, int label) {
    std::vector<int> out;
    for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
        if (dataset.samples[i].class_label == label) out.push_back(static_cast<int>(i));
    }
    return out;
}

} // namespace

PerClassClustering cluster_dataset_per_class(const Dataset& dataset, int clusters_per_class, const FcmConfig& config) {
    if (clusters_per_class < 1) throw Error(ErrorKind::configuration, "clusters_per_class must be >= 1");
    PerClassClustering out;
    out.clusters_per_class = clusters_per_class;
    out.dataset = dataset;
    out.dataset.num_clusters = 2 * clusters_per_class;

    for (int label = 0; label < 2; ++label) {
        const auto members = members_of(dataset, label);
        if (members.size() < static_cast<std::size_t>(clusters_per_class)) {
            throw Error(ErrorKind::insufficient_data,
                        std::string(label == 0 ? "healthy" : "sick") + " class has " +
                            std::to_string(members.size()) + " samples, fewer than clusters_per_class=" +
                            std::to_string(clusters_per_class));
        }
        const Matrix x = dataset.subset(members).feature_matrix();
        FcmState state;
        if (clusters_per_class == 1) {
            // A single cluster is the (weighted) mean with unit memberships.
            state.memberships = Matrix::Ones(x.rows(), 1);
            state.centers = x.colwise().mean();
            state.objective_history.push_back(objective(x, state.memberships, state.centers, config.fuzzifier));
            state.iterations_run = 1;
            state.converged = true;
        } else {
            FcmConfig cfg = config;
            cfg.num_clusters = clusters_per_class;
            cfg.initial_centers.reset();
            cfg.seed = label == 0 ? config.seed : mix64(config.seed);
            state = run_fcm(x, cfg);
        }
        for (std::size_t r = 0; r < members.size(); ++r) {
            out.dataset.samples[static_cast<std::size_t>(members[r])].cluster_label =
                label * clusters_per_class + argmax_row(state.memberships, static_cast<Eigen::Index>(r));
        }
        (label == 0 ? out.healthy : out.sick) = std::move(state);
    }
    return out;
}

int assign_cluster(const PerClassClustering& model, const Sample& sample) {
    const Eigen::Map<const Eigen::RowVectorXd> point(sample.pixels.data(),
                                                     static_cast<Eigen::Index>(sample.pixels.size()));
    if (model.joint_centers) return nearest_center(point, *model.joint_centers);
    const FcmState& state = sample.class_label == 0 ? model.healthy : model.sick;
    return sample.class_label * model.clusters_per_class + nearest_center(point, state.centers);
}

PerClassClustering cluster_dataset_joint(const Dataset& dataset, int clusters_per_class, const FcmConfig& config) {
    if (clusters_per_class < 1) throw Error(ErrorKind::configuration, "clusters_per_class must be >= 1");
    const int total = 2 * clusters_per_class;
    const Matrix x = dataset.feature_matrix();
    FcmConfig cfg = config;
    cfg.num_clusters = total;
    cfg.initial_centers.reset();
    FcmState state = run_fcm(x, cfg);

    std::vector<int> raw(dataset.size());
    std::vector<double> healthy(static_cast<std::size_t>(total), 0.0);
    std::vector<double> count(static_cast<std::size_t>(total), 0.0);
    for (std::size_t k = 0; k < dataset.size(); ++k) {
        raw[k] = argmax_row(state.memberships, static_cast<Eigen::Index>(k));
        count[static_cast<std::size_t>(raw[k])] += 1.0;
        if (dataset.samples[k].class_label == 0) healthy[static_cast<std::size_t>(raw[k])] += 1.0;
    }
    std::vector<int> order(static_cast<std::size_t>(total));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        const auto fa = count[static_cast<std::size_t>(a)] > 0 ? healthy[static_cast<std::size_t>(a)] / count[static_cast<std::size_t>(a)] : 0.0;
        const auto fb = count[static_cast<std::size_t>(b)] > 0 ? healthy[static_cast<std::size_t>(b)] / count[static_cast<std::size_t>(b)] : 0.0;
        return fa > fb;
    });
    std::vector<int> rename(static_cast<std::size_t>(total));
    Matrix renamed(total, x.cols());
    for (int pos = 0; pos < total; ++pos) {
        rename[static_cast<std::size_t>(order[static_cast<std::size_t>(pos)])] = pos;
        renamed.row(pos) = state.centers.row(order[static_cast<std::size_t>(pos)]);
    }

    PerClassClustering out;
    out.clusters_per_class = clusters_per_class;
    out.dataset = dataset;
    out.dataset.num_clusters = total;
    for (std::size_t k = 0; k < dataset.size(); ++k) {
        out.dataset.samples[k].cluster_label = rename[static_cast<std::size_t>(raw[k])];
    }
    out.joint_centers = renamed;
    out.healthy = std::move(state);
    return out;
}

} // namespace fcmdnn
