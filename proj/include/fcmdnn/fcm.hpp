#pragma once

#include "fcmdnn/dataset.hpp"
#include "fcmdnn/random.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace fcmdnn {

using Matrix = Eigen::MatrixXd;

struct FcmConfig {
    int num_clusters = 2;
    double fuzzifier = 2.0;
    int max_iterations = 50;
    double min_gain = 1.0e-4;
    std::uint64_t seed = 0;
    /// Overrides the seeded choice of c data points as starting centers.
    std::optional<Matrix> initial_centers;

    void validate() const;
};

struct FcmState {
    Matrix memberships; // n x c, rows sum to 1
    Matrix centers;     // c x d
    std::vector<double> objective_history;
    int iterations_run = 0;
    bool converged = false;
    int reseeded_centers = 0;
};

/// n x c matrix of Euclidean distances between rows of `x` and rows of `centers`.
Matrix distances(const Matrix& x, const Matrix& centers);

/// Bezdek membership update u_ik = 1 / sum_j (d_ik / d_jk)^(2/(m-1)). Rows with
/// zero distances split their mass equally over the zero-distance clusters.
Matrix update_memberships(const Matrix& dist, double fuzzifier);

struct CenterUpdate {
    Matrix centers;
    std::vector<int> reseeded; // clusters whose membership mass was zero
};

/// Fuzzy means weighted by u^m. A cluster with no mass is moved onto a data
/// point drawn from `rng`.
CenterUpdate update_centers(const Matrix& x, const Matrix& memberships, double fuzzifier, Rng& rng);

/// sum_i sum_k u_ik^m ||x_k - v_i||^2, the quantity the alternating updates minimise.
double objective(const Matrix& x, const Matrix& memberships, const Matrix& centers, double fuzzifier);

/// sum_i sum_k u_ik^m ||x_k - v_i||, reported alongside the objective.
double intra_cluster_distance_sum(const Matrix& x, const Matrix& memberships, const Matrix& centers,
                                  double fuzzifier);

struct FcmIteration {
    int iteration; // 1-based
    const Matrix& memberships;
    const Matrix& centers;
    double objective;
};

/// Alternating optimisation from c distinct seeded data points (or the
/// configured initial centers) until max_iterations or |J_t - J_{t-1}| < min_gain.
FcmState run_fcm(const Matrix& x, const FcmConfig& config,
                 const std::function<void(const FcmIteration&)>& observer = {});

/// Index of the nearest center (equivalently the largest membership), lowest index on ties.
int nearest_center(const Eigen::Ref<const Eigen::RowVectorXd>& point, const Matrix& centers);

struct PerClassClustering {
    Dataset dataset; // cluster_label set, num_clusters = 2 * clusters_per_class
    FcmState healthy;
    FcmState sick;
    int clusters_per_class = 0;
    /// Set by cluster_dataset_joint: all 2c renumbered centers, used for
    /// assignment regardless of class.
    std::optional<Matrix> joint_centers;
};

/// Clusters the healthy and sick subsets independently (class labels only
/// select the subset). Healthy clusters occupy [0, c), sick [c, 2c). The sick
/// run uses seed mix64(config.seed).
PerClassClustering cluster_dataset_per_class(const Dataset& dataset, int clusters_per_class,
                                             const FcmConfig& config);

/// Cluster label of a sample under fitted per-class centers: nearest center of
/// its own class, offset by class (nearest of all centers in joint mode).
int assign_cluster(const PerClassClustering& model, const Sample& sample);

/// Comparison mode: one FCM run with 2c clusters over all samples; the c
/// clusters with the highest healthy fraction are renumbered [0, c).
PerClassClustering cluster_dataset_joint(const Dataset& dataset, int clusters_per_class, const FcmConfig& config);

} // namespace fcmdnn
