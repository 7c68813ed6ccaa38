#include "vidmeta/selection.h"

#include "vidmeta/error.h"
#include "vidmeta/random.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace vidmeta {

Eigen::MatrixXd to_matrix(std::span<const FeatureVector> vectors)
{
    const Eigen::Index rows = static_cast<Eigen::Index>(vectors.size());
    const Eigen::Index cols
        = vectors.empty() ? 0 : static_cast<Eigen::Index>(vectors.front().values.size());
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& v = vectors[static_cast<std::size_t>(r)].values;
        if (static_cast<Eigen::Index>(v.size()) != cols) {
            throw Error(ErrorCode::kDimensionMismatch, "feature vectors differ in length");
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(r, c) = v[static_cast<std::size_t>(c)];
        }
    }
    return m;
}

Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& samples)
{
    if (samples.rows() < 2) {
        throw Error(ErrorCode::kInvalidArgument, "correlation needs at least 2 samples");
    }
    const Eigen::Index p = samples.cols();
    std::vector<bool> constant(static_cast<std::size_t>(p));
    for (Eigen::Index c = 0; c < p; ++c) {
        constant[static_cast<std::size_t>(c)]
            = (samples.col(c).array() == samples(0, c)).all();
    }
    const Eigen::RowVectorXd mean = samples.colwise().mean();
    Eigen::MatrixXd centered = samples.rowwise() - mean;
    for (Eigen::Index c = 0; c < p; ++c) {
        if (constant[static_cast<std::size_t>(c)]) {
            centered.col(c).setZero();
        }
    }
    Eigen::MatrixXd r = centered.transpose() * centered;
    Eigen::VectorXd inv_sd(p);
    for (Eigen::Index c = 0; c < p; ++c) {
        const double ss = r(c, c);
        inv_sd(c) = constant[static_cast<std::size_t>(c)] || ss <= 0.0 ? 0.0 : 1.0 / std::sqrt(ss);
    }
    for (Eigen::Index j = 0; j < p; ++j) {
        for (Eigen::Index i = 0; i < p; ++i) {
            r(i, j) = std::clamp(r(i, j) * inv_sd(i) * inv_sd(j), -1.0, 1.0);
        }
    }
    for (Eigen::Index c = 0; c < p; ++c) {
        r(c, c) = 1.0;
    }
    return r;
}

Eigen::MatrixXd correlation_matrix(std::span<const FeatureVector> vectors)
{
    return correlation_matrix(to_matrix(vectors));
}

Eigen::MatrixXd clamp_positive(const Eigen::MatrixXd& r)
{
    return r.cwiseMax(0.0);
}

namespace {

    std::vector<int> relabel_by_appearance(const std::vector<int>& labels)
    {
        std::map<int, int> remap;
        std::vector<int> out(labels.size());
        for (std::size_t i = 0; i < labels.size(); ++i) {
            auto [it, inserted] = remap.emplace(labels[i], static_cast<int>(remap.size()));
            out[i] = it->second;
        }
        return out;
    }

    Eigen::MatrixXd kmeanspp_init(const Eigen::MatrixXd& pts, int k, Rng& rng)
    {
        const Eigen::Index n = pts.rows();
        Eigen::MatrixXd centers(k, pts.cols());
        centers.row(0) = pts.row(static_cast<Eigen::Index>(rng.index(static_cast<std::uint64_t>(n))));
        Eigen::VectorXd d2 = (pts.rowwise() - centers.row(0)).rowwise().squaredNorm();
        for (int c = 1; c < k; ++c) {
            const double total = d2.sum();
            Eigen::Index pick = 0;
            if (total > 0.0) {
                double target = rng.uniform01() * total;
                pick = n - 1;
                for (Eigen::Index i = 0; i < n; ++i) {
                    target -= d2(i);
                    if (target < 0.0) {
                        pick = i;
                        break;
                    }
                }
            } else {
                pick = static_cast<Eigen::Index>(rng.index(static_cast<std::uint64_t>(n)));
            }
            centers.row(c) = pts.row(pick);
            d2 = d2.cwiseMin((pts.rowwise() - centers.row(c)).rowwise().squaredNorm());
        }
        return centers;
    }

    double lloyd(const Eigen::MatrixXd& pts, Eigen::MatrixXd& centers, std::vector<int>& assign,
                 int max_iterations)
    {
        const Eigen::Index n = pts.rows();
        const int k = static_cast<int>(centers.rows());
        assign.assign(static_cast<std::size_t>(n), -1);
        double inertia = 0.0;
        for (int iter = 0; iter < max_iterations; ++iter) {
            bool changed = false;
            inertia = 0.0;
            std::vector<double> dist(static_cast<std::size_t>(n));
            for (Eigen::Index i = 0; i < n; ++i) {
                int best = 0;
                double best_d = std::numeric_limits<double>::infinity();
                for (int c = 0; c < k; ++c) {
                    const double d = (pts.row(i) - centers.row(c)).squaredNorm();
                    if (d < best_d) {
                        best_d = d;
                        best = c;
                    }
                }
                if (assign[static_cast<std::size_t>(i)] != best) {
                    assign[static_cast<std::size_t>(i)] = best;
                    changed = true;
                }
                dist[static_cast<std::size_t>(i)] = best_d;
                inertia += best_d;
            }
            if (!changed && iter > 0) {
                break;
            }
            Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, pts.cols());
            std::vector<int> counts(static_cast<std::size_t>(k), 0);
            for (Eigen::Index i = 0; i < n; ++i) {
                sums.row(assign[static_cast<std::size_t>(i)]) += pts.row(i);
                ++counts[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])];
            }
            for (int c = 0; c < k; ++c) {
                if (counts[static_cast<std::size_t>(c)] > 0) {
                    centers.row(c) = sums.row(c) / counts[static_cast<std::size_t>(c)];
                    continue;
                }
                // Empty cluster: reseed at the worst-served point.
                const auto far = std::max_element(dist.begin(), dist.end()) - dist.begin();
                centers.row(c) = pts.row(far);
                dist[static_cast<std::size_t>(far)] = 0.0;
            }
        }
        return inertia;
    }

}  // namespace

std::vector<int> kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed,
                        const KMeansOptions& options)
{
    const Eigen::Index n = points.rows();
    if (k < 1) {
        throw Error(ErrorCode::kInvalidArgument, "k-means needs k >= 1");
    }
    if (n <= k) {
        std::vector<int> labels(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) {
            labels[static_cast<std::size_t>(i)] = static_cast<int>(i);
        }
        return labels;
    }
    Rng rng(seed);
    std::vector<int> best;
    double best_inertia = std::numeric_limits<double>::infinity();
    for (int r = 0; r < std::max(1, options.restarts); ++r) {
        Eigen::MatrixXd centers = kmeanspp_init(points, k, rng);
        std::vector<int> assign;
        const double inertia = lloyd(points, centers, assign, options.max_iterations);
        if (inertia < best_inertia) {
            best_inertia = inertia;
            best = std::move(assign);
        }
    }
    return relabel_by_appearance(best);
}

std::vector<int> spectral_cluster(const Eigen::MatrixXd& affinity, int alpha,
                                  std::uint64_t seed, const KMeansOptions& options)
{
    const Eigen::Index n = affinity.rows();
    if (affinity.cols() != n) {
        throw Error(ErrorCode::kDimensionMismatch, "affinity matrix must be square");
    }
    if (alpha < 1 || alpha > n) {
        throw Error(ErrorCode::kInvalidArgument,
                    "alpha=" + std::to_string(alpha) + " outside [1, "
                        + std::to_string(n) + "]");
    }
    std::vector<int> labels(static_cast<std::size_t>(n), 1);
    if (alpha == 1) {
        return labels;
    }

    std::vector<Eigen::Index> connected;
    std::vector<Eigen::Index> isolated;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double off_diagonal = affinity.row(i).sum() - affinity(i, i);
        (off_diagonal > 0.0 ? connected : isolated).push_back(i);
    }
    const auto m = static_cast<Eigen::Index>(connected.size());
    const int k = m == 0
                      ? 0
                      : static_cast<int>(std::clamp<Eigen::Index>(
                          alpha - static_cast<Eigen::Index>(isolated.size()), 1, m));

    std::vector<int> sub(static_cast<std::size_t>(m), 0);
    if (m > 0 && k == m) {
        for (Eigen::Index i = 0; i < m; ++i) {
            sub[static_cast<std::size_t>(i)] = static_cast<int>(i);
        }
    } else if (m > 0 && k > 1) {
        Eigen::MatrixXd a(m, m);
        for (Eigen::Index j = 0; j < m; ++j) {
            for (Eigen::Index i = 0; i < m; ++i) {
                a(i, j) = i == j ? 0.0 : affinity(connected[i], connected[j]);
            }
        }
        const Eigen::VectorXd inv_sqrt_deg = a.rowwise().sum().cwiseSqrt().cwiseInverse();
        // L = I - D^-1/2 A D^-1/2; the smallest eigenvalues of L are the
        // largest of the normalized affinity.
        Eigen::MatrixXd lap = -(inv_sqrt_deg.asDiagonal() * a * inv_sqrt_deg.asDiagonal());
        lap.diagonal().array() += 1.0;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(lap);
        if (eig.info() != Eigen::Success) {
            throw Error(ErrorCode::kDegenerateAffinity, "eigen decomposition failed");
        }
        Eigen::MatrixXd embed = eig.eigenvectors().leftCols(k);
        for (Eigen::Index i = 0; i < m; ++i) {
            const double norm = embed.row(i).norm();
            if (norm > 0.0) {
                embed.row(i) /= norm;
            }
        }
        sub = kmeans(embed, k, seed, options);
    }

    for (Eigen::Index i = 0; i < m; ++i) {
        labels[static_cast<std::size_t>(connected[i])] = sub[static_cast<std::size_t>(i)] + 1;
    }
    int next = k + 1;
    for (Eigen::Index i : isolated) {
        labels[static_cast<std::size_t>(i)] = next++;
    }
    return labels;
}

SelectionMask select_features(std::span<const int> labels, int beta, std::uint64_t seed,
                              SmallClusterPolicy policy)
{
    std::map<int, std::vector<std::size_t>> clusters;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        clusters[labels[i]].push_back(i);
    }
    SelectionMask mask;
    mask.cluster_labels.assign(labels.begin(), labels.end());
    mask.seed = seed;
    mask.beta = beta;
    mask.small_clusters = policy;
    Rng rng(seed);
    for (const auto& [label, members] : clusters) {
        if (static_cast<int>(members.size()) > beta) {
            mask.retained.push_back(members[rng.index(members.size())]);
        } else if (policy == SmallClusterPolicy::kKeepAll) {
            mask.retained.insert(mask.retained.end(), members.begin(), members.end());
        }
    }
    std::sort(mask.retained.begin(), mask.retained.end());
    return mask;
}

Eigen::MatrixXd apply_mask(const Eigen::MatrixXd& samples, const SelectionMask& mask)
{
    Eigen::MatrixXd out(samples.rows(), static_cast<Eigen::Index>(mask.retained.size()));
    for (std::size_t c = 0; c < mask.retained.size(); ++c) {
        const auto src = static_cast<Eigen::Index>(mask.retained[c]);
        if (src >= samples.cols()) {
            throw Error(ErrorCode::kDimensionMismatch, "selection mask exceeds feature count");
        }
        out.col(static_cast<Eigen::Index>(c)) = samples.col(src);
    }
    return out;
}

nlohmann::json SelectionMask::to_json() const
{
    return {
        {"retained", retained},
        {"cluster_labels", cluster_labels},
        {"seed", seed},
        {"alpha", alpha},
        {"beta", beta},
        {"small_clusters", small_clusters == SmallClusterPolicy::kKeepAll ? "keep" : "drop"},
    };
}

SelectionMask SelectionMask::from_json(const nlohmann::json& j)
{
    SelectionMask m;
    try {
        m.retained = j.at("retained").get<std::vector<std::size_t>>();
        m.cluster_labels = j.at("cluster_labels").get<std::vector<int>>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.alpha = j.at("alpha").get<int>();
        m.beta = j.at("beta").get<int>();
        m.small_clusters = j.value("small_clusters", std::string("keep")) == "drop"
                               ? SmallClusterPolicy::kDrop
                               : SmallClusterPolicy::kKeepAll;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::kInvalidArgument, std::string("selection JSON: ") + e.what());
    }
    return m;
}

}  // namespace vidmeta
