#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "pref/cluster.hpp"
#include "pref/kernels.hpp"

namespace pref {

namespace {

struct FlatPoints {
    std::vector<std::string> ids;
    std::vector<std::vector<double>> data;
};

FlatPoints flatten(const std::map<std::string, std::vector<double>>& points) {
    FlatPoints fp;
    for (const auto& [id, p] : points) {
        fp.ids.push_back(id);
        fp.data.push_back(p);
    }
    return fp;
}

std::vector<std::vector<double>> kmeanspp_init(const std::vector<std::vector<double>>& data,
                                               int k, std::mt19937_64& rng) {
    std::vector<std::vector<double>> centroids;
    std::uniform_int_distribution<std::size_t> first(0, data.size() - 1);
    centroids.push_back(data[first(rng)]);

    std::vector<double> d2(data.size());
    while (static_cast<int>(centroids.size()) < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < data.size(); ++i) {
            double best = std::numeric_limits<double>::max();
            for (const auto& c : centroids) {
                best = std::min(best, kernels::squared_distance(data[i], c));
            }
            d2[i] = best;
            total += best;
        }
        if (total <= 0.0) {
            // fewer distinct points than k; duplicate an existing centroid
            centroids.push_back(data[first(rng)]);
            continue;
        }
        std::uniform_real_distribution<double> pick(0.0, total);
        double target = pick(rng);
        std::size_t chosen = data.size() - 1;
        for (std::size_t i = 0; i < data.size(); ++i) {
            target -= d2[i];
            if (target <= 0.0) {
                chosen = i;
                break;
            }
        }
        centroids.push_back(data[chosen]);
    }
    return centroids;
}

struct LloydResult {
    std::vector<std::vector<double>> centroids;
    std::vector<int> labels;
    double inertia = 0.0;
};

LloydResult lloyd(const std::vector<std::vector<double>>& data,
                  std::vector<std::vector<double>> centroids, int k) {
    const std::size_t n = data.size();
    const std::size_t dim = data[0].size();
    std::vector<int> labels(n, -1);
    const int max_iterations = 300;

    for (int iter = 0; iter < max_iterations; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            double best_d = std::numeric_limits<double>::max();
            for (int c = 0; c < k; ++c) {
                const double d = kernels::squared_distance(data[i], centroids[c]);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            if (labels[i] != best) {
                labels[i] = best;
                changed = true;
            }
        }
        if (!changed && iter > 0) break;

        std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            kernels::axpy(1.0, data[i], sums[labels[i]]);
            ++counts[labels[i]];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[c] == 0) {
                // repair: reseed with the point farthest from its centroid
                std::size_t farthest = 0;
                double far_d = -1.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double d = kernels::squared_distance(data[i], centroids[labels[i]]);
                    if (d > far_d) {
                        far_d = d;
                        farthest = i;
                    }
                }
                centroids[c] = data[farthest];
                labels[farthest] = c;
            } else {
                for (std::size_t j = 0; j < dim; ++j) {
                    centroids[c][j] = sums[c][j] / static_cast<double>(counts[c]);
                }
            }
        }
    }

    LloydResult res;
    res.centroids = std::move(centroids);
    res.labels = std::move(labels);
    for (std::size_t i = 0; i < n; ++i) {
        res.inertia += kernels::squared_distance(data[i], res.centroids[res.labels[i]]);
    }
    return res;
}

} // namespace

double mean_silhouette(const std::vector<std::vector<double>>& points,
                       const std::vector<int>& labels, int k) {
    const std::size_t n = points.size();
    if (n < 2 || k < 2) return 0.0;

    std::vector<std::size_t> cluster_size(k, 0);
    for (int l : labels) ++cluster_size[l];

    double total = 0.0;
    std::vector<double> mean_dist(k);
    for (std::size_t i = 0; i < n; ++i) {
        if (cluster_size[labels[i]] == 1) continue;  // singleton: s = 0 by convention
        std::fill(mean_dist.begin(), mean_dist.end(), 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            mean_dist[labels[j]] += std::sqrt(kernels::squared_distance(points[i], points[j]));
        }
        const double a = mean_dist[labels[i]] / static_cast<double>(cluster_size[labels[i]] - 1);
        double b = std::numeric_limits<double>::max();
        for (int c = 0; c < k; ++c) {
            if (c == labels[i] || cluster_size[c] == 0) continue;
            b = std::min(b, mean_dist[c] / static_cast<double>(cluster_size[c]));
        }
        total += (b - a) / std::max(a, b);
    }
    return total / static_cast<double>(n);
}

ClusterModel kmeans(const std::map<std::string, std::vector<double>>& points, int k,
                    std::uint64_t seed, int restarts) {
    if (k < 1) throw ClusterError("kmeans: k must be >= 1");
    if (points.empty() || static_cast<std::size_t>(k) > points.size()) {
        throw ClusterError("kmeans: k exceeds number of points");
    }
    const auto fp = flatten(points);

    LloydResult best;
    best.inertia = std::numeric_limits<double>::max();
    for (int restart = 0; restart < std::max(restarts, 1); ++restart) {
        std::mt19937_64 rng(seed + static_cast<std::uint64_t>(restart));
        auto res = lloyd(fp.data, kmeanspp_init(fp.data, k, rng), k);
        if (res.inertia < best.inertia) best = std::move(res);
    }

    ClusterModel model;
    model.k = k;
    model.seed = seed;
    model.centroids = best.centroids;
    model.inertia = best.inertia;
    model.silhouette = mean_silhouette(fp.data, best.labels, k);
    for (std::size_t i = 0; i < fp.ids.size(); ++i) {
        model.assignments[fp.ids[i]] = best.labels[i];
    }
    return model;
}

KSelectionTable select_k(const std::map<std::string, std::vector<double>>& points,
                         int k_min, int k_max, std::uint64_t seed, int restarts) {
    if (k_min < 2 || k_max < k_min ||
        static_cast<std::size_t>(k_max) > points.size()) {
        throw ClusterError("select_k: degenerate k range");
    }
    KSelectionTable table;
    double best_s = -2.0;
    for (int k = k_min; k <= k_max; ++k) {
        const auto model = kmeans(points, k, seed, restarts);
        table.rows.push_back({k, model.inertia, model.silhouette});
        if (model.silhouette > best_s) {
            best_s = model.silhouette;
            table.suggested_k = k;
        }
    }
    return table;
}

} // namespace pref
