#include "cfaudit/learn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "cfaudit/errors.hpp"
#include "cfaudit/parallel.hpp"

namespace cfaudit {

namespace {

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// log(1 + exp(m)), stable for large |m|
double log1pexp(double m) {
    return m > 0.0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m));
}

double clamp_prob(double p) { return std::min(std::max(p, 1e-12), 1.0 - 1e-12); }

void require_both_classes(const std::vector<int>& y) {
    std::size_t pos = 0;
    for (int v : y) pos += static_cast<std::size_t>(v != 0);
    if (pos == 0 || pos == y.size()) throw SingleClassTrainingError();
}

}  // namespace

Dataset gather(const FeatureMatrix& matrix, const TaskLabel& labels,
               const std::vector<std::size_t>& row_indices) {
    Dataset data;
    data.n_rows = row_indices.size();
    data.n_cols = matrix.n_cols;
    data.x.resize(data.n_rows * data.n_cols);
    data.y.resize(data.n_rows);
    for (std::size_t i = 0; i < row_indices.size(); ++i) {
        const std::size_t src = row_indices[i];
        std::copy_n(matrix.values.data() + src * matrix.n_cols, matrix.n_cols,
                    data.x.data() + i * data.n_cols);
        data.y[i] = labels.y[src];
    }
    return data;
}

// ---------------------------------------------------------------------------
// kernels
// ---------------------------------------------------------------------------

namespace kernels {

void linear_margins(const double* z, std::size_t n, std::size_t d, const double* w, double b,
                    double* margins) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
        const double* row = z + static_cast<std::size_t>(i) * d;
        double m = b;
        for (std::size_t j = 0; j < d; ++j) m += w[j] * row[j];
        margins[i] = m;
    }
}

double logistic_loss(const double* margins, const int* y, std::size_t n, const double* w,
                     std::size_t d, double l2) {
    const double data_loss = chunked_sum(
        n, [&](std::size_t i) { return log1pexp(margins[i]) - (y[i] != 0 ? margins[i] : 0.0); });
    double penalty = 0.0;
    for (std::size_t j = 0; j < d; ++j) penalty += w[j] * w[j];
    return (data_loss + l2 * penalty) / static_cast<double>(n);
}

void logistic_grad(const double* z, const double* margins, const int* y, std::size_t n,
                   std::size_t d, const double* w, double l2, double* grad) {
    const auto sums = chunked_sum_vec(n, d + 1, [&](std::size_t i, double* acc) {
        const double r = sigmoid(margins[i]) - (y[i] != 0 ? 1.0 : 0.0);
        const double* row = z + i * d;
        for (std::size_t j = 0; j < d; ++j) acc[j] += r * row[j];
        acc[d] += r;
    });
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t j = 0; j < d; ++j) grad[j] = (sums[j] + 2.0 * l2 * w[j]) * inv_n;
    grad[d] = sums[d] * inv_n;
}

void gbt_histogram(const std::uint8_t* bins_col, const std::size_t* rows, std::size_t n_rows,
                   const double* grad, const double* hess, std::size_t n_bins, double* hist_g,
                   double* hist_h) {
    std::fill_n(hist_g, n_bins, 0.0);
    std::fill_n(hist_h, n_bins, 0.0);
    for (std::size_t i = 0; i < n_rows; ++i) {
        const std::size_t r = rows[i];
        const std::uint8_t b = bins_col[r];
        hist_g[b] += grad[r];
        hist_h[b] += hess[r];
    }
}

}  // namespace kernels

namespace reference {

void linear_margins(const double* z, std::size_t n, std::size_t d, const double* w, double b,
                    double* margins) {
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = z + i * d;
        double m = b;
        for (std::size_t j = 0; j < d; ++j) m += w[j] * row[j];
        margins[i] = m;
    }
}

double logistic_loss(const double* margins, const int* y, std::size_t n, const double* w,
                     std::size_t d, double l2) {
    double data_loss = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        data_loss += log1pexp(margins[i]) - (y[i] != 0 ? margins[i] : 0.0);
    double penalty = 0.0;
    for (std::size_t j = 0; j < d; ++j) penalty += w[j] * w[j];
    return (data_loss + l2 * penalty) / static_cast<double>(n);
}

void logistic_grad(const double* z, const double* margins, const int* y, std::size_t n,
                   std::size_t d, const double* w, double l2, double* grad) {
    std::vector<double> sums(d + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = sigmoid(margins[i]) - (y[i] != 0 ? 1.0 : 0.0);
        const double* row = z + i * d;
        for (std::size_t j = 0; j < d; ++j) sums[j] += r * row[j];
        sums[d] += r;
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t j = 0; j < d; ++j) grad[j] = (sums[j] + 2.0 * l2 * w[j]) * inv_n;
    grad[d] = sums[d] * inv_n;
}

void gbt_histogram(const std::uint8_t* bins_col, const std::size_t* rows, std::size_t n_rows,
                   const double* grad, const double* hess, std::size_t n_bins, double* hist_g,
                   double* hist_h) {
    kernels::gbt_histogram(bins_col, rows, n_rows, grad, hess, n_bins, hist_g, hist_h);
}

}  // namespace reference

// ---------------------------------------------------------------------------
// logistic regression
// ---------------------------------------------------------------------------

LinearModel train_logistic(const Dataset& data, const LogisticHyper& hyper) {
    const std::size_t n = data.n_rows;
    const std::size_t d = data.n_cols;
    if (n < 2) throw SingleClassTrainingError();
    require_both_classes(data.y);

    LinearModel model;
    model.hyper = hyper;
    model.feature_means.resize(d);
    model.feature_sds.resize(d);
    for (std::size_t j = 0; j < d; ++j) {
        const double sum = chunked_sum(n, [&](std::size_t i) { return data.x[i * d + j]; });
        const double mean = sum / static_cast<double>(n);
        const double ss = chunked_sum(n, [&](std::size_t i) {
            const double dev = data.x[i * d + j] - mean;
            return dev * dev;
        });
        const double var = ss / static_cast<double>(n);
        model.feature_means[j] = mean;
        model.feature_sds[j] = var > 0.0 ? std::sqrt(var) : 1.0;
    }

    std::vector<double> z(n * d);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
        const double* src = data.x.data() + static_cast<std::size_t>(i) * d;
        double* dst = z.data() + static_cast<std::size_t>(i) * d;
        for (std::size_t j = 0; j < d; ++j)
            dst[j] = (src[j] - model.feature_means[j]) / model.feature_sds[j];
    }

    double pos = 0.0;
    for (int v : data.y) pos += v != 0 ? 1.0 : 0.0;
    const double y_mean = pos / static_cast<double>(n);

    // Start at the intercept-only optimum; monotone line search then keeps
    // the final loss at or below it.
    std::vector<double> w(d, 0.0);
    double bias = std::log(clamp_prob(y_mean) / (1.0 - clamp_prob(y_mean)));

    std::vector<double> margins(n);
    kernels::linear_margins(z.data(), n, d, w.data(), bias, margins.data());
    double loss = kernels::logistic_loss(margins.data(), data.y.data(), n, w.data(), d,
                                         hyper.l2_lambda);

    std::vector<double> grad(d + 1);
    std::vector<double> dm(n);
    std::vector<double> w_new(d);
    std::vector<double> m_new(n);
    double step = 1.0;
    int iter = 0;
    for (; iter < hyper.max_iter; ++iter) {
        kernels::logistic_grad(z.data(), margins.data(), data.y.data(), n, d, w.data(),
                               hyper.l2_lambda, grad.data());
        double g_inf = 0.0;
        double g_sq = 0.0;
        for (double g : grad) {
            g_inf = std::max(g_inf, std::fabs(g));
            g_sq += g * g;
        }
        if (g_inf <= hyper.tol) break;

#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
            const double* row = z.data() + static_cast<std::size_t>(i) * d;
            double v = grad[d];
            for (std::size_t j = 0; j < d; ++j) v += grad[j] * row[j];
            dm[i] = v;
        }

        double t = std::min(step * 2.0, 1e4);
        bool accepted = false;
        double bias_new = bias;
        double loss_new = loss;
        while (t > 1e-20) {
            for (std::size_t j = 0; j < d; ++j) w_new[j] = w[j] - t * grad[j];
            bias_new = bias - t * grad[d];
#pragma omp parallel for schedule(static)
            for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i)
                m_new[i] = margins[i] - t * dm[i];
            loss_new = kernels::logistic_loss(m_new.data(), data.y.data(), n, w_new.data(), d,
                                              hyper.l2_lambda);
            if (loss_new <= loss - 1e-4 * t * g_sq) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) break;  // at numerical floor

        w.swap(w_new);
        bias = bias_new;
        margins.swap(m_new);
        loss = loss_new;
        step = t;
        // Incremental margins drift; refresh periodically.
        if ((iter + 1) % 64 == 0) {
            kernels::linear_margins(z.data(), n, d, w.data(), bias, margins.data());
            loss = kernels::logistic_loss(margins.data(), data.y.data(), n, w.data(), d,
                                          hyper.l2_lambda);
        }
    }

    model.weights = std::move(w);
    model.bias = bias;
    model.iterations = iter;
    model.final_loss = loss;
    return model;
}

std::vector<double> predict_proba(const LinearModel& model, const std::vector<double>& x,
                                  std::size_t n_rows, std::size_t n_cols) {
    if (n_cols != model.weights.size()) throw DimensionMismatchError(model.weights.size(), n_cols);
    std::vector<double> out(n_rows);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n_rows); ++i) {
        const double* row = x.data() + static_cast<std::size_t>(i) * n_cols;
        double m = model.bias;
        for (std::size_t j = 0; j < n_cols; ++j)
            m += model.weights[j] * (row[j] - model.feature_means[j]) / model.feature_sds[j];
        out[i] = clamp_prob(sigmoid(m));
    }
    return out;
}

std::vector<double> predict_proba(const LinearModel& model, const Dataset& data) {
    return predict_proba(model, data.x, data.n_rows, data.n_cols);
}

// ---------------------------------------------------------------------------
// gradient-boosted trees
// ---------------------------------------------------------------------------

double Tree::predict(std::span<const double> row) const {
    int node = 0;
    while (!nodes[static_cast<std::size_t>(node)].is_leaf()) {
        const TreeNode& nd = nodes[static_cast<std::size_t>(node)];
        node = row[static_cast<std::size_t>(nd.feature)] < nd.threshold ? nd.left : nd.right;
    }
    return nodes[static_cast<std::size_t>(node)].leaf_value;
}

namespace {

constexpr double kGbtLambda = 1.0;

struct SplitChoice {
    double gain = 0.0;
    int threshold_idx = -1;
    double g_left = 0.0, h_left = 0.0;
};

// Quantile candidate thresholds for one feature over the training column.
std::vector<double> candidate_thresholds(std::vector<double> values, int quantiles) {
    std::sort(values.begin(), values.end());
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(quantiles));
    const std::size_t n = values.size();
    for (int j = 1; j <= quantiles; ++j) {
        std::size_t pos = static_cast<std::size_t>(j) * n / (static_cast<std::size_t>(quantiles) + 1);
        if (pos >= n) pos = n - 1;
        const double v = values[pos];
        if (out.empty() || v > out.back()) out.push_back(v);
    }
    return out;
}

}  // namespace

TreeEnsemble train_gbt(const Dataset& data, const GbtHyper& hyper) {
    const std::size_t n = data.n_rows;
    const std::size_t d = data.n_cols;
    if (n < 2) throw SingleClassTrainingError();
    require_both_classes(data.y);

    TreeEnsemble ensemble;
    ensemble.hyper = hyper;

    double pos = 0.0;
    for (int v : data.y) pos += v != 0 ? 1.0 : 0.0;
    const double y_mean = clamp_prob(pos / static_cast<double>(n));
    ensemble.base_score = std::log(y_mean / (1.0 - y_mean));

    // Per-feature candidate thresholds and per-cell bin indices, fixed for
    // the whole training run.
    std::vector<std::vector<double>> thresholds(d);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(d); ++j) {
        std::vector<double> col(n);
        for (std::size_t i = 0; i < n; ++i) col[i] = data.x[i * d + static_cast<std::size_t>(j)];
        thresholds[static_cast<std::size_t>(j)] =
            candidate_thresholds(std::move(col), hyper.candidate_quantiles);
    }
    // bins stored column-major: bins[j][i]
    std::vector<std::vector<std::uint8_t>> bins(d);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(d); ++j) {
        const auto& thr = thresholds[static_cast<std::size_t>(j)];
        auto& col_bins = bins[static_cast<std::size_t>(j)];
        col_bins.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double x = data.x[i * d + static_cast<std::size_t>(j)];
            col_bins[i] = static_cast<std::uint8_t>(
                std::upper_bound(thr.begin(), thr.end(), x) - thr.begin());
        }
    }

    std::vector<double> margins(n, ensemble.base_score);
    std::vector<double> grad(n);
    std::vector<double> hess(n);
    ensemble.round_train_logloss.reserve(static_cast<std::size_t>(hyper.n_rounds) + 1);
    ensemble.round_train_logloss.push_back(chunked_sum(n, [&](std::size_t i) {
                                               return log1pexp(margins[i]) -
                                                      (data.y[i] != 0 ? margins[i] : 0.0);
                                           }) /
                                           static_cast<double>(n));

    struct BuildNode {
        int id;
        int depth;
        std::vector<std::size_t> rows;
        double g_sum, h_sum;
    };

    for (int round = 0; round < hyper.n_rounds; ++round) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
            const double p = sigmoid(margins[i]);
            grad[i] = p - (data.y[i] != 0 ? 1.0 : 0.0);
            hess[i] = p * (1.0 - p);
        }

        Tree tree;
        std::vector<int> leaf_of(n, 0);
        std::vector<BuildNode> queue;
        {
            const double g0 = chunked_sum(n, [&](std::size_t i) { return grad[i]; });
            const double h0 = chunked_sum(n, [&](std::size_t i) { return hess[i]; });
            std::vector<std::size_t> all(n);
            std::iota(all.begin(), all.end(), 0);
            tree.nodes.push_back(TreeNode{});
            queue.push_back(BuildNode{0, 0, std::move(all), g0, h0});
        }

        while (!queue.empty()) {
            BuildNode node = std::move(queue.front());
            queue.erase(queue.begin());

            auto make_leaf = [&]() {
                tree.nodes[static_cast<std::size_t>(node.id)].feature = -1;
                tree.nodes[static_cast<std::size_t>(node.id)].leaf_value =
                    -node.g_sum / (node.h_sum + kGbtLambda);
            };
            if (node.depth >= hyper.max_depth || node.rows.size() < 2) {
                make_leaf();
                continue;
            }

            // Best split per feature, then a sequential scan in feature order;
            // ties resolve to the lowest feature index and lowest threshold.
            std::vector<SplitChoice> per_feature(d);
#pragma omp parallel for schedule(dynamic)
            for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(d); ++j) {
                const auto& thr = thresholds[static_cast<std::size_t>(j)];
                if (thr.empty()) continue;
                const std::size_t n_bins = thr.size() + 1;
                std::vector<double> hist_g(n_bins), hist_h(n_bins);
                kernels::gbt_histogram(bins[static_cast<std::size_t>(j)].data(), node.rows.data(),
                                       node.rows.size(), grad.data(), hess.data(), n_bins,
                                       hist_g.data(), hist_h.data());
                SplitChoice best;
                const double parent_score = node.g_sum * node.g_sum / (node.h_sum + kGbtLambda);
                double gl = 0.0, hl = 0.0;
                for (std::size_t s = 0; s < thr.size(); ++s) {
                    gl += hist_g[s];
                    hl += hist_h[s];
                    const double gr = node.g_sum - gl;
                    const double hr = node.h_sum - hl;
                    if (hl < hyper.min_child_weight || hr < hyper.min_child_weight) continue;
                    const double gain = 0.5 * (gl * gl / (hl + kGbtLambda) +
                                               gr * gr / (hr + kGbtLambda) - parent_score);
                    if (gain > best.gain) {
                        best.gain = gain;
                        best.threshold_idx = static_cast<int>(s);
                        best.g_left = gl;
                        best.h_left = hl;
                    }
                }
                per_feature[static_cast<std::size_t>(j)] = best;
            }

            int best_feature = -1;
            SplitChoice best;
            for (std::size_t j = 0; j < d; ++j) {
                if (per_feature[j].threshold_idx >= 0 && per_feature[j].gain > best.gain) {
                    best = per_feature[j];
                    best_feature = static_cast<int>(j);
                }
            }
            if (best_feature < 0 || best.gain <= 0.0) {
                make_leaf();
                continue;
            }

            const auto& col_bins = bins[static_cast<std::size_t>(best_feature)];
            std::vector<std::size_t> left_rows, right_rows;
            left_rows.reserve(node.rows.size());
            right_rows.reserve(node.rows.size());
            for (std::size_t r : node.rows) {
                if (col_bins[r] <= static_cast<std::uint8_t>(best.threshold_idx))
                    left_rows.push_back(r);
                else
                    right_rows.push_back(r);
            }

            const int left_id = static_cast<int>(tree.nodes.size());
            const int right_id = left_id + 1;
            tree.nodes.push_back(TreeNode{});
            tree.nodes.push_back(TreeNode{});
            TreeNode& parent = tree.nodes[static_cast<std::size_t>(node.id)];
            parent.feature = best_feature;
            parent.threshold =
                thresholds[static_cast<std::size_t>(best_feature)][static_cast<std::size_t>(
                    best.threshold_idx)];
            parent.left = left_id;
            parent.right = right_id;

            for (std::size_t r : left_rows) leaf_of[r] = left_id;
            for (std::size_t r : right_rows) leaf_of[r] = right_id;

            queue.push_back(BuildNode{left_id, node.depth + 1, std::move(left_rows), best.g_left,
                                      best.h_left});
            queue.push_back(BuildNode{right_id, node.depth + 1, std::move(right_rows),
                                      node.g_sum - best.g_left, node.h_sum - best.h_left});
        }

#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
            margins[i] += hyper.learning_rate *
                          tree.nodes[static_cast<std::size_t>(leaf_of[i])].leaf_value;
        }
        ensemble.trees.push_back(std::move(tree));
        ensemble.round_train_logloss.push_back(
            chunked_sum(n,
                        [&](std::size_t i) {
                            return log1pexp(margins[i]) - (data.y[i] != 0 ? margins[i] : 0.0);
                        }) /
            static_cast<double>(n));
    }
    return ensemble;
}

std::vector<double> predict_proba(const TreeEnsemble& model, const std::vector<double>& x,
                                  std::size_t n_rows, std::size_t n_cols) {
    for (const auto& tree : model.trees)
        for (const auto& node : tree.nodes)
            if (!node.is_leaf() && node.feature >= static_cast<int>(n_cols))
                throw DimensionMismatchError(static_cast<std::size_t>(node.feature) + 1, n_cols);
    std::vector<double> out(n_rows);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n_rows); ++i) {
        const std::span<const double> row{x.data() + static_cast<std::size_t>(i) * n_cols, n_cols};
        double m = model.base_score;
        for (const auto& tree : model.trees) m += model.hyper.learning_rate * tree.predict(row);
        out[i] = clamp_prob(sigmoid(m));
    }
    return out;
}

std::vector<double> predict_proba(const TreeEnsemble& model, const Dataset& data) {
    return predict_proba(model, data.x, data.n_rows, data.n_cols);
}

// ---------------------------------------------------------------------------
// serialization
// ---------------------------------------------------------------------------

std::string model_to_json(const LinearModel& model) {
    nlohmann::json j;
    j["family"] = "logistic";
    j["weights"] = model.weights;
    j["bias"] = model.bias;
    j["feature_means"] = model.feature_means;
    j["feature_sds"] = model.feature_sds;
    j["hyper"] = {{"l2_lambda", model.hyper.l2_lambda},
                  {"max_iter", model.hyper.max_iter},
                  {"tol", model.hyper.tol}};
    j["iterations"] = model.iterations;
    j["final_loss"] = model.final_loss;
    return j.dump(2);
}

std::string model_to_json(const TreeEnsemble& model) {
    nlohmann::json j;
    j["family"] = "gbt";
    j["base_score"] = model.base_score;
    j["hyper"] = {{"n_rounds", model.hyper.n_rounds},
                  {"max_depth", model.hyper.max_depth},
                  {"learning_rate", model.hyper.learning_rate},
                  {"min_child_weight", model.hyper.min_child_weight},
                  {"candidate_quantiles", model.hyper.candidate_quantiles}};
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& tree : model.trees) {
        nlohmann::json nodes = nlohmann::json::array();
        for (const auto& node : tree.nodes) {
            nodes.push_back({{"feature", node.feature},
                             {"threshold", node.threshold},
                             {"left", node.left},
                             {"right", node.right},
                             {"leaf_value", node.leaf_value}});
        }
        trees.push_back(std::move(nodes));
    }
    j["trees"] = std::move(trees);
    return j.dump(2);
}

LinearModel linear_model_from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    LinearModel model;
    model.weights = j.at("weights").get<std::vector<double>>();
    model.bias = j.at("bias").get<double>();
    model.feature_means = j.at("feature_means").get<std::vector<double>>();
    model.feature_sds = j.at("feature_sds").get<std::vector<double>>();
    model.hyper.l2_lambda = j.at("hyper").at("l2_lambda").get<double>();
    model.hyper.max_iter = j.at("hyper").at("max_iter").get<int>();
    model.hyper.tol = j.at("hyper").at("tol").get<double>();
    model.iterations = j.value("iterations", 0);
    model.final_loss = j.value("final_loss", 0.0);
    return model;
}

TreeEnsemble tree_ensemble_from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    TreeEnsemble model;
    model.base_score = j.at("base_score").get<double>();
    model.hyper.n_rounds = j.at("hyper").at("n_rounds").get<int>();
    model.hyper.max_depth = j.at("hyper").at("max_depth").get<int>();
    model.hyper.learning_rate = j.at("hyper").at("learning_rate").get<double>();
    model.hyper.min_child_weight = j.at("hyper").at("min_child_weight").get<double>();
    model.hyper.candidate_quantiles = j.at("hyper").at("candidate_quantiles").get<int>();
    for (const auto& tree_json : j.at("trees")) {
        Tree tree;
        for (const auto& node_json : tree_json) {
            TreeNode node;
            node.feature = node_json.at("feature").get<int>();
            node.threshold = node_json.at("threshold").get<double>();
            node.left = node_json.at("left").get<int>();
            node.right = node_json.at("right").get<int>();
            node.leaf_value = node_json.at("leaf_value").get<double>();
            tree.nodes.push_back(node);
        }
        model.trees.push_back(std::move(tree));
    }
    return model;
}

}  // namespace cfaudit
