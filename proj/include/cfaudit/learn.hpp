#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cfaudit/prep.hpp"

namespace cfaudit {

struct LogisticHyper {
    double l2_lambda = 1.0;
    int max_iter = 1000;
    double tol = 1e-6;  // gradient infinity-norm
};

struct GbtHyper {
    int n_rounds = 100;
    int max_depth = 3;
    double learning_rate = 0.1;
    double min_child_weight = 1.0;  // minimum hessian sum per child
    int candidate_quantiles = 32;
};

// Dense row-major training block.
struct Dataset {
    std::vector<double> x;
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<int> y;

    std::span<const double> row(std::size_t r) const { return {x.data() + r * n_cols, n_cols}; }
};

Dataset gather(const FeatureMatrix& matrix, const TaskLabel& labels,
               const std::vector<std::size_t>& row_indices);

struct LinearModel {
    std::vector<double> weights;  // per standardized feature
    double bias = 0.0;
    std::vector<double> feature_means;
    std::vector<double> feature_sds;  // constant columns get sd = 1
    LogisticHyper hyper;
    int iterations = 0;
    double final_loss = 0.0;
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double leaf_value = 0.0;

    bool is_leaf() const { return feature < 0; }
};

struct Tree {
    std::vector<TreeNode> nodes;
    double predict(std::span<const double> row) const;
};

struct TreeEnsemble {
    std::vector<Tree> trees;
    double base_score = 0.0;  // log-odds
    GbtHyper hyper;
    std::vector<double> round_train_logloss;  // one entry per boosting round
};

LinearModel train_logistic(const Dataset& data, const LogisticHyper& hyper = {});
TreeEnsemble train_gbt(const Dataset& data, const GbtHyper& hyper = {});

std::vector<double> predict_proba(const LinearModel& model, const std::vector<double>& x,
                                  std::size_t n_rows, std::size_t n_cols);
std::vector<double> predict_proba(const TreeEnsemble& model, const std::vector<double>& x,
                                  std::size_t n_rows, std::size_t n_cols);
std::vector<double> predict_proba(const LinearModel& model, const Dataset& data);
std::vector<double> predict_proba(const TreeEnsemble& model, const Dataset& data);

std::string model_to_json(const LinearModel& model);
std::string model_to_json(const TreeEnsemble& model);
LinearModel linear_model_from_json(const std::string& text);
TreeEnsemble tree_ensemble_from_json(const std::string& text);

// Hot inner kernels, exposed for the serial-reference tests and the
// benchmark. The production versions parallelize with OpenMP but reduce in
// fixed chunk order, so results do not depend on the thread count.
namespace kernels {

// margins[i] = w . Z_row(i) + b
void linear_margins(const double* z, std::size_t n, std::size_t d, const double* w, double b,
                    double* margins);

// mean logistic loss over margins plus (l2/n)*||w||^2
double logistic_loss(const double* margins, const int* y, std::size_t n, const double* w,
                     std::size_t d, double l2);

// gradient of the above; grad has d+1 entries, bias last
void logistic_grad(const double* z, const double* margins, const int* y, std::size_t n,
                   std::size_t d, const double* w, double l2, double* grad);

// per-bin gradient/hessian histogram for one feature over the given rows
void gbt_histogram(const std::uint8_t* bins_col, const std::size_t* rows, std::size_t n_rows,
                   const double* grad, const double* hess, std::size_t n_bins, double* hist_g,
                   double* hist_h);

}  // namespace kernels

// Plain single-threaded implementations of the same kernels, kept as a
// reference for testing and benchmarking the parallel versions.
namespace reference {

void linear_margins(const double* z, std::size_t n, std::size_t d, const double* w, double b,
                    double* margins);
double logistic_loss(const double* margins, const int* y, std::size_t n, const double* w,
                     std::size_t d, double l2);
void logistic_grad(const double* z, const double* margins, const int* y, std::size_t n,
                   std::size_t d, const double* w, double l2, double* grad);
void gbt_histogram(const std::uint8_t* bins_col, const std::size_t* rows, std::size_t n_rows,
                   const double* grad, const double* hess, std::size_t n_bins, double* hist_g,
                   double* hist_h);

}  // namespace reference

}  // namespace cfaudit
