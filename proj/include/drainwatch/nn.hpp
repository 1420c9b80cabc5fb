#pragma once

#include <functional>
#include <string>
#include <vector>

#include "drainwatch/common.hpp"

namespace drainwatch::nn {

// Dense row-major float64 matrix. Finite entries enforced on creation.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {}

    double& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }
    size_t size() const { return data.size(); }
    void zero() { std::fill(data.begin(), data.end(), 0.0); }
    void check_finite(const char* what) const;
};

Matrix matmul(const Matrix& a, const Matrix& b);
// y = W x for a column vector x (size W.cols); returns size W.rows.
std::vector<double> matvec(const Matrix& w, const std::vector<double>& x);
// grad_w += dy * x^T ; grad_x += W^T dy
void matvec_backward(const Matrix& w, const std::vector<double>& x, const std::vector<double>& dy,
                     Matrix& grad_w, std::vector<double>* grad_x);

struct Parameter {
    std::string name;
    Matrix value;
    Matrix grad;
    Matrix adam_m;
    Matrix adam_v;
    int64_t step = 0;

    Parameter() = default;
    Parameter(std::string n, int r, int c)
        : name(std::move(n)), value(r, c), grad(r, c), adam_m(r, c), adam_v(r, c) {}

    void zero_grad() { grad.zero(); }
};

// Uniform Glorot-range init, seeded.
void glorot_init(Matrix& m, Rng& rng);

double relu(double x);
double relu_grad(double x);
double leaky_relu(double x, double slope);
double leaky_relu_grad(double x, double slope);

// Numerically stabilized softmax of one row (max subtraction).
std::vector<double> softmax(const std::vector<double>& logits);
// dz given softmax output p and upstream dp.
std::vector<double> softmax_backward(const std::vector<double>& p, const std::vector<double>& dp);

// Column-wise mean of a set of rows; backward distributes 1/n.
std::vector<double> mean_pool(const std::vector<const std::vector<double>*>& rows);

// Mean negative log-softmax of the true class over all rows.
// logits: n x 2, labels in {0,1}. d_logits is filled with the gradient.
double cross_entropy(const Matrix& logits, const std::vector<int>& labels, Matrix* d_logits);

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Standard Adam update; increments the step counter and zeroes gradients.
void adam_step(std::vector<Parameter*>& params, const AdamConfig& cfg);

// Central finite differences against the analytic gradients left in
// param.grad by the closure. Returns the max relative error. The closure must
// compute the loss AND populate gradients (it is re-run after perturbations).
double grad_check(const std::function<double()>& closure, std::vector<Parameter*>& params,
                  double eps = 1e-5);

// Flat binary checkpoint: magic, version, shape table, float64 payload.
void save_checkpoint(const std::string& path, const std::vector<const Parameter*>& params);
void load_checkpoint(const std::string& path, std::vector<Parameter*>& params);

}  // namespace drainwatch::nn
