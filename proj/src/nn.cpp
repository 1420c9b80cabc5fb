#include "drainwatch/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

namespace drainwatch::nn {

void Matrix::check_finite(const char* what) const {
    for (double x : data)
        if (!std::isfinite(x)) throw DataError(std::string("non-finite value in ") + what);
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) throw DataError("matmul shape mismatch");
    Matrix c(a.rows, b.cols);
    for (int i = 0; i < a.rows; ++i) {
        for (int k = 0; k < a.cols; ++k) {
            double aik = a.at(i, k);
            if (aik == 0.0) continue;
            const double* brow = &b.data[static_cast<size_t>(k) * b.cols];
            double* crow = &c.data[static_cast<size_t>(i) * c.cols];
            for (int j = 0; j < b.cols; ++j) crow[j] += aik * brow[j];
        }
    }
    return c;
}

std::vector<double> matvec(const Matrix& w, const std::vector<double>& x) {
    if (static_cast<size_t>(w.cols) != x.size()) throw DataError("matvec shape mismatch");
    std::vector<double> y(w.rows, 0.0);
    for (int i = 0; i < w.rows; ++i) {
        const double* row = &w.data[static_cast<size_t>(i) * w.cols];
        double s = 0.0;
        for (int j = 0; j < w.cols; ++j) s += row[j] * x[j];
        y[i] = s;
    }
    return y;
}

void matvec_backward(const Matrix& w, const std::vector<double>& x, const std::vector<double>& dy,
                     Matrix& grad_w, std::vector<double>* grad_x) {
    for (int i = 0; i < w.rows; ++i) {
        double g = dy[i];
        if (g == 0.0) continue;
        double* grow = &grad_w.data[static_cast<size_t>(i) * w.cols];
        for (int j = 0; j < w.cols; ++j) grow[j] += g * x[j];
    }
    if (grad_x != nullptr) {
        for (int i = 0; i < w.rows; ++i) {
            double g = dy[i];
            if (g == 0.0) continue;
            const double* row = &w.data[static_cast<size_t>(i) * w.cols];
            for (int j = 0; j < w.cols; ++j) (*grad_x)[j] += g * row[j];
        }
    }
}

void glorot_init(Matrix& m, Rng& rng) {
    double bound = std::sqrt(6.0 / (m.rows + m.cols));
    for (double& x : m.data) x = uniform(rng, -bound, bound);
}

double relu(double x) { return x > 0 ? x : 0.0; }
double relu_grad(double x) { return x > 0 ? 1.0 : 0.0; }
double leaky_relu(double x, double slope) { return x > 0 ? x : slope * x; }
double leaky_relu_grad(double x, double slope) { return x > 0 ? 1.0 : slope; }

std::vector<double> softmax(const std::vector<double>& logits) {
    double mx = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double sum = 0.0;
    for (size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - mx);
        sum += p[i];
    }
    for (double& x : p) x /= sum;
    return p;
}

std::vector<double> softmax_backward(const std::vector<double>& p, const std::vector<double>& dp) {
    double dot = 0.0;
    for (size_t i = 0; i < p.size(); ++i) dot += p[i] * dp[i];
    std::vector<double> dz(p.size());
    for (size_t i = 0; i < p.size(); ++i) dz[i] = p[i] * (dp[i] - dot);
    return dz;
}

std::vector<double> mean_pool(const std::vector<const std::vector<double>*>& rows) {
    if (rows.empty()) throw DataError("mean_pool: empty pool");
    std::vector<double> out(rows.front()->size(), 0.0);
    for (const auto* row : rows)
        for (size_t j = 0; j < out.size(); ++j) out[j] += (*row)[j];
    for (double& x : out) x /= static_cast<double>(rows.size());
    return out;
}

double cross_entropy(const Matrix& logits, const std::vector<int>& labels, Matrix* d_logits) {
    if (logits.cols != 2 || logits.rows != static_cast<int>(labels.size()))
        throw DataError("cross_entropy shape mismatch");
    double loss = 0.0;
    const double inv_n = 1.0 / logits.rows;
    for (int i = 0; i < logits.rows; ++i) {
        std::vector<double> row = {logits.at(i, 0), logits.at(i, 1)};
        auto p = softmax(row);
        int y = labels[i];
        loss -= std::log(std::max(p[y], 1e-300)) * inv_n;
        if (d_logits != nullptr) {
            d_logits->at(i, 0) = (p[0] - (y == 0 ? 1.0 : 0.0)) * inv_n;
            d_logits->at(i, 1) = (p[1] - (y == 1 ? 1.0 : 0.0)) * inv_n;
        }
    }
    return loss;
}

void adam_step(std::vector<Parameter*>& params, const AdamConfig& cfg) {
    for (Parameter* p : params) {
        p->step++;
        double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(p->step));
        double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(p->step));
        for (size_t i = 0; i < p->value.size(); ++i) {
            double g = p->grad.data[i];
            p->adam_m.data[i] = cfg.beta1 * p->adam_m.data[i] + (1 - cfg.beta1) * g;
            p->adam_v.data[i] = cfg.beta2 * p->adam_v.data[i] + (1 - cfg.beta2) * g * g;
            double mhat = p->adam_m.data[i] / bc1;
            double vhat = p->adam_v.data[i] / bc2;
            p->value.data[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
        }
        p->zero_grad();
    }
}

double grad_check(const std::function<double()>& closure, std::vector<Parameter*>& params,
                  double eps) {
    double base1 = closure();
    std::vector<Matrix> analytic;
    for (Parameter* p : params) analytic.push_back(p->grad);
    double base2 = closure();
    if (std::abs(base1 - base2) > 1e-12 * (1.0 + std::abs(base1)))
        throw DataError("grad_check: closure is not deterministic");

    double max_rel = 0.0;
    for (size_t pi = 0; pi < params.size(); ++pi) {
        Parameter* p = params[pi];
        for (size_t i = 0; i < p->value.size(); ++i) {
            double orig = p->value.data[i];
            p->value.data[i] = orig + eps;
            double fp = closure();
            p->value.data[i] = orig - eps;
            double fm = closure();
            p->value.data[i] = orig;
            double numeric = (fp - fm) / (2 * eps);
            double a = analytic[pi].data[i];
            double denom = std::max({std::abs(numeric), std::abs(a), 1e-8});
            max_rel = std::max(max_rel, std::abs(numeric - a) / denom);
        }
    }
    // leave gradients in the analytic state
    closure();
    return max_rel;
}

namespace {
constexpr uint32_t kMagic = 0x4457434Bu;  // "DWCK"
constexpr uint32_t kVersion = 1;

template <typename T>
void put(std::ofstream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
T get(std::ifstream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    return v;
}
}  // namespace

void save_checkpoint(const std::string& path, const std::vector<const Parameter*>& params) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write checkpoint " + path);
    put(out, kMagic);
    put(out, kVersion);
    put(out, static_cast<uint32_t>(params.size()));
    for (const Parameter* p : params) {
        put(out, static_cast<uint32_t>(p->name.size()));
        out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
        put(out, static_cast<uint32_t>(p->value.rows));
        put(out, static_cast<uint32_t>(p->value.cols));
    }
    for (const Parameter* p : params)
        out.write(reinterpret_cast<const char*>(p->value.data.data()),
                  static_cast<std::streamsize>(p->value.size() * sizeof(double)));
}

void load_checkpoint(const std::string& path, std::vector<Parameter*>& params) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint " + path);
    if (get<uint32_t>(in) != kMagic) throw DataError("bad checkpoint magic in " + path);
    if (get<uint32_t>(in) != kVersion) throw DataError("unsupported checkpoint version in " + path);
    uint32_t count = get<uint32_t>(in);
    if (count != params.size()) throw DataError("checkpoint parameter count mismatch in " + path);
    for (Parameter* p : params) {
        uint32_t name_len = get<uint32_t>(in);
        std::string name(name_len, '\0');
        in.read(name.data(), name_len);
        uint32_t rows = get<uint32_t>(in);
        uint32_t cols = get<uint32_t>(in);
        if (name != p->name || rows != static_cast<uint32_t>(p->value.rows) ||
            cols != static_cast<uint32_t>(p->value.cols))
            throw DataError("checkpoint shape table mismatch for " + p->name);
    }
    for (Parameter* p : params) {
        in.read(reinterpret_cast<char*>(p->value.data.data()),
                static_cast<std::streamsize>(p->value.size() * sizeof(double)));
        p->value.check_finite(p->name.c_str());
    }
    if (!in) throw DataError("truncated checkpoint " + path);
}

}  // namespace drainwatch::nn
