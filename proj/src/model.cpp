#include "drainwatch/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace drainwatch::model {

std::vector<double> fuse(const std::vector<double>* tce_emb, const std::vector<double>* sce_emb,
                         const std::vector<double>* user_attrs, const AblationMask& mask) {
    std::vector<double> out;
    auto append = [&](const std::vector<double>* block, const char* what) {
        if (block == nullptr) throw DataError(std::string("missing representation block: ") + what);
        out.insert(out.end(), block->begin(), block->end());
    };
    if (mask.use_tce) append(tce_emb, "nft transaction context");
    if (mask.use_sce) append(sce_emb, "social context");
    if (mask.use_user) append(user_attrs, "user attributes");
    return out;
}

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// RBF kernel with an on-demand row cache.
class Kernel {
public:
    Kernel(const std::vector<std::vector<double>>& x, double gamma) : x_(x), gamma_(gamma) {
        sq_.resize(x.size());
        for (size_t i = 0; i < x.size(); ++i) sq_[i] = dot(x[i], x[i]);
        size_t budget_rows = std::max<size_t>(64, (200ull << 20) / (sizeof(float) * std::max<size_t>(1, x.size())));
        capacity_ = std::min(budget_rows, x.size());
        slot_of_.assign(x.size(), -1);
        storage_.resize(capacity_ * x.size());
        slot_owner_.assign(capacity_, -1);
    }

    const float* row(int i) {
        if (slot_of_[i] >= 0) return &storage_[static_cast<size_t>(slot_of_[i]) * x_.size()];
        int slot = static_cast<int>(clock_ % capacity_);
        ++clock_;
        if (slot_owner_[slot] >= 0) slot_of_[slot_owner_[slot]] = -1;
        slot_owner_[slot] = i;
        slot_of_[i] = slot;
        float* dst = &storage_[static_cast<size_t>(slot) * x_.size()];
        for (size_t j = 0; j < x_.size(); ++j)
            dst[j] = static_cast<float>(std::exp(-gamma_ * (sq_[i] + sq_[j] - 2.0 * dot(x_[i], x_[j]))));
        return dst;
    }

    double at(int i, int j) {
        if (slot_of_[i] >= 0) return row(i)[j];
        if (slot_of_[j] >= 0) return row(j)[i];
        return std::exp(-gamma_ * (sq_[i] + sq_[j] - 2.0 * dot(x_[i], x_[j])));
    }

private:
    const std::vector<std::vector<double>>& x_;
    double gamma_;
    std::vector<double> sq_;
    size_t capacity_;
    uint64_t clock_ = 0;
    std::vector<int> slot_of_;
    std::vector<int> slot_owner_;
    std::vector<float> storage_;
};

struct Smo {
    const std::vector<std::vector<double>>& x;
    const std::vector<int>& y;  // +-1
    double C, tol;
    Kernel kernel;
    std::vector<double> alpha;
    std::vector<double> err;  // f(x_i) - y_i
    double b = 0.0;

    Smo(const std::vector<std::vector<double>>& x_, const std::vector<int>& y_, double c, double g,
        double t)
        : x(x_), y(y_), C(c), tol(t), kernel(x_, g), alpha(x_.size(), 0.0), err(x_.size()) {
        for (size_t i = 0; i < x.size(); ++i) err[i] = -y[i];  // f = 0 initially
    }

    bool take_step(int i1, int i2) {
        if (i1 == i2) return false;
        double a1 = alpha[i1], a2 = alpha[i2];
        int y1 = y[i1], y2 = y[i2];
        double e1 = err[i1], e2 = err[i2];
        double s = y1 * y2;
        double lo, hi;
        if (y1 != y2) {
            lo = std::max(0.0, a2 - a1);
            hi = std::min(C, C + a2 - a1);
        } else {
            lo = std::max(0.0, a1 + a2 - C);
            hi = std::min(C, a1 + a2);
        }
        if (lo >= hi) return false;
        double k11 = kernel.at(i1, i1), k22 = kernel.at(i2, i2), k12 = kernel.at(i1, i2);
        double eta = k11 + k22 - 2 * k12;
        double a2_new;
        if (eta > 1e-12) {
            a2_new = a2 + y2 * (e1 - e2) / eta;
            a2_new = std::clamp(a2_new, lo, hi);
        } else {
            // Degenerate kernel direction: move to the better bound.
            double f1 = y1 * (e1 + b) - a1 * k11 - s * a2 * k12;
            double f2 = y2 * (e2 + b) - s * a1 * k12 - a2 * k22;
            double l1 = a1 + s * (a2 - lo), h1 = a1 + s * (a2 - hi);
            double obj_lo = l1 * f1 + lo * f2 + 0.5 * l1 * l1 * k11 + 0.5 * lo * lo * k22 + s * lo * l1 * k12;
            double obj_hi = h1 * f1 + hi * f2 + 0.5 * h1 * h1 * k11 + 0.5 * hi * hi * k22 + s * hi * h1 * k12;
            if (obj_lo < obj_hi - 1e-12) a2_new = lo;
            else if (obj_hi < obj_lo - 1e-12) a2_new = hi;
            else a2_new = a2;
        }
        if (std::abs(a2_new - a2) < 1e-12 * (a2_new + a2 + 1e-12)) return false;
        double a1_new = a1 + s * (a2 - a2_new);
        // snap numerical spill at the box bounds
        if (a1_new < 1e-10) a1_new = 0.0;
        else if (a1_new > C - 1e-10) a1_new = C;

        double b1 = e1 + y1 * (a1_new - a1) * k11 + y2 * (a2_new - a2) * k12 + b;
        double b2 = e2 + y1 * (a1_new - a1) * k12 + y2 * (a2_new - a2) * k22 + b;
        double b_new;
        if (a1_new > 0 && a1_new < C) b_new = b1;
        else if (a2_new > 0 && a2_new < C) b_new = b2;
        else b_new = (b1 + b2) / 2;

        double d1 = y1 * (a1_new - a1), d2 = y2 * (a2_new - a2), db = b_new - b;
        const float* r1 = kernel.row(i1);
        const float* r2 = kernel.row(i2);
        for (size_t j = 0; j < x.size(); ++j) err[j] += d1 * r1[j] + d2 * r2[j] - db;
        alpha[i1] = a1_new;
        alpha[i2] = a2_new;
        b = b_new;
        err[i1] = f_of(i1) - y1;  // keep the pivots exact
        err[i2] = f_of(i2) - y2;
        return true;
    }

    double f_of(int i) {
        const float* r = kernel.row(i);
        double f = -b;
        for (size_t j = 0; j < x.size(); ++j)
            if (alpha[j] > 0) f += alpha[j] * y[j] * r[j];
        return f;
    }

    bool examine(int i2) {
        double r2 = err[i2] * y[i2];
        if (!((r2 < -tol && alpha[i2] < C) || (r2 > tol && alpha[i2] > 0))) return false;
        // best |E1 - E2| over non-bound points
        int best = -1;
        double gap = 0.0;
        for (size_t i = 0; i < x.size(); ++i) {
            if (alpha[i] <= 0 || alpha[i] >= C) continue;
            double g = std::abs(err[i] - err[i2]);
            if (g > gap) {
                gap = g;
                best = static_cast<int>(i);
            }
        }
        if (best >= 0 && take_step(best, i2)) return true;
        for (size_t i = 0; i < x.size(); ++i) {
            if (alpha[i] <= 0 || alpha[i] >= C) continue;
            if (take_step(static_cast<int>(i), i2)) return true;
        }
        for (size_t i = 0; i < x.size(); ++i)
            if (take_step(static_cast<int>(i), i2)) return true;
        return false;
    }

    void solve(int max_passes) {
        bool examine_all = true;
        int changed = 0;
        int passes = 0;
        do {
            changed = 0;
            for (size_t i = 0; i < x.size(); ++i) {
                if (!examine_all && (alpha[i] <= 0 || alpha[i] >= C)) continue;
                if (examine(static_cast<int>(i))) ++changed;
            }
            if (examine_all) examine_all = false;
            else if (changed == 0) examine_all = true;
            ++passes;
        } while ((changed > 0 || examine_all) && passes < max_passes);
    }
};

SvmModel train_core(const std::vector<std::vector<double>>& x, const std::vector<int>& y_pm,
                    const SvmConfig& cfg) {
    Smo smo(x, y_pm, cfg.C, cfg.gamma, cfg.tol);
    smo.solve(cfg.max_passes);
    SvmModel m;
    m.gamma = cfg.gamma;
    m.C = cfg.C;
    m.bias = -smo.b;  // decision(x) = sum coef K(sv, x) + bias
    m.dims = static_cast<int>(x.front().size());
    m.full_alpha = smo.alpha;
    for (size_t i = 0; i < x.size(); ++i) {
        if (smo.alpha[i] > 0) {
            m.support_vectors.push_back(x[i]);
            m.dual_coef.push_back(smo.alpha[i] * y_pm[i]);
        }
    }
    return m;
}

}  // namespace

double SvmModel::decision(const std::vector<double>& x) const {
    if (static_cast<int>(x.size()) != dims) throw DataError("svm feature dimension mismatch");
    double f = bias;
    for (size_t i = 0; i < support_vectors.size(); ++i) {
        const auto& sv = support_vectors[i];
        double d2 = 0.0;
        for (size_t j = 0; j < sv.size(); ++j) {
            double d = sv[j] - x[j];
            d2 += d * d;
        }
        f += dual_coef[i] * std::exp(-gamma * d2);
    }
    return f;
}

double SvmModel::risk(double decision_value) const {
    return 1.0 / (1.0 + std::exp(platt_a * decision_value + platt_b));
}

void fit_platt_sigmoid(const std::vector<double>& decisions, const std::vector<int>& labels,
                       double& a, double& b) {
    double prior1 = 0, prior0 = 0;
    for (int l : labels) (l == 1 ? prior1 : prior0) += 1;
    double hi = (prior1 + 1.0) / (prior1 + 2.0);
    double lo = 1.0 / (prior0 + 2.0);
    std::vector<double> t(labels.size());
    for (size_t i = 0; i < labels.size(); ++i) t[i] = labels[i] == 1 ? hi : lo;

    a = 0.0;
    b = std::log((prior0 + 1.0) / (prior1 + 1.0));
    auto objective = [&](double A, double B) {
        double f = 0.0;
        for (size_t i = 0; i < decisions.size(); ++i) {
            double z = A * decisions[i] + B;
            if (z >= 0)
                f += t[i] * z + std::log1p(std::exp(-z));
            else
                f += (t[i] - 1) * z + std::log1p(std::exp(z));
        }
        return f;
    };
    double fval = objective(a, b);
    for (int it = 0; it < 100; ++it) {
        double h11 = 1e-12, h22 = 1e-12, h21 = 0, g1 = 0, g2 = 0;
        for (size_t i = 0; i < decisions.size(); ++i) {
            double z = a * decisions[i] + b;
            double p = z >= 0 ? std::exp(-z) / (1 + std::exp(-z)) : 1.0 / (1 + std::exp(z));
            double q = 1 - p;
            double d2 = p * q;
            h11 += decisions[i] * decisions[i] * d2;
            h22 += d2;
            h21 += decisions[i] * d2;
            double d1 = t[i] - p;
            g1 += decisions[i] * d1;
            g2 += d1;
        }
        if (std::abs(g1) < 1e-5 && std::abs(g2) < 1e-5) break;
        double det = h11 * h22 - h21 * h21;
        double da = -(h22 * g1 - h21 * g2) / det;
        double db = -(-h21 * g1 + h11 * g2) / det;
        double gd = g1 * da + g2 * db;
        double step = 1.0;
        bool moved = false;
        while (step >= 1e-10) {
            double na = a + step * da, nb = b + step * db;
            double nf = objective(na, nb);
            if (nf < fval + 1e-4 * step * gd) {
                a = na;
                b = nb;
                fval = nf;
                moved = true;
                break;
            }
            step /= 2;
        }
        if (!moved) break;
    }
}

SvmModel svm_train(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                   const SvmConfig& cfg) {
    if (x.empty()) throw DataError("svm_train: empty training set");
    for (const auto& row : x)
        for (double v : row)
            if (!std::isfinite(v)) throw DataError("svm_train: non-finite feature value");
    int n_pos = static_cast<int>(std::count(y.begin(), y.end(), 1));
    if (n_pos == 0 || n_pos == static_cast<int>(y.size()))
        throw DataError("svm_train: training set has a single class");

    std::vector<int> y_pm(y.size());
    for (size_t i = 0; i < y.size(); ++i) y_pm[i] = y[i] == 1 ? 1 : -1;

    SvmModel m = train_core(x, y_pm, cfg);

    if (cfg.fit_platt) {
        // Out-of-fold decision values from a seeded stratified 5-fold split.
        const int k = 5;
        std::vector<int> fold(x.size());
        {
            std::vector<int> pos, neg;
            for (size_t i = 0; i < y.size(); ++i) (y[i] == 1 ? pos : neg).push_back(static_cast<int>(i));
            Rng rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
            std::shuffle(pos.begin(), pos.end(), rng);
            std::shuffle(neg.begin(), neg.end(), rng);
            for (size_t i = 0; i < pos.size(); ++i) fold[pos[i]] = static_cast<int>(i % k);
            for (size_t i = 0; i < neg.size(); ++i) fold[neg[i]] = static_cast<int>(i % k);
        }
        std::vector<double> decisions;
        std::vector<int> dec_labels;
        for (int f = 0; f < k; ++f) {
            std::vector<std::vector<double>> xt;
            std::vector<int> yt;
            std::vector<int> hold;
            for (size_t i = 0; i < x.size(); ++i) {
                if (fold[i] == f) hold.push_back(static_cast<int>(i));
                else {
                    xt.push_back(x[i]);
                    yt.push_back(y_pm[i]);
                }
            }
            if (hold.empty()) continue;
            int fold_pos = static_cast<int>(std::count(yt.begin(), yt.end(), 1));
            if (fold_pos == 0 || fold_pos == static_cast<int>(yt.size())) continue;
            SvmModel fm = train_core(xt, yt, cfg);
            for (int i : hold) {
                decisions.push_back(fm.decision(x[i]));
                dec_labels.push_back(y[i]);
            }
        }
        if (!decisions.empty()) fit_platt_sigmoid(decisions, dec_labels, m.platt_a, m.platt_b);
    }
    return m;
}

std::vector<SvmPrediction> svm_predict(const SvmModel& model,
                                       const std::vector<std::vector<double>>& x) {
    std::vector<SvmPrediction> out(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
        double f = model.decision(x[i]);
        out[i].decision_value = f;
        out[i].label = f > 0 ? 1 : 0;  // tie at 0 classified regular
        out[i].risk_score = model.risk(f);
    }
    return out;
}

double kkt_violation(const SvmModel& model, const std::vector<std::vector<double>>& x,
                     const std::vector<int>& y, const std::vector<double>& alpha) {
    double worst = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        double yf = (y[i] == 1 ? 1.0 : -1.0) * model.decision(x[i]);
        double v = 0.0;
        if (alpha[i] <= 1e-12)
            v = std::max(0.0, 1.0 - yf);           // alpha = 0  => y f >= 1
        else if (alpha[i] >= model.C - 1e-12)
            v = std::max(0.0, yf - 1.0);           // alpha = C  => y f <= 1
        else
            v = std::abs(yf - 1.0);                // 0 < alpha < C  => y f = 1
        worst = std::max(worst, v);
    }
    return worst;
}

namespace {
constexpr uint32_t kSvmMagic = 0x44575356u;  // "DWSV"
constexpr uint32_t kSvmVersion = 1;

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

void save_svm(const std::string& path, const SvmModel& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write svm model " + path);
    put(out, kSvmMagic);
    put(out, kSvmVersion);
    put(out, static_cast<uint32_t>(m.support_vectors.size()));
    put(out, static_cast<uint32_t>(m.dims));
    put(out, m.gamma);
    put(out, m.C);
    put(out, m.bias);
    put(out, m.platt_a);
    put(out, m.platt_b);
    for (size_t i = 0; i < m.support_vectors.size(); ++i) {
        put(out, m.dual_coef[i]);
        out.write(reinterpret_cast<const char*>(m.support_vectors[i].data()),
                  static_cast<std::streamsize>(m.dims * sizeof(double)));
    }
}

SvmModel load_svm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open svm model " + path);
    if (get<uint32_t>(in) != kSvmMagic) throw DataError("bad svm model magic in " + path);
    if (get<uint32_t>(in) != kSvmVersion) throw DataError("unsupported svm model version");
    uint32_t n_sv = get<uint32_t>(in);
    SvmModel m;
    m.dims = static_cast<int>(get<uint32_t>(in));
    m.gamma = get<double>(in);
    m.C = get<double>(in);
    m.bias = get<double>(in);
    m.platt_a = get<double>(in);
    m.platt_b = get<double>(in);
    for (uint32_t i = 0; i < n_sv; ++i) {
        m.dual_coef.push_back(get<double>(in));
        std::vector<double> sv(m.dims);
        in.read(reinterpret_cast<char*>(sv.data()),
                static_cast<std::streamsize>(m.dims * sizeof(double)));
        m.support_vectors.push_back(std::move(sv));
    }
    if (!in) throw DataError("truncated svm model " + path);
    return m;
}

}  // namespace drainwatch::model
