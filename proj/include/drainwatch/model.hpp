#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "drainwatch/common.hpp"

namespace drainwatch::model {

struct AblationMask {
    bool use_tce = true;
    bool use_sce = true;
    bool use_user = true;
    int dims(int tce_dim, int sce_dim, int user_dim) const {
        return (use_tce ? tce_dim : 0) + (use_sce ? sce_dim : 0) + (use_user ? user_dim : 0);
    }
};

// Concatenation in fixed order [TCE; SCE; scaled user attributes], with
// disabled blocks omitted.
std::vector<double> fuse(const std::vector<double>* tce_emb, const std::vector<double>* sce_emb,
                         const std::vector<double>* user_attrs, const AblationMask& mask);

struct SvmConfig {
    double C = 0.1;
    double gamma = 0.1;
    double tol = 1e-3;
    uint64_t seed = 0;
    bool fit_platt = true;
    int max_passes = 200;  // sweeps without progress before giving up
};

struct SvmModel {
    std::vector<std::vector<double>> support_vectors;
    std::vector<double> dual_coef;  // alpha_i * y_i
    double bias = 0.0;
    double gamma = 0.1;
    double C = 0.1;
    double platt_a = 0.0;  // risk = 1 / (1 + exp(a * decision + b))
    double platt_b = 0.0;
    int dims = 0;
    std::vector<double> full_alpha;  // per training row; not serialized

    double decision(const std::vector<double>& x) const;
    double risk(double decision_value) const;
};

struct SvmPrediction {
    int label = 0;  // 1 = drainer
    double decision_value = 0.0;
    double risk_score = 0.0;
};

// SMO dual optimization to KKT tolerance, RBF kernel; Platt scaling fit on a
// seeded 5-fold split of training decision values.
SvmModel svm_train(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                   const SvmConfig& cfg = {});

std::vector<SvmPrediction> svm_predict(const SvmModel& model,
                                       const std::vector<std::vector<double>>& x);

// Max KKT violation over the dual variables of the trained model, recomputed
// from the training set (diagnostic / property tests).
double kkt_violation(const SvmModel& model, const std::vector<std::vector<double>>& x,
                     const std::vector<int>& y, const std::vector<double>& alpha);

void save_svm(const std::string& path, const SvmModel& model);
SvmModel load_svm(const std::string& path);

// Internal: sigmoid calibration on (decision, label) pairs.
void fit_platt_sigmoid(const std::vector<double>& decisions, const std::vector<int>& labels,
                       double& a, double& b);

}  // namespace drainwatch::model
