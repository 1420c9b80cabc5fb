#pragma once

#include <unordered_map>

#include "drainwatch/graphs.hpp"
#include "drainwatch/nn.hpp"

namespace drainwatch::extractors {

using graphs::NftUserGraph;
using graphs::Relation;
using graphs::UserGraph;

constexpr double kAttentionSlope = 0.2;

struct TrainConfig {
    double lr = 6e-4;
    int max_epochs = 200;
    int patience = 10;
    double val_frac = 0.1;
    uint64_t seed = 0;
};

struct TrainOutcome {
    double best_val_f1 = 0.0;
    double final_train_f1 = 0.0;
    int epochs_run = 0;
};

// Transaction context extractor: per-NFT mean aggregation of ownership edges,
// per-ownership linear mix, multi-head attention over each user's NFTs.
class TceModel {
public:
    TceModel(int hidden, int heads, uint64_t seed);

    int hidden() const { return hidden_; }
    int heads() const { return heads_; }
    std::vector<nn::Parameter*> params();
    std::vector<const nn::Parameter*> params() const;

    // Pre-head 64-dim representation per requested user node. Users with no
    // edges get a zero vector.
    std::vector<std::vector<double>> embed(const NftUserGraph& g, const std::vector<int>& users) const;

    // Cross-entropy through the linear head over the given labeled users;
    // zeroes then fills parameter gradients. Returns the loss.
    double loss_and_grad(const NftUserGraph& g, const std::vector<int>& users,
                         const std::vector<int>& labels);

    // Head logits for the given users (argmax = predicted class).
    std::vector<std::array<double, 2>> logits(const NftUserGraph& g,
                                              const std::vector<int>& users) const;

    TrainOutcome train(const NftUserGraph& g, const std::vector<int>& users,
                       const std::vector<int>& labels, const TrainConfig& cfg);

    nn::Parameter w_nft;                // hidden x 11
    nn::Parameter w_own;                // hidden x (11 + hidden)
    std::vector<nn::Parameter> attn;    // per head, 1 x hidden
    nn::Parameter head_w;               // 2 x hidden
    nn::Parameter head_b;               // 2 x 1

private:
    int hidden_;
    int heads_;
};

// Social context extractor: additive R-GCN with per-relation weights and
// 1/|N(u)_r| normalization; dims chain 19 -> hidden -> hidden.
class SceModel {
public:
    SceModel(int hidden, int layers, uint64_t seed);

    int hidden() const { return hidden_; }
    int layers() const { return layers_; }
    std::vector<nn::Parameter*> params();
    std::vector<const nn::Parameter*> params() const;

    std::vector<std::vector<double>> embed(const UserGraph& g,
                                           const std::vector<std::vector<double>>& scaled_attrs,
                                           const std::vector<int>& users) const;
    double loss_and_grad(const UserGraph& g, const std::vector<std::vector<double>>& scaled_attrs,
                         const std::vector<int>& users, const std::vector<int>& labels);
    std::vector<std::array<double, 2>> logits(const UserGraph& g,
                                              const std::vector<std::vector<double>>& scaled_attrs,
                                              const std::vector<int>& users) const;
    TrainOutcome train(const UserGraph& g, const std::vector<std::vector<double>>& scaled_attrs,
                       const std::vector<int>& users, const std::vector<int>& labels,
                       const TrainConfig& cfg);

    struct Layer {
        nn::Parameter w_self;
        nn::Parameter w_sale;
        nn::Parameter w_gift;
    };
    std::vector<Layer> layer_params;
    nn::Parameter head_w;  // 2 x hidden
    nn::Parameter head_b;  // 2 x 1

private:
    // Full propagation over every node; returns per-layer activations
    // (h[0] = inputs, h[layers] = output reps).
    std::vector<std::vector<std::vector<double>>> propagate(
        const UserGraph& g, const std::vector<std::vector<double>>& scaled_attrs) const;

    int hidden_;
    int layers_;
};

// Stratified validation split, seeded: returns indices into `users`.
void split_train_val(const std::vector<int>& labels, double val_frac, uint64_t seed,
                     std::vector<int>& train_idx, std::vector<int>& val_idx);

double f1_score(const std::vector<int>& pred, const std::vector<int>& truth);

}  // namespace drainwatch::extractors
