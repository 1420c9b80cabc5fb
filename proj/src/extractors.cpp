#include "drainwatch/extractors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace drainwatch::extractors {

using nn::Matrix;
using nn::Parameter;

void split_train_val(const std::vector<int>& labels, double val_frac, uint64_t seed,
                     std::vector<int>& train_idx, std::vector<int>& val_idx) {
    train_idx.clear();
    val_idx.clear();
    std::vector<int> pos, neg;
    for (int i = 0; i < static_cast<int>(labels.size()); ++i)
        (labels[i] == 1 ? pos : neg).push_back(i);
    Rng rng(seed ^ 0x5eed0511ULL);
    std::shuffle(pos.begin(), pos.end(), rng);
    std::shuffle(neg.begin(), neg.end(), rng);
    auto take = [&](std::vector<int>& group) {
        size_t n_val = static_cast<size_t>(std::floor(val_frac * group.size()));
        if (group.size() >= 4 && n_val == 0) n_val = 1;
        for (size_t i = 0; i < group.size(); ++i)
            (i < n_val ? val_idx : train_idx).push_back(group[i]);
    };
    take(pos);
    take(neg);
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(val_idx.begin(), val_idx.end());
}

double f1_score(const std::vector<int>& pred, const std::vector<int>& truth) {
    int tp = 0, fp = 0, fn = 0;
    for (size_t i = 0; i < pred.size(); ++i) {
        if (pred[i] == 1 && truth[i] == 1) ++tp;
        else if (pred[i] == 1) ++fp;
        else if (truth[i] == 1) ++fn;
    }
    double p = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
    double r = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
    return p + r > 0 ? 2 * p * r / (p + r) : 0.0;
}

namespace {

std::vector<int> argmax_labels(const std::vector<std::array<double, 2>>& logits) {
    std::vector<int> out(logits.size());
    for (size_t i = 0; i < logits.size(); ++i) out[i] = logits[i][1] > logits[i][0] ? 1 : 0;
    return out;
}

TrainOutcome run_training(
    std::vector<Parameter*> params, const std::vector<int>& users, const std::vector<int>& labels,
    const TrainConfig& cfg,
    const std::function<double(const std::vector<int>&, const std::vector<int>&)>& loss_grad,
    const std::function<std::vector<int>(const std::vector<int>&)>& predict) {
    if (std::count(labels.begin(), labels.end(), 1) == 0)
        throw TrainError("training set has no positive (drainer) examples");

    std::vector<int> ti, vi;
    split_train_val(labels, cfg.val_frac, cfg.seed, ti, vi);
    std::vector<int> train_users, train_labels, val_users, val_labels;
    for (int i : ti) {
        train_users.push_back(users[i]);
        train_labels.push_back(labels[i]);
    }
    for (int i : vi) {
        val_users.push_back(users[i]);
        val_labels.push_back(labels[i]);
    }
    if (std::count(train_labels.begin(), train_labels.end(), 1) == 0)
        throw TrainError("training split has no positive examples");
    bool use_val = !val_users.empty() &&
                   std::count(val_labels.begin(), val_labels.end(), 1) > 0;

    nn::AdamConfig adam;
    adam.lr = cfg.lr;

    TrainOutcome out;
    double best = -1.0;
    std::vector<std::vector<double>> best_values;
    int since_best = 0;
    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        loss_grad(train_users, train_labels);
        nn::adam_step(params, adam);
        out.epochs_run = epoch;

        double score = use_val ? f1_score(predict(val_users), val_labels)
                               : f1_score(predict(train_users), train_labels);
        if (score > best + 1e-12) {
            best = score;
            since_best = 0;
            best_values.clear();
            for (Parameter* p : params) best_values.push_back(p->value.data);
        } else if (best > 0.0 && ++since_best >= cfg.patience) {
            // a flat zero score means the model has not started firing yet;
            // the patience window only counts once there is something to lose
            break;
        }
    }
    if (!best_values.empty())
        for (size_t i = 0; i < params.size(); ++i) params[i]->value.data = best_values[i];
    out.best_val_f1 = std::max(best, 0.0);
    out.final_train_f1 = f1_score(predict(train_users), train_labels);
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// TCE

TceModel::TceModel(int hidden, int heads, uint64_t seed)
    : w_nft("tce.w_nft", hidden, features::kEdgeDims),
      w_own("tce.w_own", hidden, features::kEdgeDims + hidden),
      head_w("tce.head_w", 2, hidden),
      head_b("tce.head_b", 2, 1),
      hidden_(hidden),
      heads_(heads) {
    Rng rng(seed);
    nn::glorot_init(w_nft.value, rng);
    nn::glorot_init(w_own.value, rng);
    attn.reserve(heads);
    for (int k = 0; k < heads; ++k) {
        attn.emplace_back("tce.attn" + std::to_string(k), 1, hidden);
        nn::glorot_init(attn.back().value, rng);
    }
    nn::glorot_init(head_w.value, rng);
}

std::vector<Parameter*> TceModel::params() {
    std::vector<Parameter*> out = {&w_nft, &w_own};
    for (auto& a : attn) out.push_back(&a);
    out.push_back(&head_w);
    out.push_back(&head_b);
    return out;
}

std::vector<const Parameter*> TceModel::params() const {
    auto mutable_list = const_cast<TceModel*>(this)->params();
    return {mutable_list.begin(), mutable_list.end()};
}

namespace {

struct NftState {
    std::vector<double> agg;  // mean incident edge features
    std::vector<double> pre;  // before ReLU
    std::vector<double> h;
};

std::vector<NftState> nft_forward(const NftUserGraph& g, const Matrix& w_nft) {
    std::vector<NftState> out(g.nfts.size());
    for (size_t n = 0; n < g.nfts.size(); ++n) {
        const auto& eids = g.nft_edges[n];
        if (eids.empty()) continue;
        std::vector<double> agg(features::kEdgeDims, 0.0);
        for (int eid : eids)
            for (int d = 0; d < features::kEdgeDims; ++d) agg[d] += g.edges[eid].features[d];
        for (double& x : agg) x /= static_cast<double>(eids.size());
        out[n].pre = nn::matvec(w_nft, agg);
        out[n].h = out[n].pre;
        for (double& x : out[n].h) x = nn::relu(x);
        out[n].agg = std::move(agg);
    }
    return out;
}

struct UserForward {
    std::vector<int> eids;
    std::vector<std::vector<double>> h_e;           // per edge, hidden
    std::vector<std::vector<double>> scores;        // per head, per edge (pre-lrelu)
    std::vector<std::vector<double>> alpha;         // per head, per edge
    std::vector<double> rep;                        // hidden
};

UserForward user_forward(const NftUserGraph& g, int u, const std::vector<NftState>& nft,
                         const Matrix& w_own, const std::vector<Parameter>& attn, int hidden) {
    UserForward f;
    f.eids = g.user_edges[u];
    f.rep.assign(hidden, 0.0);
    if (f.eids.empty()) return f;  // isolated user: zero representation
    const int heads = static_cast<int>(attn.size());
    std::vector<double> c(features::kEdgeDims + hidden);
    for (int eid : f.eids) {
        const auto& e = g.edges[eid];
        for (int d = 0; d < features::kEdgeDims; ++d) c[d] = e.features[d];
        const auto& hn = nft[e.nft].h;
        for (int d = 0; d < hidden; ++d) c[features::kEdgeDims + d] = hn[d];
        f.h_e.push_back(nn::matvec(w_own, c));
    }
    f.scores.resize(heads);
    f.alpha.resize(heads);
    for (int k = 0; k < heads; ++k) {
        std::vector<double> z(f.eids.size());
        f.scores[k].resize(f.eids.size());
        for (size_t i = 0; i < f.eids.size(); ++i) {
            double s = 0.0;
            for (int d = 0; d < hidden; ++d) s += attn[k].value.data[d] * f.h_e[i][d];
            f.scores[k][i] = s;
            z[i] = nn::leaky_relu(s, kAttentionSlope);
        }
        f.alpha[k] = nn::softmax(z);
        for (size_t i = 0; i < f.eids.size(); ++i) {
            double a = f.alpha[k][i] / heads;  // head outputs are averaged
            for (int d = 0; d < hidden; ++d) f.rep[d] += a * f.h_e[i][d];
        }
    }
    return f;
}

}  // namespace

std::vector<std::vector<double>> TceModel::embed(const NftUserGraph& g,
                                                 const std::vector<int>& users) const {
    auto nft = nft_forward(g, w_nft.value);
    std::vector<std::vector<double>> out;
    out.reserve(users.size());
    for (int u : users) out.push_back(user_forward(g, u, nft, w_own.value, attn, hidden_).rep);
    return out;
}

std::vector<std::array<double, 2>> TceModel::logits(const NftUserGraph& g,
                                                    const std::vector<int>& users) const {
    auto reps = embed(g, users);
    std::vector<std::array<double, 2>> out(users.size());
    for (size_t i = 0; i < reps.size(); ++i) {
        auto l = nn::matvec(head_w.value, reps[i]);
        out[i] = {l[0] + head_b.value.data[0], l[1] + head_b.value.data[1]};
    }
    return out;
}

double TceModel::loss_and_grad(const NftUserGraph& g, const std::vector<int>& users,
                               const std::vector<int>& labels) {
    for (Parameter* p : params()) p->zero_grad();
    auto nft = nft_forward(g, w_nft.value);

    const int n = static_cast<int>(users.size());
    Matrix logits_m(n, 2);
    std::vector<std::vector<double>> reps(n);
    for (int i = 0; i < n; ++i) {
        reps[i] = user_forward(g, users[i], nft, w_own.value, attn, hidden_).rep;
        auto l = nn::matvec(head_w.value, reps[i]);
        logits_m.at(i, 0) = l[0] + head_b.value.data[0];
        logits_m.at(i, 1) = l[1] + head_b.value.data[1];
    }
    Matrix d_logits(n, 2);
    double loss = nn::cross_entropy(logits_m, labels, &d_logits);

    std::vector<std::vector<double>> d_hn(g.nfts.size());
    for (int i = 0; i < n; ++i) {
        std::vector<double> dl = {d_logits.at(i, 0), d_logits.at(i, 1)};
        std::vector<double> d_rep(hidden_, 0.0);
        nn::matvec_backward(head_w.value, reps[i], dl, head_w.grad, &d_rep);
        head_b.grad.data[0] += dl[0];
        head_b.grad.data[1] += dl[1];

        UserForward f = user_forward(g, users[i], nft, w_own.value, attn, hidden_);
        if (f.eids.empty()) continue;
        const size_t m = f.eids.size();
        std::vector<std::vector<double>> d_he(m, std::vector<double>(hidden_, 0.0));
        for (int k = 0; k < heads_; ++k) {
            std::vector<double> d_alpha(m, 0.0);
            for (size_t e = 0; e < m; ++e) {
                double dot = 0.0;
                for (int d = 0; d < hidden_; ++d) dot += d_rep[d] * f.h_e[e][d];
                d_alpha[e] = dot / heads_;
                double a = f.alpha[k][e] / heads_;
                for (int d = 0; d < hidden_; ++d) d_he[e][d] += a * d_rep[d];
            }
            auto d_z = nn::softmax_backward(f.alpha[k], d_alpha);
            for (size_t e = 0; e < m; ++e) {
                double ds = d_z[e] * nn::leaky_relu_grad(f.scores[k][e], kAttentionSlope);
                if (ds == 0.0) continue;
                for (int d = 0; d < hidden_; ++d) {
                    attn[k].grad.data[d] += ds * f.h_e[e][d];
                    d_he[e][d] += ds * attn[k].value.data[d];
                }
            }
        }
        std::vector<double> c(features::kEdgeDims + hidden_);
        std::vector<double> d_c(features::kEdgeDims + hidden_);
        for (size_t e = 0; e < m; ++e) {
            const auto& edge = g.edges[f.eids[e]];
            for (int d = 0; d < features::kEdgeDims; ++d) c[d] = edge.features[d];
            const auto& hn = nft[edge.nft].h;
            for (int d = 0; d < hidden_; ++d) c[features::kEdgeDims + d] = hn[d];
            std::fill(d_c.begin(), d_c.end(), 0.0);
            nn::matvec_backward(w_own.value, c, d_he[e], w_own.grad, &d_c);
            auto& dn = d_hn[edge.nft];
            if (dn.empty()) dn.assign(hidden_, 0.0);
            for (int d = 0; d < hidden_; ++d) dn[d] += d_c[features::kEdgeDims + d];
        }
    }
    // NFT aggregation backward
    std::vector<double> d_pre(hidden_);
    for (size_t nid = 0; nid < g.nfts.size(); ++nid) {
        if (d_hn[nid].empty()) continue;
        for (int d = 0; d < hidden_; ++d)
            d_pre[d] = d_hn[nid][d] * nn::relu_grad(nft[nid].pre[d]);
        nn::matvec_backward(w_nft.value, nft[nid].agg, d_pre, w_nft.grad, nullptr);
    }
    return loss;
}

TrainOutcome TceModel::train(const NftUserGraph& g, const std::vector<int>& users,
                             const std::vector<int>& labels, const TrainConfig& cfg) {
    return run_training(
        params(), users, labels, cfg,
        [&](const std::vector<int>& us, const std::vector<int>& ls) {
            return loss_and_grad(g, us, ls);
        },
        [&](const std::vector<int>& us) { return argmax_labels(logits(g, us)); });
}

// ---------------------------------------------------------------------------
// SCE

SceModel::SceModel(int hidden, int layers, uint64_t seed)
    : head_w("sce.head_w", 2, hidden), head_b("sce.head_b", 2, 1), hidden_(hidden), layers_(layers) {
    Rng rng(seed);
    for (int l = 0; l < layers; ++l) {
        int in_dim = l == 0 ? features::kUserDims : hidden;
        Layer layer{Parameter("sce.w_self" + std::to_string(l), hidden, in_dim),
                    Parameter("sce.w_sale" + std::to_string(l), hidden, in_dim),
                    Parameter("sce.w_gift" + std::to_string(l), hidden, in_dim)};
        nn::glorot_init(layer.w_self.value, rng);
        nn::glorot_init(layer.w_sale.value, rng);
        nn::glorot_init(layer.w_gift.value, rng);
        layer_params.push_back(std::move(layer));
    }
    nn::glorot_init(head_w.value, rng);
}

std::vector<Parameter*> SceModel::params() {
    std::vector<Parameter*> out;
    for (auto& l : layer_params) {
        out.push_back(&l.w_self);
        out.push_back(&l.w_sale);
        out.push_back(&l.w_gift);
    }
    out.push_back(&head_w);
    out.push_back(&head_b);
    return out;
}

std::vector<const Parameter*> SceModel::params() const {
    auto mutable_list = const_cast<SceModel*>(this)->params();
    return {mutable_list.begin(), mutable_list.end()};
}

std::vector<std::vector<std::vector<double>>> SceModel::propagate(
    const UserGraph& g, const std::vector<std::vector<double>>& scaled_attrs) const {
    const size_t n = g.users.size();
    std::vector<std::vector<std::vector<double>>> h(layers_ + 1);
    h[0] = scaled_attrs;
    for (int l = 0; l < layers_; ++l) {
        const Layer& L = layer_params[l];
        h[l + 1].assign(n, std::vector<double>(hidden_, 0.0));
        for (size_t u = 0; u < n; ++u) {
            auto pre = nn::matvec(L.w_self.value, h[l][u]);
            for (const auto& [adj, w] :
                 {std::pair{&g.adj_sale[u], &L.w_sale}, std::pair{&g.adj_gift[u], &L.w_gift}}) {
                if (adj->empty()) continue;
                std::vector<double> mean(h[l][u].size(), 0.0);
                for (const auto& [v, eid] : *adj)
                    for (size_t d = 0; d < mean.size(); ++d) mean[d] += h[l][v][d];
                for (double& x : mean) x /= static_cast<double>(adj->size());
                auto contrib = nn::matvec(w->value, mean);
                for (int d = 0; d < hidden_; ++d) pre[d] += contrib[d];
            }
            for (int d = 0; d < hidden_; ++d) h[l + 1][u][d] = nn::relu(pre[d]);
        }
    }
    return h;
}

std::vector<std::vector<double>> SceModel::embed(const UserGraph& g,
                                                 const std::vector<std::vector<double>>& scaled_attrs,
                                                 const std::vector<int>& users) const {
    auto h = propagate(g, scaled_attrs);
    std::vector<std::vector<double>> out;
    out.reserve(users.size());
    for (int u : users) out.push_back(h[layers_][u]);
    return out;
}

std::vector<std::array<double, 2>> SceModel::logits(const UserGraph& g,
                                                    const std::vector<std::vector<double>>& scaled_attrs,
                                                    const std::vector<int>& users) const {
    auto reps = embed(g, scaled_attrs, users);
    std::vector<std::array<double, 2>> out(users.size());
    for (size_t i = 0; i < reps.size(); ++i) {
        auto l = nn::matvec(head_w.value, reps[i]);
        out[i] = {l[0] + head_b.value.data[0], l[1] + head_b.value.data[1]};
    }
    return out;
}

double SceModel::loss_and_grad(const UserGraph& g,
                               const std::vector<std::vector<double>>& scaled_attrs,
                               const std::vector<int>& users, const std::vector<int>& labels) {
    for (Parameter* p : params()) p->zero_grad();
    auto h = propagate(g, scaled_attrs);

    const int n = static_cast<int>(users.size());
    Matrix logits_m(n, 2);
    for (int i = 0; i < n; ++i) {
        auto l = nn::matvec(head_w.value, h[layers_][users[i]]);
        logits_m.at(i, 0) = l[0] + head_b.value.data[0];
        logits_m.at(i, 1) = l[1] + head_b.value.data[1];
    }
    Matrix d_logits(n, 2);
    double loss = nn::cross_entropy(logits_m, labels, &d_logits);

    const size_t nn_nodes = g.users.size();
    std::vector<std::vector<double>> dh(nn_nodes, std::vector<double>(hidden_, 0.0));
    for (int i = 0; i < n; ++i) {
        std::vector<double> dl = {d_logits.at(i, 0), d_logits.at(i, 1)};
        nn::matvec_backward(head_w.value, h[layers_][users[i]], dl, head_w.grad, &dh[users[i]]);
        head_b.grad.data[0] += dl[0];
        head_b.grad.data[1] += dl[1];
    }

    for (int l = layers_ - 1; l >= 0; --l) {
        Layer& L = layer_params[l];
        size_t in_dim = h[l][0].size();
        std::vector<std::vector<double>> dh_prev(nn_nodes, std::vector<double>(in_dim, 0.0));
        std::vector<double> d_pre(hidden_);
        for (size_t u = 0; u < nn_nodes; ++u) {
            bool any = false;
            for (int d = 0; d < hidden_; ++d) {
                d_pre[d] = h[l + 1][u][d] > 0 ? dh[u][d] : 0.0;
                any = any || d_pre[d] != 0.0;
            }
            if (!any) continue;
            nn::matvec_backward(L.w_self.value, h[l][u], d_pre, L.w_self.grad, &dh_prev[u]);
            for (const auto& [adj, w] :
                 {std::pair{&g.adj_sale[u], &L.w_sale}, std::pair{&g.adj_gift[u], &L.w_gift}}) {
                if (adj->empty()) continue;
                double inv_c = 1.0 / static_cast<double>(adj->size());
                std::vector<double> mean(in_dim, 0.0);
                for (const auto& [v, eid] : *adj)
                    for (size_t d = 0; d < in_dim; ++d) mean[d] += h[l][v][d];
                for (double& x : mean) x *= inv_c;
                std::vector<double> d_mean(in_dim, 0.0);
                nn::matvec_backward(w->value, mean, d_pre, w->grad, &d_mean);
                for (const auto& [v, eid] : *adj)
                    for (size_t d = 0; d < in_dim; ++d) dh_prev[v][d] += d_mean[d] * inv_c;
            }
        }
        dh = std::move(dh_prev);
    }
    return loss;
}

TrainOutcome SceModel::train(const UserGraph& g, const std::vector<std::vector<double>>& scaled_attrs,
                             const std::vector<int>& users, const std::vector<int>& labels,
                             const TrainConfig& cfg) {
    return run_training(
        params(), users, labels, cfg,
        [&](const std::vector<int>& us, const std::vector<int>& ls) {
            return loss_and_grad(g, scaled_attrs, us, ls);
        },
        [&](const std::vector<int>& us) { return argmax_labels(logits(g, scaled_attrs, us)); });
}

}  // namespace drainwatch::extractors
