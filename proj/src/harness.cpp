#include "drainwatch/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "drainwatch/evasion.hpp"
#include "drainwatch/features.hpp"
#include "drainwatch/measure.hpp"
#include "drainwatch/nn.hpp"

namespace fs = std::filesystem;

namespace drainwatch::harness {

using extractors::SceModel;
using extractors::TceModel;
using extractors::TrainConfig;
using features::Scaler;
using features::UserVector;
using graphs::NftUserGraph;
using graphs::UserGraph;
using txdata::TxKind;

AccountSet fn_filter_accounts(const std::vector<TransactionRecord>& records,
                              const AccountSet& drainers) {
    auto affiliated = measure::find_affiliated_users(records, drainers);
    AccountSet out = affiliated;
    for (const auto& r : records)
        if (r.kind == TxKind::GIFT && affiliated.count(r.to) && !drainers.count(r.from))
            out.insert(r.from);
    return out;
}

LabeledAccounts build_training_dataset(const std::vector<TransactionRecord>& records,
                                       const AccountSet& drainers, const DatasetSpec& spec) {
    auto activity = measure::user_activity(records);
    auto excluded = fn_filter_accounts(records, drainers);

    std::vector<std::string> names;
    names.reserve(activity.size());
    for (const auto& [name, a] : activity) names.push_back(name);
    std::sort(names.begin(), names.end());

    std::vector<std::string> drainer_list, light, heavy;
    for (const auto& name : names) {
        if (drainers.count(name)) {
            drainer_list.push_back(name);
            continue;
        }
        if (excluded.count(name)) continue;
        const auto& a = activity.at(name);
        if (a.n_buy + a.n_gift_in == 0) continue;  // never received an NFT from another user
        if (a.last_ts == a.first_ts) continue;     // zero active timespan
        (a.n_records > spec.heavy_tx_threshold ? heavy : light).push_back(name);
    }
    if (drainer_list.empty()) throw DataError("no drainer accounts present in the records");

    auto n_drainers = static_cast<long long>(drainer_list.size());
    long long base_n = std::llround(spec.base_ratio * static_cast<double>(n_drainers));
    long long heavy_n = std::llround(spec.heavy_ratio * static_cast<double>(n_drainers));
    if (static_cast<long long>(light.size()) < base_n)
        throw DataError("PoolTooSmall: " + std::to_string(light.size()) + " regular accounts, " +
                        std::to_string(base_n) + " requested");
    if (static_cast<long long>(heavy.size()) < heavy_n)
        throw DataError("PoolTooSmall: " + std::to_string(heavy.size()) + " heavy accounts, " +
                        std::to_string(heavy_n) + " requested");

    Rng rng(spec.seed);
    std::shuffle(light.begin(), light.end(), rng);
    std::shuffle(heavy.begin(), heavy.end(), rng);

    LabeledAccounts out;
    for (const auto& d : drainer_list) {
        out.accounts.push_back(d);
        out.labels.push_back(1);
    }
    for (long long i = 0; i < base_n; ++i) {
        out.accounts.push_back(light[i]);
        out.labels.push_back(0);
    }
    for (long long i = 0; i < heavy_n; ++i) {
        out.accounts.push_back(heavy[i]);
        out.labels.push_back(0);
    }
    return out;
}

EvalDataset build_eval_dataset(const std::vector<TransactionRecord>& records,
                               const UserGraph& user_graph, const AccountSet& drainers,
                               const DatasetSpec& spec) {
    AccountSet active;
    for (const auto& r : records) {
        if (r.timestamp < spec.window_start || r.timestamp >= spec.window_end) continue;
        if (r.from != kNullAccount) active.insert(r.from);
        if (r.to != kNullAccount) active.insert(r.to);
    }
    auto excluded = fn_filter_accounts(records, drainers);

    std::vector<std::string> names(active.begin(), active.end());
    std::sort(names.begin(), names.end());
    std::vector<std::string> drainer_list, pool;
    for (const auto& name : names) {
        if (drainers.count(name))
            drainer_list.push_back(name);
        else if (!excluded.count(name))
            pool.push_back(name);
    }
    if (drainer_list.empty()) throw DataError("no drainer accounts active in the eval window");

    long long n_reg =
        std::llround(spec.eval_ratio * static_cast<double>(drainer_list.size()));
    if (static_cast<long long>(pool.size()) < n_reg)
        throw DataError("PoolTooSmall: " + std::to_string(pool.size()) +
                        " eval-window regulars, " + std::to_string(n_reg) + " requested");
    Rng rng(spec.seed);
    std::shuffle(pool.begin(), pool.end(), rng);

    EvalDataset out;
    for (const auto& d : drainer_list) {
        out.centrals.accounts.push_back(d);
        out.centrals.labels.push_back(1);
    }
    for (long long i = 0; i < n_reg; ++i) {
        out.centrals.accounts.push_back(pool[i]);
        out.centrals.labels.push_back(0);
    }
    out.subgraph = graphs::select_evaluation_subgraph(user_graph, out.centrals.accounts, 2);
    return out;
}

MetricsReport compute_metrics(const std::vector<int>& predictions, const std::vector<int>& labels,
                              uint64_t seed) {
    if (predictions.size() != labels.size())
        throw DataError("LengthMismatch: " + std::to_string(predictions.size()) +
                        " predictions vs " + std::to_string(labels.size()) + " labels");
    MetricsReport m;
    m.seed = seed;
    for (size_t i = 0; i < labels.size(); ++i) {
        if (predictions[i] == 1)
            (labels[i] == 1 ? m.tp : m.fp) += 1;
        else
            (labels[i] == 1 ? m.fn : m.tn) += 1;
    }
    if (m.tp + m.fp > 0) m.precision = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp);
    if (m.tp + m.fn > 0) m.recall = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
    if (m.precision + m.recall > 0)
        m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    return m;
}

MeanMetrics mean_of(const std::vector<MetricsReport>& runs) {
    MeanMetrics m;
    if (runs.empty()) return m;
    for (const auto& r : runs) {
        m.precision += r.precision;
        m.recall += r.recall;
        m.f1 += r.f1;
        m.fp += static_cast<double>(r.fp);
        m.tp += static_cast<double>(r.tp);
    }
    auto n = static_cast<double>(runs.size());
    m.precision /= n;
    m.recall /= n;
    m.f1 /= n;
    m.fp /= n;
    m.tp /= n;
    return m;
}

PipelineConfig PipelineConfig::from_kv(const KvConfig& kv) {
    PipelineConfig c;
    c.synth = synth::SynthConfig::from_kv(kv);
    c.input_events = kv.get("input_events", "");
    c.input_labels = kv.get("input_labels", "");
    c.input_marketplaces = kv.get("input_marketplaces", "");
    c.train_window_frac = kv.get_double("train_window_frac", c.train_window_frac);
    c.base_ratio = kv.get_double("base_ratio", c.base_ratio);
    c.heavy_ratio = kv.get_double("heavy_ratio", c.heavy_ratio);
    c.heavy_tx_threshold = static_cast<int>(kv.get_int("heavy_tx_threshold", c.heavy_tx_threshold));
    c.eval_ratio = kv.get_double("eval_ratio", c.eval_ratio);
    c.n_eval_seeds = static_cast<int>(kv.get_int("n_eval_seeds", c.n_eval_seeds));
    c.hidden = static_cast<int>(kv.get_int("hidden", c.hidden));
    c.heads = static_cast<int>(kv.get_int("heads", c.heads));
    c.sce_layers = static_cast<int>(kv.get_int("sce_layers", c.sce_layers));
    c.tce_lr = kv.get_double("tce_lr", c.tce_lr);
    c.sce_lr = kv.get_double("sce_lr", c.sce_lr);
    c.max_epochs = static_cast<int>(kv.get_int("max_epochs", c.max_epochs));
    c.patience = static_cast<int>(kv.get_int("patience", c.patience));
    c.max_degree = static_cast<int>(kv.get_int("max_degree", c.max_degree));
    c.svm.C = kv.get_double("svm_c", c.svm.C);
    c.svm.gamma = kv.get_double("svm_gamma", c.svm.gamma);
    c.svm.tol = kv.get_double("svm_tol", c.svm.tol);
    c.svm.seed = c.synth.seed;
    c.run_user_only_ablation = kv.get_bool("ablation", c.run_user_only_ablation);
    c.attack = static_cast<int>(kv.get_int("attack", c.attack));
    c.attack_level = kv.get_double("attack_level", c.attack_level);
    c.attack_pay_pct = kv.get_double("attack_pay_pct", c.attack_pay_pct);
    c.defend = kv.get_bool("defend", c.defend);
    c.defend_fraction = kv.get_double("defend_fraction", c.defend_fraction);
    c.write_artifacts = kv.get_bool("write_artifacts", c.write_artifacts);
    return c;
}

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::vector<double> to_vec(const UserVector& a) { return {a.begin(), a.end()}; }

std::vector<TransactionRecord> restrict_records(const std::vector<TransactionRecord>& records,
                                                const AccountSet& included) {
    std::vector<TransactionRecord> out;
    for (const auto& r : records) {
        bool from_ok = r.from == kNullAccount || included.count(r.from) > 0;
        bool to_ok = r.to == kNullAccount || included.count(r.to) > 0;
        if (from_ok && to_ok) out.push_back(r);
    }
    return out;
}

// Graphs restricted to one account neighborhood, with scaled features.
struct GraphBundle {
    NftUserGraph nft;
    UserGraph user;
    std::vector<std::vector<double>> scaled_attrs;  // aligned with user.users
};

GraphBundle build_bundle(const std::vector<TransactionRecord>& records,
                         const std::vector<measure::OwnershipEpisode>& eps,
                         const std::unordered_map<std::string, UserVector>& attrs,
                         const AccountSet* included, const Scaler& user_scaler,
                         const Scaler& edge_scaler, int max_degree, uint64_t cap_seed) {
    GraphBundle b;

    std::unordered_map<std::string, UserVector> attrs_used;
    const std::unordered_map<std::string, UserVector>* attrs_ptr = &attrs;
    if (included) {
        for (const auto& [name, v] : attrs)
            if (included->count(name)) attrs_used.emplace(name, v);
        attrs_ptr = &attrs_used;
    }
    auto ug_records = included ? restrict_records(records, *included) : records;
    b.user = graphs::build_user_graph(ug_records, *attrs_ptr);
    b.scaled_attrs.reserve(b.user.users.size());
    for (const auto& a : b.user.attrs) b.scaled_attrs.push_back(user_scaler.apply(to_vec(a)));

    std::vector<measure::OwnershipEpisode> eps_used;
    for (const auto& ep : eps)
        if (!included || included->count(ep.owner)) eps_used.push_back(ep);
    auto nft = graphs::build_nft_user_graph(eps_used, records);
    nft = graphs::cap_neighbors(nft, max_degree, cap_seed);
    for (auto& e : nft.edges) {
        auto scaled = edge_scaler.apply({e.features.begin(), e.features.end()});
        std::copy(scaled.begin(), scaled.end(), e.features.begin());
    }
    b.nft = std::move(nft);
    return b;
}

std::vector<std::vector<double>> embed_accounts_tce(const TceModel& m, const NftUserGraph& g,
                                                    const std::vector<std::string>& accounts) {
    std::vector<int> ids;
    std::vector<size_t> pos;
    for (size_t i = 0; i < accounts.size(); ++i) {
        auto it = g.user_index.find(accounts[i]);
        if (it == g.user_index.end()) continue;
        ids.push_back(it->second);
        pos.push_back(i);
    }
    auto embs = m.embed(g, ids);
    std::vector<std::vector<double>> out(accounts.size(),
                                         std::vector<double>(m.hidden(), 0.0));
    for (size_t k = 0; k < pos.size(); ++k) out[pos[k]] = std::move(embs[k]);
    return out;
}

std::vector<std::vector<double>> embed_accounts_sce(const SceModel& m, const GraphBundle& b,
                                                    const std::vector<std::string>& accounts) {
    std::vector<int> ids;
    std::vector<size_t> pos;
    for (size_t i = 0; i < accounts.size(); ++i) {
        auto it = b.user.user_index.find(accounts[i]);
        if (it == b.user.user_index.end()) continue;
        ids.push_back(it->second);
        pos.push_back(i);
    }
    auto embs = m.embed(b.user, b.scaled_attrs, ids);
    std::vector<std::vector<double>> out(accounts.size(),
                                         std::vector<double>(m.hidden(), 0.0));
    for (size_t k = 0; k < pos.size(); ++k) out[pos[k]] = std::move(embs[k]);
    return out;
}

std::vector<std::vector<double>> fuse_rows(const std::vector<std::vector<double>>& tce_emb,
                                           const std::vector<std::vector<double>>& sce_emb,
                                           const std::vector<std::vector<double>>& user_rows,
                                           const model::AblationMask& mask) {
    std::vector<std::vector<double>> out;
    out.reserve(user_rows.size());
    for (size_t i = 0; i < user_rows.size(); ++i)
        out.push_back(model::fuse(&tce_emb[i], &sce_emb[i], &user_rows[i], mask));
    // Rescale so the RBF gamma acts on the same per-dimension distance scale
    // for every ablation mask; otherwise wider fused vectors push all kernel
    // values toward zero.
    if (!out.empty() && out.front().size() > features::kUserDims) {
        double factor = std::sqrt(static_cast<double>(features::kUserDims) /
                                  static_cast<double>(out.front().size()));
        for (auto& row : out)
            for (double& v : row) v *= factor;
    }
    return out;
}

std::vector<int> predicted_labels(const model::SvmModel& svm,
                                  const std::vector<std::vector<double>>& rows) {
    auto preds = model::svm_predict(svm, rows);
    std::vector<int> out(preds.size());
    for (size_t i = 0; i < preds.size(); ++i) out[i] = preds[i].label;
    return out;
}

std::vector<std::vector<double>> scaled_user_rows(
    const std::unordered_map<std::string, UserVector>& attrs, const Scaler& scaler,
    const std::vector<std::string>& accounts) {
    std::vector<std::vector<double>> out;
    out.reserve(accounts.size());
    for (const auto& acc : accounts) {
        auto it = attrs.find(acc);
        out.push_back(scaler.apply(it != attrs.end() ? to_vec(it->second)
                                                     : std::vector<double>(features::kUserDims, 0.0)));
    }
    return out;
}

struct FeatureSide {
    std::unordered_map<std::string, UserVector> attrs;
    std::vector<measure::OwnershipEpisode> eps;
    UserGraph full_user_graph;  // for subgraph selection
};

FeatureSide make_side(const std::vector<TransactionRecord>& records, int64_t collection_end) {
    FeatureSide s;
    s.attrs = features::all_user_attributes(records);
    s.eps = measure::episodes(records, collection_end);
    s.full_user_graph = graphs::build_user_graph(records, s.attrs);
    return s;
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& cfg, const std::string& out_dir) {
    fs::create_directories(out_dir);
    PipelineResult res;

    // data: synthesize or ingest
    std::vector<TransactionRecord> records;
    AccountSet drainers;
    {
        std::vector<txdata::TransferEvent> events;
        std::unordered_map<std::string, synth::Label> labels;
        AccountSet marketplaces;
        if (!cfg.input_events.empty()) {
            if (cfg.input_labels.empty())
                throw UsageError("input_events requires input_labels");
            events = txdata::parse_transfer_events_file(cfg.input_events).events;
            labels = synth::read_labels_csv(cfg.input_labels);
            if (!cfg.input_marketplaces.empty())
                marketplaces = txdata::read_account_list(cfg.input_marketplaces);
        } else {
            auto sr = synth::generate_ecosystem(cfg.synth);
            events = std::move(sr.events);
            labels = std::move(sr.labels);
            marketplaces = std::move(sr.marketplace_accounts);
        }
        records = txdata::classify_all(events, marketplaces);
        for (const auto& [name, l] : labels)
            if (l == synth::Label::DRAINER) drainers.insert(name);
    }
    if (records.empty()) throw DataError("no transaction records");

    // time split
    int64_t t0 = records.front().timestamp, t1 = records.front().timestamp;
    for (const auto& r : records) {
        t0 = std::min(t0, r.timestamp);
        t1 = std::max(t1, r.timestamp);
    }
    auto t_split =
        t0 + static_cast<int64_t>(static_cast<double>(t1 - t0) * cfg.train_window_frac);
    std::vector<TransactionRecord> train_records;
    for (const auto& r : records)
        if (r.timestamp < t_split) train_records.push_back(r);
    if (train_records.empty()) throw DataError("empty training window");

    // training dataset
    DatasetSpec tspec;
    tspec.role = DatasetRole::TRAIN;
    tspec.base_ratio = cfg.base_ratio;
    tspec.heavy_ratio = cfg.heavy_ratio;
    tspec.heavy_tx_threshold = cfg.heavy_tx_threshold;
    tspec.seed = cfg.synth.seed;
    auto train_set = build_training_dataset(train_records, drainers, tspec);
    for (int l : train_set.labels) (l == 1 ? res.n_train_drainers : res.n_train_regulars)++;

    // feature scalers fit on the training window only
    auto train_side = make_side(train_records, t_split);
    Scaler user_scaler, edge_scaler;
    {
        std::vector<std::vector<double>> rows;
        for (const auto& acc : train_set.accounts) {
            auto it = train_side.attrs.find(acc);
            if (it != train_side.attrs.end()) rows.push_back(to_vec(it->second));
        }
        user_scaler = features::fit_scaler(rows, features::user_log_dims());
        auto stats = features::nft_stats(train_side.eps, train_records);
        std::vector<std::vector<double>> erows;
        for (const auto& ep : train_side.eps) {
            auto v = features::ownership_edge_features(ep, stats.at(ep.token));
            erows.emplace_back(v.begin(), v.end());
        }
        edge_scaler = features::fit_scaler(erows, features::edge_log_dims());
    }

    // training subgraph + extractor training
    auto train_sel = graphs::select_evaluation_subgraph(train_side.full_user_graph,
                                                        train_set.accounts, 2);
    auto train_bundle =
        build_bundle(train_records, train_side.eps, train_side.attrs, &train_sel.included_users,
                     user_scaler, edge_scaler, cfg.max_degree, cfg.synth.seed);

    TceModel tce(cfg.hidden, cfg.heads, cfg.synth.seed);
    SceModel sce(cfg.hidden, cfg.sce_layers, cfg.synth.seed + 1);
    {
        TrainConfig tc;
        tc.lr = cfg.tce_lr;
        tc.max_epochs = cfg.max_epochs;
        tc.patience = cfg.patience;
        tc.seed = cfg.synth.seed;
        std::vector<int> users, labels;
        for (size_t i = 0; i < train_set.accounts.size(); ++i) {
            auto it = train_bundle.nft.user_index.find(train_set.accounts[i]);
            if (it == train_bundle.nft.user_index.end()) continue;
            users.push_back(it->second);
            labels.push_back(train_set.labels[i]);
        }
        res.tce_outcome = tce.train(train_bundle.nft, users, labels, tc);

        tc.lr = cfg.sce_lr;
        std::vector<int> users2, labels2;
        for (size_t i = 0; i < train_set.accounts.size(); ++i) {
            auto it = train_bundle.user.user_index.find(train_set.accounts[i]);
            if (it == train_bundle.user.user_index.end()) continue;
            users2.push_back(it->second);
            labels2.push_back(train_set.labels[i]);
        }
        res.sce_outcome = sce.train(train_bundle.user, train_bundle.scaled_attrs, users2,
                                    labels2, tc);
    }

    // fused training rows and SVM heads
    const model::AblationMask full_mask;
    const model::AblationMask user_mask{false, false, true};
    auto train_tce = embed_accounts_tce(tce, train_bundle.nft, train_set.accounts);
    auto train_sce = embed_accounts_sce(sce, train_bundle, train_set.accounts);
    auto train_user = scaled_user_rows(train_side.attrs, user_scaler, train_set.accounts);
    auto x_full = fuse_rows(train_tce, train_sce, train_user, full_mask);
    auto svm_full = model::svm_train(x_full, train_set.labels, cfg.svm);
    res.svm_train_full =
        compute_metrics(predicted_labels(svm_full, x_full), train_set.labels, cfg.synth.seed);
    model::SvmModel svm_user;
    if (cfg.run_user_only_ablation) {
        auto x_user = fuse_rows(train_tce, train_sce, train_user, user_mask);
        svm_user = model::svm_train(x_user, train_set.labels, cfg.svm);
        res.svm_train_user = compute_metrics(predicted_labels(svm_user, x_user),
                                             train_set.labels, cfg.synth.seed);
    }

    // evaluation on the held-out window, clean records
    auto full_side = make_side(records, t1);
    auto eval_one = [&](const std::vector<TransactionRecord>& eval_records,
                        const FeatureSide& side, const LabeledAccounts& centrals,
                        const AccountSet& included, uint64_t seed, const model::SvmModel& svm,
                        const model::AblationMask& mask,
                        std::vector<std::vector<double>>* rows_out) {
        auto bundle = build_bundle(eval_records, side.eps, side.attrs, &included, user_scaler,
                                   edge_scaler, cfg.max_degree, seed);
        auto e_tce = embed_accounts_tce(tce, bundle.nft, centrals.accounts);
        auto e_sce = embed_accounts_sce(sce, bundle, centrals.accounts);
        auto e_user = scaled_user_rows(side.attrs, user_scaler, centrals.accounts);
        auto rows = fuse_rows(e_tce, e_sce, e_user, mask);
        auto metrics = compute_metrics(predicted_labels(svm, rows), centrals.labels, seed);
        if (rows_out) *rows_out = std::move(rows);
        return metrics;
    };

    DatasetSpec espec;
    espec.role = DatasetRole::EVAL;
    espec.eval_ratio = cfg.eval_ratio;
    espec.window_start = t_split;
    espec.window_end = t1 + 1;

    for (int s = 0; s < cfg.n_eval_seeds; ++s) {
        espec.seed = cfg.synth.seed + static_cast<uint64_t>(s);
        auto ed = build_eval_dataset(records, full_side.full_user_graph, drainers, espec);
        res.full_runs.push_back(eval_one(records, full_side, ed.centrals,
                                         ed.subgraph.included_users, espec.seed, svm_full,
                                         full_mask, nullptr));
        if (cfg.run_user_only_ablation)
            res.ablation_runs.push_back(eval_one(records, full_side, ed.centrals,
                                                 ed.subgraph.included_users, espec.seed,
                                                 svm_user, user_mask, nullptr));
    }

    // evasion branch
    if (cfg.attack != 0) {
        auto spec = evasion::attack_from_number(cfg.attack, cfg.attack_level, cfg.attack_pay_pct,
                                                cfg.synth.seed);
        auto ar = evasion::apply_attack(records, drainers, spec);
        evasion::write_audit_csv((fs::path(out_dir) / "attack_audit.csv").string(), ar.audit);
        auto atk_side = make_side(ar.records, t1);

        model::SvmModel svm_def;
        AccountSet heldout_attackers;
        if (cfg.defend) {
            std::vector<std::string> attacked;
            for (const auto& d : drainers) attacked.push_back(d);
            std::vector<std::string> retrain, heldout;
            evasion::split_defense_sample(attacked, cfg.defend_fraction, cfg.synth.seed, retrain,
                                          heldout);
            heldout_attackers.insert(heldout.begin(), heldout.end());

            auto sel = graphs::select_evaluation_subgraph(atk_side.full_user_graph, retrain, 2);
            auto bundle = build_bundle(ar.records, atk_side.eps, atk_side.attrs,
                                       &sel.included_users, user_scaler, edge_scaler,
                                       cfg.max_degree, cfg.synth.seed);
            auto r_tce = embed_accounts_tce(tce, bundle.nft, retrain);
            auto r_sce = embed_accounts_sce(sce, bundle, retrain);
            auto r_user = scaled_user_rows(atk_side.attrs, user_scaler, retrain);
            auto rows = fuse_rows(r_tce, r_sce, r_user, full_mask);
            auto x = x_full;
            auto y = train_set.labels;
            for (auto& row : rows) {
                x.push_back(std::move(row));
                y.push_back(1);
            }
            svm_def = model::svm_train(x, y, cfg.svm);
            if (cfg.write_artifacts) {
                std::ofstream xf(fs::path(out_dir) / "retrain_features.csv");
                for (size_t i = 0; i < retrain.size(); ++i) {
                    xf << retrain[i] << ",1";
                    for (double v : x[x_full.size() + i]) xf << "," << fmt(v);
                    xf << "\n";
                }
            }
        }

        for (int s = 0; s < cfg.n_eval_seeds; ++s) {
            espec.seed = cfg.synth.seed + static_cast<uint64_t>(s);
            auto ed = build_eval_dataset(ar.records, atk_side.full_user_graph, drainers, espec);
            std::vector<std::vector<double>> rows;
            res.attacked_runs.push_back(eval_one(ar.records, atk_side, ed.centrals,
                                                 ed.subgraph.included_users, espec.seed,
                                                 svm_full, full_mask, &rows));
            if (cfg.write_artifacts && s == 0) {
                std::ofstream xf(fs::path(out_dir) / "attacked_features.csv");
                for (size_t i = 0; i < rows.size(); ++i) {
                    xf << ed.centrals.accounts[i] << "," << ed.centrals.labels[i];
                    for (double v : rows[i]) xf << "," << fmt(v);
                    xf << "\n";
                }
            }
            if (cfg.defend) {
                // defended metrics over held-out attackers + the same regulars
                std::vector<std::vector<double>> sub_rows;
                std::vector<int> sub_labels;
                for (size_t i = 0; i < ed.centrals.accounts.size(); ++i) {
                    if (ed.centrals.labels[i] == 1 &&
                        !heldout_attackers.count(ed.centrals.accounts[i]))
                        continue;  // attacker seen during retraining
                    sub_rows.push_back(rows[i]);
                    sub_labels.push_back(ed.centrals.labels[i]);
                }
                res.defended_runs.push_back(compute_metrics(
                    predicted_labels(svm_def, sub_rows), sub_labels, espec.seed));
            }
        }
        if (cfg.write_artifacts && cfg.defend)
            model::save_svm((fs::path(out_dir) / "svm_defended.bin").string(), svm_def);
    }

    // reports
    res.report_csv = (fs::path(out_dir) / "report.csv").string();
    res.summary_txt = (fs::path(out_dir) / "summary.txt").string();
    {
        std::ofstream csv(res.report_csv);
        csv << "dataset,seed,precision,recall,f1,tp,fp,fn,tn\n";
        auto dump = [&](const char* name, const std::vector<MetricsReport>& runs) {
            for (const auto& m : runs)
                csv << name << "," << m.seed << "," << fmt(m.precision) << "," << fmt(m.recall)
                    << "," << fmt(m.f1) << "," << m.tp << "," << m.fp << "," << m.fn << ","
                    << m.tn << "\n";
        };
        dump("full", res.full_runs);
        dump("user_only", res.ablation_runs);
        dump("attacked", res.attacked_runs);
        dump("defended", res.defended_runs);

        std::ofstream sum(res.summary_txt);
        sum << "training accounts: " << res.n_train_drainers << " drainers, "
            << res.n_train_regulars << " regulars\n";
        sum << "tce val_f1 " << fmt(res.tce_outcome.best_val_f1) << " epochs "
            << res.tce_outcome.epochs_run << "\n";
        sum << "sce val_f1 " << fmt(res.sce_outcome.best_val_f1) << " epochs "
            << res.sce_outcome.epochs_run << "\n";
        sum << "svm train f1: full " << fmt(res.svm_train_full.f1) << " user_only "
            << fmt(res.svm_train_user.f1) << "\n";
        auto line = [&](const char* name, const std::vector<MetricsReport>& runs) {
            if (runs.empty()) return;
            auto m = mean_of(runs);
            sum << name << ": precision " << fmt(m.precision) << " recall " << fmt(m.recall)
                << " f1 " << fmt(m.f1) << " fp " << fmt(m.fp) << " tp " << fmt(m.tp) << " ("
                << runs.size() << " seeds)\n";
        };
        line("full", res.full_runs);
        line("user_only", res.ablation_runs);
        line("attacked", res.attacked_runs);
        line("defended", res.defended_runs);
    }

    if (cfg.write_artifacts) {
        std::vector<const nn::Parameter*> tps;
        for (auto* p : const_cast<const TceModel&>(tce).params()) tps.push_back(p);
        nn::save_checkpoint((fs::path(out_dir) / "tce.ckpt").string(), tps);
        std::vector<const nn::Parameter*> sps;
        for (auto* p : const_cast<const SceModel&>(sce).params()) sps.push_back(p);
        nn::save_checkpoint((fs::path(out_dir) / "sce.ckpt").string(), sps);
        model::save_svm((fs::path(out_dir) / "svm_full.bin").string(), svm_full);
        std::ofstream xf(fs::path(out_dir) / "training_features.csv");
        for (size_t i = 0; i < x_full.size(); ++i) {
            xf << train_set.accounts[i] << "," << train_set.labels[i];
            for (double v : x_full[i]) xf << "," << fmt(v);
            xf << "\n";
        }
        if (cfg.run_user_only_ablation)
            model::save_svm((fs::path(out_dir) / "svm_user_only.bin").string(), svm_user);
        txdata::write_records_file((fs::path(out_dir) / "records.jsonl").string(), records);
    }
    return res;
}

}  // namespace drainwatch::harness
