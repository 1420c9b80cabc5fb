#pragma once

#include <unordered_set>

#include "drainwatch/config.hpp"
#include "drainwatch/extractors.hpp"
#include "drainwatch/graphs.hpp"
#include "drainwatch/model.hpp"
#include "drainwatch/synth.hpp"

namespace drainwatch::harness {

using txdata::TransactionRecord;
using AccountSet = std::unordered_set<std::string>;

enum class DatasetRole { TRAIN, EVAL };

struct DatasetSpec {
    DatasetRole role = DatasetRole::TRAIN;
    double base_ratio = 70.0;   // sampled regulars per drainer
    double heavy_ratio = 10.0;  // heavy users per drainer
    int heavy_tx_threshold = 50;
    double eval_ratio = 100.0;  // regulars per drainer in the eval set
    uint64_t seed = 0;
    int64_t window_start = 0;
    int64_t window_end = 0;
};

struct LabeledAccounts {
    std::vector<std::string> accounts;
    std::vector<int> labels;  // 1 = drainer
};

// Affiliated users plus accounts that gift NFTs to affiliated users; these
// are dropped from regular pools as potential unlabeled drainers.
AccountSet fn_filter_accounts(const std::vector<TransactionRecord>& records,
                              const AccountSet& drainers);

// Drainers + seeded regular sample. The regular pool excludes FN-filtered
// accounts, accounts that never received an NFT from another user, and
// accounts with zero active timespan; heavy users (> threshold records) are
// sampled separately at their own ratio.
LabeledAccounts build_training_dataset(const std::vector<TransactionRecord>& records,
                                       const AccountSet& drainers, const DatasetSpec& spec);

struct EvalDataset {
    LabeledAccounts centrals;
    graphs::SubgraphSelection subgraph;
};

// Eval-window drainers + ratio x regulars active in the window, plus their
// 2-hop enrichment neighborhood.
EvalDataset build_eval_dataset(const std::vector<TransactionRecord>& records,
                               const graphs::UserGraph& user_graph, const AccountSet& drainers,
                               const DatasetSpec& spec);

struct MetricsReport {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    long long tp = 0, fp = 0, fn = 0, tn = 0;
    uint64_t seed = 0;
};

// Standard confusion-matrix metrics, drainer = positive class. P (resp. R) is
// 0 when its denominator is 0; F1 = 2PR/(P+R) or 0.
MetricsReport compute_metrics(const std::vector<int>& predictions, const std::vector<int>& labels,
                              uint64_t seed = 0);

struct MeanMetrics {
    double precision = 0.0, recall = 0.0, f1 = 0.0, fp = 0.0, tp = 0.0;
};

MeanMetrics mean_of(const std::vector<MetricsReport>& runs);

struct PipelineConfig {
    synth::SynthConfig synth;
    std::string input_events;        // JSONL ingest instead of synthesis
    std::string input_labels;        // labels CSV, required with input_events
    std::string input_marketplaces;  // optional account-list file
    double train_window_frac = 7.0 / 12.0;
    double base_ratio = 15.0;
    double heavy_ratio = 1.0;
    int heavy_tx_threshold = 50;
    double eval_ratio = 100.0;
    int n_eval_seeds = 5;
    int hidden = 64;
    int heads = 8;
    int sce_layers = 2;
    double tce_lr = 6e-4;
    double sce_lr = 2e-3;
    int max_epochs = 200;
    int patience = 10;
    int max_degree = 64;
    model::SvmConfig svm;
    bool run_user_only_ablation = true;
    int attack = 0;  // 0 = none, 1..4 per the attack catalogue
    double attack_level = 50.0;
    double attack_pay_pct = 60.0;
    bool defend = false;
    double defend_fraction = 0.03;
    bool write_artifacts = false;

    static PipelineConfig from_kv(const KvConfig& kv);
};

struct PipelineResult {
    std::vector<MetricsReport> full_runs;
    std::vector<MetricsReport> ablation_runs;
    std::vector<MetricsReport> attacked_runs;
    std::vector<MetricsReport> defended_runs;
    extractors::TrainOutcome tce_outcome;
    extractors::TrainOutcome sce_outcome;
    MetricsReport svm_train_full;  // resubstitution check on the training set
    MetricsReport svm_train_user;
    int n_train_drainers = 0;
    int n_train_regulars = 0;
    std::string report_csv;
    std::string summary_txt;
};

// End-to-end run: synthesize/ingest, classify, time-split, train extractors
// on the training subgraph, fit the SVM on fused embeddings, evaluate over
// n_eval_seeds eval datasets (optionally attack + defend), write reports
// under out_dir. Deterministic for a fixed config.
PipelineResult run_pipeline(const PipelineConfig& cfg, const std::string& out_dir);

}  // namespace drainwatch::harness
