#pragma once

#include <map>
#include <unordered_map>
#include <unordered_set>

#include "drainwatch/config.hpp"
#include "drainwatch/measure.hpp"
#include "drainwatch/txdata.hpp"

namespace drainwatch::synth {

using txdata::TransferEvent;

enum class Label { REGULAR, DRAINER, AFFILIATED, VICTIM };

const char* label_name(Label l);
Label label_from_name(const std::string& s);

struct DrainerParams {
    double frac_gift_in_only = 0.751;
    double frac_with_affiliates = 0.825;
    double sell_within_day_frac = 0.80;
    double price_discount_mean = 0.373;
    double price_discount_std = 0.18;
    double frac_below_avg_price = 0.74;
    double ht_percent_decrease_mean = 87.7;
    double frac_hold = 0.08;  // drained NFTs the drainer never moves
};

struct RegularParams {
    // per-user transaction quota: lognormal
    double tx_count_log_mean = 1.4;
    double tx_count_log_sigma = 1.1;
    // per-hop holding time (days): lognormal
    double holding_log_mean = 2.5;
    double holding_log_sigma = 0.9;
};

struct SynthConfig {
    uint64_t seed = 1;
    int n_regular = 2000;
    int n_drainers = 50;
    int n_mimics = -1;  // -1: defaults to n_drainers
    int n_collections = 40;
    int64_t start_ts = 1'600'000'000;
    int64_t end_ts = 1'600'000'000 + 360 * 86400;
    DrainerParams drainer;
    RegularParams regular;
    int max_victims_per_drainer = 3;
    int max_nfts_per_victim = 30;
    double marketplace_frac = 0.3;

    static SynthConfig from_kv(const KvConfig& kv);
    void validate() const;
};

struct SynthResult {
    std::vector<TransferEvent> events;
    std::unordered_map<std::string, Label> labels;
    // ground truth the analytics should recover
    std::unordered_set<std::string> affiliated;
    std::map<measure::DrainFate, measure::FateRow> fates;
    int drainers_gift_in_only = 0;
    std::unordered_set<std::string> marketplace_accounts;
};

SynthResult generate_ecosystem(const SynthConfig& config);

void write_labels_csv(const std::string& path, const std::unordered_map<std::string, Label>& labels);
std::unordered_map<std::string, Label> read_labels_csv(const std::string& path);

}  // namespace drainwatch::synth
