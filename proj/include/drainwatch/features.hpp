#pragma once

#include <array>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "drainwatch/measure.hpp"

namespace drainwatch::features {

using measure::OwnershipEpisode;
using measure::UserActivity;
using txdata::TransactionRecord;
using txdata::TxKind;

// Fixed 11-dim layout of one ownership episode:
//   [0] holding_time_days
//   [1..3] in-type one-hot (mint, buy, gift_in)
//   [4..6] out-type one-hot (sell, gift_out, hold)
//   [7] in_price_eth   (0 for mint / gift-in)
//   [8] out_price_eth  (-1 when held, 0 for gift-out)
//   [9] nft_avg_holding_time_days
//   [10] nft_avg_sale_price_eth
constexpr int kEdgeDims = 11;
using EdgeVector = std::array<double, kEdgeDims>;

extern const std::array<const char*, kEdgeDims> kEdgeDimNames;

struct NftStats {
    double avg_holding_days = 0.0;
    double avg_sale_price = 0.0;
};

// Per-token averages over the NFT's entire lifespan.
std::unordered_map<std::string, NftStats> nft_stats(const std::vector<OwnershipEpisode>& episodes,
                                                    const std::vector<TransactionRecord>& records);

EdgeVector ownership_edge_features(const OwnershipEpisode& episode, const NftStats& stats);

// Fixed 19-dim layout of one user:
//   [0] active_timespan_days
//   [1] gift_in_ratio
//   [2] out_in_ratio
//   [3..7]   #tx (mint, buy, gift_in, sell, gift_out)
//   [8..12]  #collections (same order)
//   [13..16] #neighbors (buy, sell, gift_in, gift_out)
//   [17] freq_gift_in  [18] freq_sell   (count / active timespan days)
constexpr int kUserDims = 19;
using UserVector = std::array<double, kUserDims>;

extern const std::array<const char*, kUserDims> kUserDimNames;

struct UserFeatureIndex {
    std::unordered_map<std::string, UserActivity> activity;
    // distinct contracts per transaction type, per user
    std::unordered_map<std::string, std::array<std::unordered_set<std::string>, 5>> collections;
    // distinct counterparties per type (buy, sell, gift_in, gift_out), per user
    std::unordered_map<std::string, std::array<std::unordered_set<std::string>, 4>> neighbors;
};

UserFeatureIndex build_user_feature_index(const std::vector<TransactionRecord>& records);

UserVector user_node_attributes(const std::string& user, const UserFeatureIndex& index);

std::unordered_map<std::string, UserVector> all_user_attributes(
    const std::vector<TransactionRecord>& records);

// Per-dimension log1p-then-standardize transform learned on training rows.
// One-hot and ratio dimensions pass through untouched; the -1 out-price
// sentinel skips the log compression but shares the standardization.
struct Scaler {
    std::vector<bool> log_compress;
    std::vector<double> shift;
    std::vector<double> scale;  // always > 0

    std::vector<double> apply(const std::vector<double>& row) const;
};

Scaler fit_scaler(const std::vector<std::vector<double>>& training_rows,
                  const std::vector<bool>& log_dims);

// Dim masks for the two feature layouts.
std::vector<bool> user_log_dims();
std::vector<bool> edge_log_dims();

}  // namespace drainwatch::features
