#pragma once

#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "drainwatch/txdata.hpp"

namespace drainwatch::measure {

using txdata::TransactionRecord;
using txdata::TxKind;
using AccountSet = std::unordered_set<std::string>;

// One user's tenure of one NFT: from the record that gave them ownership to
// the record that took it away (or the end of the collection period).
struct OwnershipEpisode {
    std::string token;
    std::string owner;
    TransactionRecord in_record;
    std::optional<TransactionRecord> out_record;
    double holding_time_days = 0.0;
};

std::vector<OwnershipEpisode> episodes(const std::vector<TransactionRecord>& records,
                                       int64_t collection_end);

// Per-user transaction tallies shared by several analytics.
struct UserActivity {
    int64_t first_ts = 0;
    int64_t last_ts = 0;
    int n_mint = 0, n_buy = 0, n_gift_in = 0, n_sell = 0, n_gift_out = 0, n_burn = 0;
    int n_records = 0;
    int in_count() const { return n_mint + n_buy + n_gift_in; }
    int out_count() const { return n_sell + n_gift_out; }
};

std::unordered_map<std::string, UserActivity> user_activity(
    const std::vector<TransactionRecord>& records);

double active_timespan_days(const UserActivity& a);
// gift-in / (mint + buy + gift-in); 0 when there are no in-transactions.
double gift_in_ratio(const UserActivity& a);
// (sell + gift-out) / (mint + buy + gift-in); 0 when no in-transactions.
double out_in_ratio(const UserActivity& a);

// Accounts receiving >=1 gift of a drained NFT from a drainer. A drained NFT
// is one gifted in to a drainer. Drainers themselves are excluded.
AccountSet find_affiliated_users(const std::vector<TransactionRecord>& records,
                                 const AccountSet& drainers);

enum class DrainFate { SELL, GIFT_OUT_1, GIFT_OUT_MANY, NONE };

struct FateRow {
    int64_t count = 0;
    int64_t eventually_sold = 0;
};

// What the drainer did with each gifted-in NFT: sold it directly, gifted it
// out once / more than once before the first sale, or still holds it.
std::map<DrainFate, FateRow> drained_nft_fates(const std::vector<TransactionRecord>& records,
                                               const AccountSet& drainers);

struct ComparisonStats {
    int64_t n_total = 0;       // drained NFTs compared
    int64_t n_excluded = 0;    // no regular history / ineligible
    int64_t n_below_avg = 0;
    int64_t n_is_min = 0;      // holding-time comparison only
    double percent_decrease_mean = 0.0;  // over the below-average cases
    double percent_decrease_std = 0.0;
};

// Drainer holding time of each drained NFT against the mean holding time of
// the NFT's non-drainer, non-affiliated owners.
ComparisonStats holding_time_comparison(const std::vector<OwnershipEpisode>& eps,
                                        const AccountSet& drainers,
                                        const AccountSet& affiliated);

struct PriceComparison {
    ComparisonStats vs_avg;
    ComparisonStats vs_closest;
};

// First sale of each drained NFT by the drainer or an affiliate, against the
// NFT's other sales: their mean and the one closest in time (ties earlier).
PriceComparison price_comparison(const std::vector<TransactionRecord>& records,
                                 const AccountSet& drainers,
                                 const AccountSet& affiliated);

// Right-continuous step CDF; last fraction is 1.
std::vector<std::pair<double, double>> empirical_cdf(std::vector<double> values);

}  // namespace drainwatch::measure
