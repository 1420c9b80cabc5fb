#include "drainwatch/features.hpp"

#include <cmath>

namespace drainwatch::features {

const std::array<const char*, kEdgeDims> kEdgeDimNames = {
    "holding_time_days", "in_mint",  "in_buy",       "in_gift",
    "out_sell",          "out_gift", "out_hold",     "in_price_eth",
    "out_price_eth",     "nft_avg_holding_days", "nft_avg_sale_price_eth"};

const std::array<const char*, kUserDims> kUserDimNames = {
    "active_timespan_days", "gift_in_ratio", "out_in_ratio",
    "tx_mint", "tx_buy", "tx_gift_in", "tx_sell", "tx_gift_out",
    "col_mint", "col_buy", "col_gift_in", "col_sell", "col_gift_out",
    "nb_buy", "nb_sell", "nb_gift_in", "nb_gift_out",
    "freq_gift_in", "freq_sell"};

std::unordered_map<std::string, NftStats> nft_stats(const std::vector<OwnershipEpisode>& episodes,
                                                    const std::vector<TransactionRecord>& records) {
    struct Acc {
        double ht_sum = 0;
        int ht_n = 0;
        double price_sum = 0;
        int price_n = 0;
    };
    std::unordered_map<std::string, Acc> acc;
    for (const auto& e : episodes) {
        auto& a = acc[e.token];
        a.ht_sum += e.holding_time_days;
        a.ht_n++;
    }
    for (const auto& r : records) {
        if (r.kind != TxKind::SALE) continue;
        auto& a = acc[r.token()];
        a.price_sum += r.price_eth;
        a.price_n++;
    }
    std::unordered_map<std::string, NftStats> out;
    out.reserve(acc.size());
    for (const auto& [tok, a] : acc) {
        NftStats s;
        if (a.ht_n > 0) s.avg_holding_days = a.ht_sum / a.ht_n;
        if (a.price_n > 0) s.avg_sale_price = a.price_sum / a.price_n;
        out.emplace(tok, s);
    }
    return out;
}

EdgeVector ownership_edge_features(const OwnershipEpisode& episode, const NftStats& stats) {
    EdgeVector v{};
    v[0] = episode.holding_time_days;
    switch (episode.in_record.kind) {
        case TxKind::MINT: v[1] = 1; break;
        case TxKind::SALE: v[2] = 1; v[7] = episode.in_record.price_eth; break;
        case TxKind::GIFT: v[3] = 1; break;
        default: throw DataError("episode cannot start with a burn");
    }
    if (!episode.out_record) {
        v[6] = 1;
        v[8] = -1.0;
    } else {
        switch (episode.out_record->kind) {
            case TxKind::SALE: v[4] = 1; v[8] = episode.out_record->price_eth; break;
            case TxKind::GIFT: v[5] = 1; break;
            case TxKind::BURN: v[5] = 1; break;  // burn treated as an unpaid out-transfer
            default: throw DataError("episode cannot end with a mint");
        }
    }
    v[9] = stats.avg_holding_days;
    v[10] = stats.avg_sale_price;
    return v;
}

UserFeatureIndex build_user_feature_index(const std::vector<TransactionRecord>& records) {
    UserFeatureIndex idx;
    idx.activity = measure::user_activity(records);
    for (const auto& r : records) {
        switch (r.kind) {
            case TxKind::MINT:
                idx.collections[r.to][0].insert(r.contract);
                break;
            case TxKind::SALE:
                idx.collections[r.to][1].insert(r.contract);
                idx.collections[r.from][3].insert(r.contract);
                idx.neighbors[r.to][0].insert(r.from);
                idx.neighbors[r.from][1].insert(r.to);
                break;
            case TxKind::GIFT:
                idx.collections[r.to][2].insert(r.contract);
                idx.collections[r.from][4].insert(r.contract);
                idx.neighbors[r.to][2].insert(r.from);
                idx.neighbors[r.from][3].insert(r.to);
                break;
            case TxKind::BURN:
                break;
        }
    }
    return idx;
}

UserVector user_node_attributes(const std::string& user, const UserFeatureIndex& index) {
    auto it = index.activity.find(user);
    if (it == index.activity.end()) throw DataError("no records for user " + user);
    const UserActivity& a = it->second;
    UserVector v{};
    double span = measure::active_timespan_days(a);
    v[0] = span;
    v[1] = measure::gift_in_ratio(a);
    v[2] = measure::out_in_ratio(a);
    v[3] = a.n_mint;
    v[4] = a.n_buy;
    v[5] = a.n_gift_in;
    v[6] = a.n_sell;
    v[7] = a.n_gift_out;
    auto cit = index.collections.find(user);
    if (cit != index.collections.end())
        for (int k = 0; k < 5; ++k) v[8 + k] = static_cast<double>(cit->second[k].size());
    auto nit = index.neighbors.find(user);
    if (nit != index.neighbors.end())
        for (int k = 0; k < 4; ++k) v[13 + k] = static_cast<double>(nit->second[k].size());
    if (span > 0) {
        v[17] = a.n_gift_in / span;
        v[18] = a.n_sell / span;
    }
    return v;
}

std::unordered_map<std::string, UserVector> all_user_attributes(
    const std::vector<TransactionRecord>& records) {
    auto index = build_user_feature_index(records);
    std::unordered_map<std::string, UserVector> out;
    out.reserve(index.activity.size());
    for (const auto& [user, act] : index.activity) out.emplace(user, user_node_attributes(user, index));
    return out;
}

std::vector<double> Scaler::apply(const std::vector<double>& row) const {
    if (row.size() != shift.size()) throw DataError("scaler dimension mismatch");
    std::vector<double> out(row.size());
    for (size_t d = 0; d < row.size(); ++d) {
        double x = row[d];
        if (log_compress[d] && x >= 0) x = std::log1p(x);
        out[d] = (x - shift[d]) / scale[d];
    }
    return out;
}

Scaler fit_scaler(const std::vector<std::vector<double>>& training_rows,
                  const std::vector<bool>& log_dims) {
    if (training_rows.size() < 2) throw DataError("fit_scaler: need >= 2 training rows");
    const size_t dims = training_rows.front().size();
    Scaler s;
    s.log_compress.assign(log_dims.begin(), log_dims.end());
    s.log_compress.resize(dims, false);
    s.shift.assign(dims, 0.0);
    s.scale.assign(dims, 1.0);
    const double n = static_cast<double>(training_rows.size());
    for (size_t d = 0; d < dims; ++d) {
        if (!s.log_compress[d]) continue;  // one-hots and ratios untouched
        double mean = 0.0;
        for (const auto& row : training_rows) {
            double x = row[d];
            if (x >= 0) x = std::log1p(x);
            mean += x;
        }
        mean /= n;
        double var = 0.0;
        for (const auto& row : training_rows) {
            double x = row[d];
            if (x >= 0) x = std::log1p(x);
            var += (x - mean) * (x - mean);
        }
        var /= n;
        s.shift[d] = mean;
        s.scale[d] = var > 1e-24 ? std::sqrt(var) : 1.0;  // constant column: scale 1
    }
    return s;
}

std::vector<bool> user_log_dims() {
    std::vector<bool> m(kUserDims, true);
    m[1] = m[2] = false;  // ratios stay as-is
    return m;
}

std::vector<bool> edge_log_dims() {
    std::vector<bool> m(kEdgeDims, false);
    m[0] = m[7] = m[8] = m[9] = m[10] = true;  // time and price dims
    return m;
}

}  // namespace drainwatch::features
