#include "drainwatch/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace drainwatch::measure {

namespace {

struct TokenRecords {
    std::vector<const TransactionRecord*> recs;  // timestamp order
};

std::unordered_map<std::string, TokenRecords> group_by_token(
    const std::vector<TransactionRecord>& records) {
    std::unordered_map<std::string, TokenRecords> out;
    for (const auto& r : records) out[r.token()].recs.push_back(&r);
    for (auto& [tok, tr] : out) {
        std::stable_sort(tr.recs.begin(), tr.recs.end(),
                         [](const TransactionRecord* a, const TransactionRecord* b) {
                             return a->timestamp < b->timestamp;
                         });
    }
    return out;
}

void mean_std(const std::vector<double>& xs, double& mean, double& std) {
    mean = 0.0;
    std = 0.0;
    if (xs.empty()) return;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    for (double x : xs) std += (x - mean) * (x - mean);
    std = std::sqrt(std / static_cast<double>(xs.size()));
}

}  // namespace

std::vector<OwnershipEpisode> episodes(const std::vector<TransactionRecord>& records,
                                       int64_t collection_end) {
    auto by_token = group_by_token(records);
    std::vector<OwnershipEpisode> out;
    for (auto& [tok, tr] : by_token) {
        std::string owner;  // empty = nobody holds it (yet)
        const TransactionRecord* open_in = nullptr;
        for (const TransactionRecord* r : tr.recs) {
            bool opens = r->kind != TxKind::BURN;
            if (r->kind != TxKind::MINT) {
                // Transfer or burn out of the current owner's hands. Tolerate a
                // chain that starts mid-history (windowed record sets).
                if (!owner.empty() && r->from != owner)
                    throw DataError("broken ownership chain for token " + tok + ": out by " +
                                    r->from + ", owner " + owner);
                if (open_in != nullptr) {
                    OwnershipEpisode ep;
                    ep.token = tok;
                    ep.owner = owner;
                    ep.in_record = *open_in;
                    ep.out_record = *r;
                    ep.holding_time_days =
                        static_cast<double>(r->timestamp - open_in->timestamp) / kSecondsPerDay;
                    out.push_back(std::move(ep));
                }
            }
            if (opens) {
                owner = r->to;
                open_in = r;
            } else {
                owner.clear();
                open_in = nullptr;
            }
        }
        if (open_in != nullptr) {
            OwnershipEpisode ep;
            ep.token = tok;
            ep.owner = owner;
            ep.in_record = *open_in;
            ep.holding_time_days =
                static_cast<double>(collection_end - open_in->timestamp) / kSecondsPerDay;
            out.push_back(std::move(ep));
        }
    }
    return out;
}

std::unordered_map<std::string, UserActivity> user_activity(
    const std::vector<TransactionRecord>& records) {
    std::unordered_map<std::string, UserActivity> out;
    auto touch = [&](const std::string& who, int64_t ts) -> UserActivity& {
        auto [it, fresh] = out.try_emplace(who);
        UserActivity& a = it->second;
        if (fresh || ts < a.first_ts) a.first_ts = ts;
        if (fresh || ts > a.last_ts) a.last_ts = ts;
        ++a.n_records;
        return a;
    };
    for (const auto& r : records) {
        switch (r.kind) {
            case TxKind::MINT:
                touch(r.to, r.timestamp).n_mint++;
                break;
            case TxKind::SALE:
                touch(r.to, r.timestamp).n_buy++;
                touch(r.from, r.timestamp).n_sell++;
                break;
            case TxKind::GIFT:
                touch(r.to, r.timestamp).n_gift_in++;
                touch(r.from, r.timestamp).n_gift_out++;
                break;
            case TxKind::BURN:
                touch(r.from, r.timestamp).n_burn++;
                break;
        }
    }
    return out;
}

double active_timespan_days(const UserActivity& a) {
    if (a.n_records == 0) throw DataError("active_timespan: user has no records");
    return static_cast<double>(a.last_ts - a.first_ts) / kSecondsPerDay;
}

double gift_in_ratio(const UserActivity& a) {
    int denom = a.in_count();
    return denom == 0 ? 0.0 : static_cast<double>(a.n_gift_in) / denom;
}

double out_in_ratio(const UserActivity& a) {
    int denom = a.in_count();
    return denom == 0 ? 0.0 : static_cast<double>(a.out_count()) / denom;
}

namespace {

// Tokens gifted in to any drainer, with the timestamp of the first such gift.
std::unordered_map<std::string, int64_t> drained_tokens(
    const std::vector<TransactionRecord>& records, const AccountSet& drainers) {
    std::unordered_map<std::string, int64_t> out;
    for (const auto& r : records) {
        if (r.kind == TxKind::GIFT && drainers.count(r.to)) {
            auto [it, fresh] = out.try_emplace(r.token(), r.timestamp);
            if (!fresh && r.timestamp < it->second) it->second = r.timestamp;
        }
    }
    return out;
}

}  // namespace

AccountSet find_affiliated_users(const std::vector<TransactionRecord>& records,
                                 const AccountSet& drainers) {
    auto drained = drained_tokens(records, drainers);
    AccountSet out;
    for (const auto& r : records) {
        if (r.kind != TxKind::GIFT) continue;
        if (!drainers.count(r.from)) continue;
        if (drainers.count(r.to)) continue;
        if (drained.count(r.token())) out.insert(r.to);
    }
    return out;
}

std::map<DrainFate, FateRow> drained_nft_fates(const std::vector<TransactionRecord>& records,
                                               const AccountSet& drainers) {
    auto drained = drained_tokens(records, drainers);
    auto by_token = group_by_token(records);
    std::map<DrainFate, FateRow> table;
    table[DrainFate::SELL];
    table[DrainFate::GIFT_OUT_1];
    table[DrainFate::GIFT_OUT_MANY];
    table[DrainFate::NONE];
    for (const auto& [tok, drain_ts] : drained) {
        const auto& recs = by_token.at(tok).recs;
        int gifts_before_sale = 0;
        bool sold = false;
        bool any_out = false;
        bool past_drain = false;
        for (const TransactionRecord* r : recs) {
            if (!past_drain) {
                if (r->kind == TxKind::GIFT && drainers.count(r->to) && r->timestamp == drain_ts)
                    past_drain = true;
                continue;
            }
            if (r->kind == TxKind::SALE) {
                sold = true;
                any_out = true;
                break;
            }
            if (r->kind == TxKind::GIFT) {
                ++gifts_before_sale;
                any_out = true;
            }
        }
        DrainFate fate;
        if (!any_out)
            fate = DrainFate::NONE;
        else if (gifts_before_sale == 0)
            fate = DrainFate::SELL;
        else if (gifts_before_sale == 1)
            fate = DrainFate::GIFT_OUT_1;
        else
            fate = DrainFate::GIFT_OUT_MANY;
        table[fate].count++;
        if (sold) table[fate].eventually_sold++;
    }
    return table;
}

ComparisonStats holding_time_comparison(const std::vector<OwnershipEpisode>& eps,
                                        const AccountSet& drainers,
                                        const AccountSet& affiliated) {
    // token -> episodes
    std::unordered_map<std::string, std::vector<const OwnershipEpisode*>> by_token;
    for (const auto& e : eps) by_token[e.token].push_back(&e);

    ComparisonStats stats;
    std::vector<double> pds;
    for (const auto& [tok, token_eps] : by_token) {
        for (const OwnershipEpisode* drain_ep : token_eps) {
            if (!drainers.count(drain_ep->owner)) continue;
            if (drain_ep->in_record.kind != TxKind::GIFT) continue;
            if (!drain_ep->out_record) continue;
            double sum = 0.0;
            int n = 0;
            double min_ht = std::numeric_limits<double>::infinity();
            for (const OwnershipEpisode* e : token_eps)
                min_ht = std::min(min_ht, e->holding_time_days);
            for (const OwnershipEpisode* e : token_eps) {
                if (drainers.count(e->owner) || affiliated.count(e->owner)) continue;
                sum += e->holding_time_days;
                ++n;
            }
            if (n == 0) {
                stats.n_excluded++;
                continue;
            }
            double avg = sum / n;
            stats.n_total++;
            if (drain_ep->holding_time_days <= min_ht) stats.n_is_min++;
            if (avg > 0 && drain_ep->holding_time_days < avg) {
                stats.n_below_avg++;
                pds.push_back(100.0 * (avg - drain_ep->holding_time_days) / avg);
            }
        }
    }
    mean_std(pds, stats.percent_decrease_mean, stats.percent_decrease_std);
    return stats;
}

PriceComparison price_comparison(const std::vector<TransactionRecord>& records,
                                 const AccountSet& drainers,
                                 const AccountSet& affiliated) {
    auto drained = drained_tokens(records, drainers);
    auto by_token = group_by_token(records);
    PriceComparison out;
    std::vector<double> pds_avg, pds_closest;
    for (const auto& [tok, drain_ts] : drained) {
        const auto& recs = by_token.at(tok).recs;
        const TransactionRecord* drain_sale = nullptr;
        std::vector<const TransactionRecord*> other_sales;
        for (const TransactionRecord* r : recs) {
            if (r->kind != TxKind::SALE) continue;
            bool by_drain_side = drainers.count(r->from) || affiliated.count(r->from);
            if (by_drain_side && r->timestamp >= drain_ts) {
                if (drain_sale == nullptr) drain_sale = r;
            } else if (!by_drain_side) {
                other_sales.push_back(r);
            }
        }
        if (drain_sale == nullptr || other_sales.empty()) {
            out.vs_avg.n_excluded++;
            out.vs_closest.n_excluded++;
            continue;
        }
        double avg = 0.0;
        for (const auto* s : other_sales) avg += s->price_eth;
        avg /= static_cast<double>(other_sales.size());

        const TransactionRecord* closest = other_sales.front();
        int64_t best = std::numeric_limits<int64_t>::max();
        for (const auto* s : other_sales) {
            int64_t d = std::llabs(s->timestamp - drain_sale->timestamp);
            if (d < best || (d == best && s->timestamp < closest->timestamp)) {
                best = d;
                closest = s;
            }
        }

        out.vs_avg.n_total++;
        out.vs_closest.n_total++;
        if (avg > 0 && drain_sale->price_eth < avg) {
            out.vs_avg.n_below_avg++;
            pds_avg.push_back(100.0 * (avg - drain_sale->price_eth) / avg);
        }
        if (closest->price_eth > 0 && drain_sale->price_eth < closest->price_eth) {
            out.vs_closest.n_below_avg++;
            pds_closest.push_back(100.0 * (closest->price_eth - drain_sale->price_eth) /
                                  closest->price_eth);
        }
    }
    mean_std(pds_avg, out.vs_avg.percent_decrease_mean, out.vs_avg.percent_decrease_std);
    mean_std(pds_closest, out.vs_closest.percent_decrease_mean, out.vs_closest.percent_decrease_std);
    return out;
}

std::vector<std::pair<double, double>> empirical_cdf(std::vector<double> values) {
    if (values.empty()) throw DataError("empirical_cdf: empty input");
    std::sort(values.begin(), values.end());
    std::vector<std::pair<double, double>> out;
    const double n = static_cast<double>(values.size());
    for (size_t i = 0; i < values.size(); ++i) {
        if (i + 1 < values.size() && values[i + 1] == values[i]) continue;
        out.emplace_back(values[i], static_cast<double>(i + 1) / n);
    }
    return out;
}

}  // namespace drainwatch::measure
