#include "drainwatch/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace drainwatch {

KvConfig KvConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_string(ss.str());
}

KvConfig KvConfig::from_string(const std::string& text) {
    KvConfig cfg;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            size_t a = s.find_first_not_of(" \t\r");
            size_t b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (!key.empty()) cfg.values_[key] = val;
    }
    return cfg;
}

std::string KvConfig::get(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}
double KvConfig::get_double(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : std::stod(it->second);
}
int64_t KvConfig::get_int(const std::string& key, int64_t fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : std::stoll(it->second);
}
bool KvConfig::get_bool(const std::string& key, bool fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    return it->second == "1" || it->second == "true" || it->second == "yes";
}

}  // namespace drainwatch

namespace drainwatch::synth {

const char* label_name(Label l) {
    switch (l) {
        case Label::REGULAR: return "regular";
        case Label::DRAINER: return "drainer";
        case Label::AFFILIATED: return "affiliated";
        case Label::VICTIM: return "victim";
    }
    return "?";
}

Label label_from_name(const std::string& s) {
    if (s == "regular") return Label::REGULAR;
    if (s == "drainer") return Label::DRAINER;
    if (s == "affiliated") return Label::AFFILIATED;
    if (s == "victim") return Label::VICTIM;
    throw DataError("unknown label: " + s);
}

SynthConfig SynthConfig::from_kv(const KvConfig& kv) {
    SynthConfig c;
    c.seed = static_cast<uint64_t>(kv.get_int("seed", static_cast<int64_t>(c.seed)));
    c.n_regular = static_cast<int>(kv.get_int("n_regular", c.n_regular));
    c.n_drainers = static_cast<int>(kv.get_int("n_drainers", c.n_drainers));
    c.n_mimics = static_cast<int>(kv.get_int("n_mimics", c.n_mimics));
    c.n_collections = static_cast<int>(kv.get_int("n_collections", c.n_collections));
    c.start_ts = kv.get_int("start_ts", c.start_ts);
    c.end_ts = kv.get_int("end_ts", c.end_ts);
    c.drainer.frac_gift_in_only = kv.get_double("frac_gift_in_only", c.drainer.frac_gift_in_only);
    c.drainer.frac_with_affiliates =
        kv.get_double("frac_with_affiliates", c.drainer.frac_with_affiliates);
    c.drainer.sell_within_day_frac =
        kv.get_double("sell_within_day_frac", c.drainer.sell_within_day_frac);
    c.drainer.price_discount_mean =
        kv.get_double("price_discount_mean", c.drainer.price_discount_mean);
    c.drainer.price_discount_std = kv.get_double("price_discount_std", c.drainer.price_discount_std);
    c.drainer.frac_below_avg_price =
        kv.get_double("frac_below_avg_price", c.drainer.frac_below_avg_price);
    c.drainer.ht_percent_decrease_mean =
        kv.get_double("ht_percent_decrease_mean", c.drainer.ht_percent_decrease_mean);
    c.drainer.frac_hold = kv.get_double("frac_hold", c.drainer.frac_hold);
    c.regular.tx_count_log_mean = kv.get_double("tx_count_log_mean", c.regular.tx_count_log_mean);
    c.regular.tx_count_log_sigma = kv.get_double("tx_count_log_sigma", c.regular.tx_count_log_sigma);
    c.regular.holding_log_mean = kv.get_double("holding_log_mean", c.regular.holding_log_mean);
    c.regular.holding_log_sigma = kv.get_double("holding_log_sigma", c.regular.holding_log_sigma);
    c.max_victims_per_drainer =
        static_cast<int>(kv.get_int("max_victims_per_drainer", c.max_victims_per_drainer));
    c.max_nfts_per_victim = static_cast<int>(kv.get_int("max_nfts_per_victim", c.max_nfts_per_victim));
    c.marketplace_frac = kv.get_double("marketplace_frac", c.marketplace_frac);
    return c;
}

void SynthConfig::validate() const {
    auto frac = [](double f) { return f >= 0.0 && f <= 1.0; };
    if (n_regular < 0 || n_drainers < 0 || n_collections <= 0)
        throw DataError("invalid synth config: negative counts");
    if (start_ts >= end_ts) throw DataError("invalid synth config: start_ts >= end_ts");
    if (!frac(drainer.frac_gift_in_only) || !frac(drainer.frac_with_affiliates) ||
        !frac(drainer.sell_within_day_frac) || !frac(drainer.frac_below_avg_price) ||
        !frac(drainer.frac_hold) || !frac(marketplace_frac))
        throw DataError("invalid synth config: fraction out of [0,1]");
    if (drainer.price_discount_mean < 0 || drainer.price_discount_mean > 1)
        throw DataError("invalid synth config: price_discount_mean out of [0,1]");
}

namespace {

constexpr const char* kMarketplace = "0xmarketplace0000000000000000000000000000";

struct DrainPlan {
    int drainer = 0;
    std::string victim;
    std::string creator;
    std::string buyer;
    std::string affiliate;  // empty = direct sale
    std::string contract, token;
    double t_drain = 0;   // days from start
    double c_days = 0;    // creator hold
    double v_days = 0;    // victim hold
    double aff_hold = 0;  // affiliate hold (routed only)
    double buy_price = 0;
    double sale_price = 0;
    bool hold_forever = false;
    bool fast = false;
    double d_days = 0;  // drainer hold
    double pd = 0;      // realized holding-time percent decrease
};

class Generator {
public:
    Generator(const SynthConfig& cfg) : cfg_(cfg), rng_(cfg.seed) {}

    SynthResult run() {
        setup_accounts();
        plan_drains();
        solve_slow_holds();
        emit_drains();
        emit_regular_chains();
        emit_mimics();
        finalize_labels();
        return std::move(out_);
    }

private:
    const SynthConfig& cfg_;
    Rng rng_;
    SynthResult out_;
    std::vector<std::string> regulars_;
    std::vector<std::string> mimics_;
    std::vector<std::string> mimic_friends_;
    std::vector<std::string> drainers_;
    std::vector<int> tickets_;  // indices into regulars_, one per planned transaction
    size_t ticket_pos_ = 0;
    std::vector<double> collection_base_;
    std::vector<DrainPlan> plans_;
    std::vector<bool> drainer_gift_only_;
    int64_t tx_counter_ = 0;
    int64_t token_counter_ = 0;
    double end_day_ = 0;

    std::string new_tx() {
        char buf[24];
        std::snprintf(buf, sizeof(buf), "tx%09lld", static_cast<long long>(tx_counter_++));
        return buf;
    }
    std::string new_token() {
        char buf[24];
        std::snprintf(buf, sizeof(buf), "t%08lld", static_cast<long long>(token_counter_++));
        return buf;
    }
    int64_t ts_of(double day) { return cfg_.start_ts + llround(day * kSecondsPerDay); }

    std::string pick_collection() {
        return "c" + std::to_string(uniform_int(rng_, 0, cfg_.n_collections - 1));
    }
    double market_price(const std::string& contract) {
        size_t idx = std::stoul(contract.substr(1));
        return collection_base_[idx] * std::exp(normal(rng_, 0.0, 0.25));
    }

    const std::string& random_regular() {
        return regulars_[uniform_int(rng_, 0, static_cast<int64_t>(regulars_.size()) - 1)];
    }

    void push_nft(const std::string& tx, int64_t log_index, const std::string& contract,
                  const std::string& token, const std::string& from, const std::string& to,
                  double day) {
        out_.events.push_back({tx, log_index, txdata::TokenKind::NFT, contract, token, from, to, 1.0,
                               ts_of(day)});
    }
    // Returns the next free log index.
    int64_t push_payment(const std::string& tx, int64_t log_index, const std::string& payer,
                         const std::string& payee, double amount, double day, bool via_marketplace,
                         double fee) {
        if (!via_marketplace) {
            out_.events.push_back({tx, log_index, txdata::TokenKind::ETHER, "eth", "", payer, payee,
                                   amount, ts_of(day)});
            return log_index + 1;
        }
        out_.events.push_back({tx, log_index, txdata::TokenKind::ETHER, "eth", "", payer, kMarketplace,
                               amount, ts_of(day)});
        out_.events.push_back({tx, log_index + 1, txdata::TokenKind::ETHER, "eth", "", kMarketplace,
                               payee, amount * (1.0 - fee), ts_of(day)});
        return log_index + 2;
    }
    void emit_sale(const std::string& contract, const std::string& token, const std::string& seller,
                   const std::string& buyer, double price, double day, bool via_marketplace,
                   double fee = 0.0) {
        std::string tx = new_tx();
        push_nft(tx, 0, contract, token, seller, buyer, day);
        push_payment(tx, 1, buyer, seller, price, day, via_marketplace, fee);
    }
    void emit_gift(const std::string& contract, const std::string& token, const std::string& from,
                   const std::string& to, double day) {
        std::string tx = new_tx();
        push_nft(tx, 0, contract, token, from, to, day);
    }
    void emit_mint(const std::string& contract, const std::string& token, const std::string& to,
                   double day) {
        std::string tx = new_tx();
        push_nft(tx, 0, contract, token, kNullAccount, to, day);
    }
    void emit_burn(const std::string& contract, const std::string& token, const std::string& from,
                   double day) {
        std::string tx = new_tx();
        push_nft(tx, 0, contract, token, from, kNullAccount, day);
    }

    void setup_accounts() {
        cfg_.validate();
        end_day_ = static_cast<double>(cfg_.end_ts - cfg_.start_ts) / kSecondsPerDay;
        if (cfg_.n_drainers > 0 && end_day_ < 45)
            throw DataError("invalid synth config: time range too short for drain campaigns");
        out_.marketplace_accounts.insert(kMarketplace);
        for (int i = 0; i < cfg_.n_regular; ++i) {
            char buf[16];
            std::snprintf(buf, sizeof(buf), "r%06d", i);
            regulars_.push_back(buf);
        }
        int n_mimics = cfg_.n_mimics < 0 ? cfg_.n_drainers : cfg_.n_mimics;
        for (int i = 0; i < n_mimics; ++i) {
            char buf[16];
            std::snprintf(buf, sizeof(buf), "m%05d", i);
            mimics_.push_back(buf);
        }
        for (int i = 0; i < cfg_.n_drainers; ++i) {
            char buf[16];
            std::snprintf(buf, sizeof(buf), "d%05d", i);
            drainers_.push_back(buf);
        }
        collection_base_.resize(cfg_.n_collections);
        for (double& b : collection_base_) b = std::exp(normal(rng_, -0.7, 0.8));  // median ~0.5 ETH
        // per-user transaction quotas -> ticket pool
        for (int i = 0; i < cfg_.n_regular; ++i) {
            double q = std::exp(normal(rng_, cfg_.regular.tx_count_log_mean,
                                       cfg_.regular.tx_count_log_sigma));
            int quota = std::max(1, static_cast<int>(std::lround(q)));
            for (int t = 0; t < quota; ++t) tickets_.push_back(i);
        }
        std::shuffle(tickets_.begin(), tickets_.end(), rng_);
    }

    const std::string& pop_ticket() {
        if (ticket_pos_ >= tickets_.size()) return random_regular();
        return regulars_[tickets_[ticket_pos_++]];
    }

    void plan_drains() {
        drainer_gift_only_.assign(drainers_.size(), true);
        for (size_t j = 0; j < drainers_.size(); ++j) {
            bool with_affiliate = uniform(rng_, 0, 1) < cfg_.drainer.frac_with_affiliates;
            drainer_gift_only_[j] = uniform(rng_, 0, 1) < cfg_.drainer.frac_gift_in_only;
            std::string affiliate;
            if (with_affiliate) {
                char buf[16];
                std::snprintf(buf, sizeof(buf), "a%05d", static_cast<int>(j));
                affiliate = buf;
            }
            double t_drain = uniform(rng_, 25.0, end_day_ - 6.0);
            int n_victims = static_cast<int>(uniform_int(rng_, 1, cfg_.max_victims_per_drainer));
            bool routed_any = false;
            for (int v = 0; v < n_victims; ++v) {
                char vbuf[16];
                std::snprintf(vbuf, sizeof(vbuf), "v%05d_%d", static_cast<int>(j), v);
                int n_nft = 1 + std::min(cfg_.max_nfts_per_victim - 1,
                                         static_cast<int>(std::floor(
                                             -std::log(uniform(rng_, 1e-9, 1.0)) * 3.0)));
                for (int k = 0; k < n_nft; ++k) {
                    DrainPlan p;
                    p.drainer = static_cast<int>(j);
                    p.victim = vbuf;
                    p.creator = pop_ticket();
                    p.buyer = random_regular();
                    p.contract = pick_collection();
                    p.token = new_token();
                    p.t_drain = t_drain;
                    p.c_days = uniform(rng_, 1.0, 10.0);
                    double vmax = t_drain - p.c_days - 0.5;
                    p.v_days = std::min(std::exp(normal(rng_, std::log(12.0), 0.6)),
                                        std::max(1.0, vmax));
                    p.v_days = std::max(1.0, p.v_days);
                    p.buy_price = market_price(p.contract);
                    p.hold_forever = uniform(rng_, 0, 1) < cfg_.drainer.frac_hold;
                    bool routed = with_affiliate && uniform(rng_, 0, 1) < 0.5 && !p.hold_forever;
                    if (routed) {
                        p.affiliate = affiliate;
                        p.aff_hold = uniform(rng_, 0.02, 0.3);
                        routed_any = true;
                    }
                    p.fast = uniform(rng_, 0, 1) < cfg_.drainer.sell_within_day_frac;
                    if (uniform(rng_, 0, 1) < cfg_.drainer.frac_below_avg_price) {
                        double disc = std::clamp(normal(rng_, cfg_.drainer.price_discount_mean,
                                                        cfg_.drainer.price_discount_std),
                                                 0.02, 0.90);
                        p.sale_price = p.buy_price * (1.0 - disc);
                    } else {
                        p.sale_price = p.buy_price * (1.0 + uniform(rng_, 0.02, 0.25));
                    }
                    plans_.push_back(std::move(p));
                }
            }
            // an affiliate-owning drainer must route at least one NFT
            if (with_affiliate && !routed_any) {
                for (auto it = plans_.rbegin(); it != plans_.rend(); ++it) {
                    if (it->drainer != static_cast<int>(j)) break;
                    if (!it->hold_forever) {
                        it->affiliate = affiliate;
                        it->aff_hold = uniform(rng_, 0.02, 0.3);
                        break;
                    }
                }
            }
        }
    }

    // Remaining days of the token's life at drain time, minus the affiliate's
    // slice; the post-drain buyer holds the rest until collection end.
    double remaining_days(const DrainPlan& p) const {
        return (end_day_ - p.t_drain) - p.aff_hold;
    }
    static double realized_pd(const DrainPlan& p, double t_rem) {
        double avg = (p.c_days + p.v_days + (t_rem - p.d_days)) / 3.0;
        return 100.0 * (1.0 - p.d_days / avg);
    }

    void solve_slow_holds() {
        // Fast drains: hours-scale holds, measured decrease follows. Slow
        // drains then absorb the residual so the below-average mean lands on
        // the configured target.
        double fast_sum = 0;
        int fast_n = 0, slow_n = 0;
        for (auto& p : plans_) {
            if (p.hold_forever) continue;
            if (p.fast) {
                p.d_days = uniform(rng_, 0.05, 0.95);
                p.pd = realized_pd(p, remaining_days(p));
                fast_sum += p.pd;
                ++fast_n;
            } else {
                ++slow_n;
            }
        }
        double target = cfg_.drainer.ht_percent_decrease_mean;
        double m_slow = target;
        if (slow_n > 0) {
            m_slow = (target * (fast_n + slow_n) - fast_sum) / slow_n;
            m_slow = std::clamp(m_slow, 5.0, 97.0);
        }
        for (auto& p : plans_) {
            if (p.hold_forever || p.fast) continue;
            double pd = std::clamp(normal(rng_, m_slow, 2.0), 2.0, 97.0);
            double total = p.c_days + p.v_days + remaining_days(p);
            double q = 1.0 - pd / 100.0;
            p.d_days = std::clamp(q * total / (3.0 + q), 1.0, remaining_days(p) - 0.05);
            p.pd = realized_pd(p, remaining_days(p));
        }
    }

    void emit_drains() {
        // victim acquisitions
        for (const auto& p : plans_) {
            double t_mint = p.t_drain - p.v_days - p.c_days;
            emit_mint(p.contract, p.token, p.creator, t_mint);
            emit_sale(p.contract, p.token, p.creator, p.victim, p.buy_price, p.t_drain - p.v_days,
                      false);
        }
        // drains: one tx group per victim
        std::map<std::pair<int, std::string>, std::vector<const DrainPlan*>> by_victim;
        for (const auto& p : plans_) by_victim[{p.drainer, p.victim}].push_back(&p);
        for (const auto& [key, tokens] : by_victim) {
            std::string tx = new_tx();
            int64_t log_index = 0;
            for (const DrainPlan* p : tokens)
                push_nft(tx, log_index++, p->contract, p->token, p->victim,
                         drainers_[p->drainer], p->t_drain);
        }
        // liquidation
        for (const auto& p : plans_) {
            if (p.hold_forever) {
                out_.fates[measure::DrainFate::NONE].count++;
                continue;
            }
            const std::string& drainer = drainers_[p.drainer];
            if (p.affiliate.empty()) {
                emit_sale(p.contract, p.token, drainer, p.buyer, p.sale_price,
                          p.t_drain + p.d_days, false);
                out_.fates[measure::DrainFate::SELL].count++;
                out_.fates[measure::DrainFate::SELL].eventually_sold++;
            } else {
                emit_gift(p.contract, p.token, drainer, p.affiliate, p.t_drain + p.d_days);
                emit_sale(p.contract, p.token, p.affiliate, p.buyer, p.sale_price,
                          p.t_drain + p.d_days + p.aff_hold, false);
                out_.affiliated.insert(p.affiliate);
                out_.fates[measure::DrainFate::GIFT_OUT_1].count++;
                out_.fates[measure::DrainFate::GIFT_OUT_1].eventually_sold++;
            }
        }
        // noise mints for drainers that are not gift-in-only
        std::unordered_map<int, double> drain_time;
        for (const auto& p : plans_) drain_time[p.drainer] = p.t_drain;
        for (size_t j = 0; j < drainers_.size(); ++j) {
            if (drainer_gift_only_[j]) {
                ++out_.drainers_gift_in_only;
                continue;
            }
            double t = drain_time.count(static_cast<int>(j)) ? drain_time[static_cast<int>(j)]
                                                             : end_day_ / 2;
            int n_noise = static_cast<int>(uniform_int(rng_, 1, 3));
            for (int k = 0; k < n_noise; ++k)
                emit_mint(pick_collection(), new_token(), drainers_[j],
                          std::max(0.5, t - uniform(rng_, 0.2, 3.0)));
        }
    }

    void emit_regular_chains() {
        double holding_mu = cfg_.regular.holding_log_mean;
        double holding_sigma = cfg_.regular.holding_log_sigma;
        while (ticket_pos_ + 1 < tickets_.size()) {
            std::string contract = pick_collection();
            std::string token = new_token();
            std::string owner = pop_ticket();
            double t = uniform(rng_, 0.0, end_day_ - 1.0);
            emit_mint(contract, token, owner, t);
            int hops = 1 + static_cast<int>(std::floor(-std::log(uniform(rng_, 1e-9, 1.0)) * 1.2));
            for (int h = 0; h < hops; ++h) {
                t += std::exp(normal(rng_, holding_mu, holding_sigma));
                if (t >= end_day_ - 0.05) break;  // still held at collection end
                double roll = uniform(rng_, 0, 1);
                if (roll < 0.04) {
                    emit_burn(contract, token, owner, t);
                    break;
                }
                std::string next = pop_ticket();
                if (next == owner) next = random_regular();
                if (next == owner) break;
                if (roll < 0.30) {
                    emit_gift(contract, token, owner, next, t);
                } else {
                    bool via_mkt = uniform(rng_, 0, 1) < cfg_.marketplace_frac;
                    emit_sale(contract, token, owner, next, market_price(contract), t, via_mkt,
                              0.025);
                }
                owner = next;
            }
        }
    }

    void emit_mimics() {
        // Gift-heavy flippers: the same acquisition / liquidation rhythm as a
        // drain campaign (bulk gift-in, quick flips, occasional routing via a
        // friend), but every sale lands at the market price. In node-attribute
        // space they shadow drainers; only price context tells them apart.
        std::vector<double> fast_holds, slow_holds;
        for (const auto& p : plans_) {
            if (p.hold_forever) continue;
            (p.fast ? fast_holds : slow_holds).push_back(p.d_days);
        }
        auto sample_hold = [&](bool fast) {
            auto& pool = fast ? fast_holds : slow_holds;
            if (pool.empty()) return uniform(rng_, 0.05, 0.95);
            return pool[uniform_int(rng_, 0, static_cast<int64_t>(pool.size()) - 1)];
        };
        for (size_t j = 0; j < mimics_.size(); ++j) {
            const std::string& mimic = mimics_[j];
            bool gift_only = uniform(rng_, 0, 1) < cfg_.drainer.frac_gift_in_only;
            bool with_friend = uniform(rng_, 0, 1) < cfg_.drainer.frac_with_affiliates;
            char fbuf[16];
            std::snprintf(fbuf, sizeof(fbuf), "f%05d", static_cast<int>(j));
            std::string friend_acct = fbuf;
            bool friend_used = false;
            double t0 = uniform(rng_, 25.0, end_day_ - 6.0);
            int n_givers = static_cast<int>(uniform_int(rng_, 1, cfg_.max_victims_per_drainer));
            for (int g = 0; g < n_givers; ++g) {
                const std::string& giver = pop_ticket();
                std::string gift_tx = new_tx();  // bulk gift, one tx group per giver
                int64_t log_index = 0;
                int n_nft = 1 + std::min(cfg_.max_nfts_per_victim - 1,
                                         static_cast<int>(std::floor(
                                             -std::log(uniform(rng_, 1e-9, 1.0)) * 3.0)));
                for (int k = 0; k < n_nft; ++k) {
                    std::string contract = pick_collection();
                    std::string token = new_token();
                    double c_days = uniform(rng_, 1.0, 10.0);
                    double v_days = std::max(
                        1.0, std::min(std::exp(normal(rng_, std::log(12.0), 0.6)),
                                      std::max(1.0, t0 - c_days - 0.5)));
                    const std::string& creator = random_regular();
                    emit_mint(contract, token, creator, t0 - v_days - c_days);
                    emit_sale(contract, token, creator, giver, market_price(contract),
                              t0 - v_days, false);
                    push_nft(gift_tx, log_index++, contract, token, giver, mimic, t0);
                    if (uniform(rng_, 0, 1) < cfg_.drainer.frac_hold) continue;  // kept
                    double hold =
                        sample_hold(uniform(rng_, 0, 1) < cfg_.drainer.sell_within_day_frac);
                    hold = std::clamp(hold, 0.02, end_day_ - t0 - 0.4);
                    if (with_friend && uniform(rng_, 0, 1) < 0.5) {
                        double f_hold = uniform(rng_, 0.02, 0.3);
                        emit_gift(contract, token, mimic, friend_acct, t0 + hold);
                        emit_sale(contract, token, friend_acct, random_regular(),
                                  market_price(contract), t0 + hold + f_hold, false);
                        friend_used = true;
                    } else {
                        emit_sale(contract, token, mimic, random_regular(),
                                  market_price(contract), t0 + hold, false);
                    }
                }
            }
            if (friend_used) mimic_friends_.push_back(friend_acct);
            if (!gift_only) {
                int n_noise = static_cast<int>(uniform_int(rng_, 1, 3));
                for (int k = 0; k < n_noise; ++k)
                    emit_mint(pick_collection(), new_token(), mimic,
                              std::max(0.5, t0 - uniform(rng_, 0.2, 3.0)));
            }
        }
    }

    void finalize_labels() {
        for (const auto& r : regulars_) out_.labels[r] = Label::REGULAR;
        for (const auto& m : mimics_) out_.labels[m] = Label::REGULAR;
        for (const auto& f : mimic_friends_) out_.labels[f] = Label::REGULAR;
        for (const auto& d : drainers_) out_.labels[d] = Label::DRAINER;
        for (const auto& a : out_.affiliated) out_.labels[a] = Label::AFFILIATED;
        for (const auto& p : plans_) out_.labels[p.victim] = Label::VICTIM;
        out_.fates[measure::DrainFate::SELL];
        out_.fates[measure::DrainFate::GIFT_OUT_1];
        out_.fates[measure::DrainFate::GIFT_OUT_MANY];
        out_.fates[measure::DrainFate::NONE];
    }
};

}  // namespace

SynthResult generate_ecosystem(const SynthConfig& config) {
    return Generator(config).run();
}

void write_labels_csv(const std::string& path,
                      const std::unordered_map<std::string, Label>& labels) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << "account,label\n";
    std::vector<std::pair<std::string, Label>> sorted(labels.begin(), labels.end());
    std::sort(sorted.begin(), sorted.end());
    for (const auto& [acc, l] : sorted) out << acc << "," << label_name(l) << "\n";
}

std::unordered_map<std::string, Label> read_labels_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    std::unordered_map<std::string, Label> out;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        auto comma = line.find(',');
        if (comma == std::string::npos) continue;
        std::string acc = line.substr(0, comma);
        std::string lab = line.substr(comma + 1);
        while (!lab.empty() && (lab.back() == '\r' || lab.back() == ' ')) lab.pop_back();
        out[acc] = label_from_name(lab);
    }
    return out;
}

}  // namespace drainwatch::synth
