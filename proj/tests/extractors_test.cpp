#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>

#include "drainwatch/extractors.hpp"

using namespace drainwatch;
using namespace drainwatch::extractors;
using features::EdgeVector;
using features::kUserDims;
using graphs::NftUserGraph;
using graphs::Relation;
using graphs::UserGraph;

namespace {

// Bipartite toy: n_pos drainer-style users (short hold, gift-in/sell edges)
// and n_neg regular users (long hold, mint/keep edges), one NFT each.
NftUserGraph toy_nft_graph(int n_pos, int n_neg) {
    NftUserGraph g;
    auto add_user = [&](const std::string& name) {
        g.user_index[name] = static_cast<int>(g.users.size());
        g.users.push_back(name);
        return g.user_index[name];
    };
    auto add_nft = [&](const std::string& name) {
        g.nft_index[name] = static_cast<int>(g.nfts.size());
        g.nfts.push_back(name);
        return g.nft_index[name];
    };
    for (int i = 0; i < n_pos + n_neg; ++i) {
        bool pos = i < n_pos;
        int u = add_user((pos ? "d" : "r") + std::to_string(i));
        int n = add_nft("nft" + std::to_string(i));
        EdgeVector f{};
        if (pos) {
            f[0] = 0.1;  // short hold
            f[3] = 1;    // gift in
            f[4] = 1;    // sold
            f[8] = 0.4;  // below the 1.0 token average
        } else {
            f[0] = 40.0;  // long hold
            f[1] = 1;     // minted
            f[6] = 1;     // still held
            f[8] = -1.0;
        }
        f[9] = 10.0;
        f[10] = 1.0;
        g.edges.push_back({u, n, f});
    }
    g.user_edges.resize(g.users.size());
    g.nft_edges.resize(g.nfts.size());
    for (int e = 0; e < static_cast<int>(g.edges.size()); ++e) {
        g.user_edges[g.edges[e].user].push_back(e);
        g.nft_edges[g.edges[e].nft].push_back(e);
    }
    return g;
}

// Social toy: positives have gift_in_ratio 1 and sit in a gift clique with a
// hub; negatives have buy-heavy attributes on sale edges.
void toy_user_graph(int n_pos, int n_neg, UserGraph& g,
                    std::vector<std::vector<double>>& scaled) {
    auto add_user = [&](const std::string& name) {
        g.user_index[name] = static_cast<int>(g.users.size());
        g.users.push_back(name);
        g.attrs.emplace_back();
        return g.user_index[name];
    };
    int hub = add_user("hub");
    for (int i = 0; i < n_pos + n_neg; ++i) {
        bool pos = i < n_pos;
        int u = add_user((pos ? "d" : "r") + std::to_string(i));
        Relation rel = pos ? Relation::GIFT : Relation::SALE;
        g.edges.push_back({hub, u, rel, 1});
    }
    g.adj_sale.resize(g.users.size());
    g.adj_gift.resize(g.users.size());
    for (int e = 0; e < static_cast<int>(g.edges.size()); ++e) {
        const auto& ed = g.edges[e];
        auto& adj = ed.rel == Relation::SALE ? g.adj_sale : g.adj_gift;
        adj[ed.a].emplace_back(ed.b, e);
        adj[ed.b].emplace_back(ed.a, e);
    }
    scaled.assign(g.users.size(), std::vector<double>(kUserDims, 0.0));
    for (int i = 0; i < n_pos + n_neg; ++i) {
        bool pos = i < n_pos;
        auto& row = scaled[static_cast<size_t>(i) + 1];
        row[1] = pos ? 1.0 : 0.0;   // gift-in ratio
        row[2] = pos ? 1.0 : 0.1;   // out-in ratio
        row[4] = pos ? 0.0 : 2.0;   // buys
    }
}

std::vector<int> iota_users(int from, int count) {
    std::vector<int> v(count);
    for (int i = 0; i < count; ++i) v[i] = from + i;
    return v;
}

}  // namespace

TEST_CASE("f1 score matches hand-worked confusion matrices") {
    CHECK(f1_score({1, 1, 0, 0}, {1, 0, 1, 0}) == doctest::Approx(0.5));
    CHECK(f1_score({1, 1, 1, 1}, {1, 1, 1, 1}) == doctest::Approx(1.0));
    CHECK(f1_score({0, 0}, {1, 1}) == doctest::Approx(0.0));
    CHECK(f1_score({1, 1}, {0, 0}) == doctest::Approx(0.0));
}

TEST_CASE("validation split is stratified, disjoint, and seeded") {
    std::vector<int> labels;
    for (int i = 0; i < 50; ++i) labels.push_back(i < 10 ? 1 : 0);
    std::vector<int> train, val;
    split_train_val(labels, 0.2, 3, train, val);
    CHECK(train.size() + val.size() == labels.size());
    int val_pos = 0;
    for (int i : val) val_pos += labels[i];
    CHECK(val_pos == 2);  // 20% of the 10 positives
    std::vector<int> seen(labels.size(), 0);
    for (int i : train) seen[i]++;
    for (int i : val) seen[i]++;
    for (int s : seen) CHECK(s == 1);

    std::vector<int> train2, val2;
    split_train_val(labels, 0.2, 3, train2, val2);
    CHECK(train == train2);
    CHECK(val == val2);
}

TEST_CASE("edge-context model embeds isolated users as zero vectors") {
    NftUserGraph g = toy_nft_graph(2, 2);
    g.users.push_back("isolated");
    g.user_index["isolated"] = 4;
    g.user_edges.emplace_back();
    TceModel m(16, 4, 1);
    auto embs = m.embed(g, {4});
    REQUIRE(embs.size() == 1);
    for (double v : embs[0]) CHECK(v == 0.0);
}

TEST_CASE("edge-context model is deterministic per seed") {
    NftUserGraph g = toy_nft_graph(3, 3);
    TceModel a(16, 4, 9), b(16, 4, 9), c(16, 4, 10);
    auto users = iota_users(0, 6);
    CHECK(a.embed(g, users) == b.embed(g, users));
    CHECK(a.embed(g, users) != c.embed(g, users));
}

TEST_CASE("edge-context model learns a separable ownership pattern") {
    NftUserGraph g = toy_nft_graph(8, 8);
    auto users = iota_users(0, 16);
    std::vector<int> labels(16, 0);
    for (int i = 0; i < 8; ++i) labels[i] = 1;
    TceModel m(16, 4, 2);
    TrainConfig cfg;
    cfg.lr = 5e-3;
    cfg.max_epochs = 300;
    cfg.patience = 300;
    cfg.val_frac = 0.25;
    cfg.seed = 2;
    TrainOutcome out = m.train(g, users, labels, cfg);
    CHECK(out.final_train_f1 == doctest::Approx(1.0));
    CHECK(out.best_val_f1 == doctest::Approx(1.0));
    // logits argmax agrees with labels
    auto lg = m.logits(g, users);
    for (int i = 0; i < 16; ++i) CHECK((lg[i][1] > lg[i][0] ? 1 : 0) == labels[i]);
}

TEST_CASE("social-context model learns relation-typed neighborhoods") {
    UserGraph g;
    std::vector<std::vector<double>> scaled;
    toy_user_graph(8, 8, g, scaled);
    auto users = iota_users(1, 16);  // skip the hub
    std::vector<int> labels(16, 0);
    for (int i = 0; i < 8; ++i) labels[i] = 1;
    SceModel m(16, 2, 4);
    TrainConfig cfg;
    cfg.lr = 1e-2;
    cfg.max_epochs = 300;
    cfg.patience = 300;
    cfg.val_frac = 0.25;
    cfg.seed = 4;
    TrainOutcome out = m.train(g, scaled, users, labels, cfg);
    CHECK(out.final_train_f1 == doctest::Approx(1.0));
    auto embs = m.embed(g, scaled, users);
    REQUIRE(embs.size() == 16);
    CHECK(static_cast<int>(embs[0].size()) == m.hidden());
}

TEST_CASE("training requires positive examples") {
    NftUserGraph g = toy_nft_graph(2, 2);
    auto users = iota_users(0, 4);
    std::vector<int> labels(4, 0);
    TceModel m(8, 2, 0);
    TrainConfig cfg;
    CHECK_THROWS_AS(m.train(g, users, labels, cfg), TrainError);
}

TEST_CASE("parameter lists cover every trainable tensor") {
    TceModel tce(16, 4, 0);
    // per-edge mixer, per-NFT aggregator, 4 attention vectors, head w+b
    CHECK(tce.params().size() == 2 + 4 + 2);
    SceModel sce(16, 2, 0);
    // 2 layers x (self, sale, gift) + head w+b
    CHECK(sce.params().size() == 2 * 3 + 2);
}
