#include "drainwatch/graphs.hpp"

#include <algorithm>
#include <fstream>
#include <queue>

namespace drainwatch::graphs {

bool NftUserGraph::is_bipartite_consistent() const {
    for (const auto& e : edges) {
        if (e.user < 0 || e.user >= static_cast<int>(users.size())) return false;
        if (e.nft < 0 || e.nft >= static_cast<int>(nfts.size())) return false;
    }
    return true;
}

int64_t UserGraph::total_multiplicity() const {
    int64_t n = 0;
    for (const auto& e : edges) n += e.multiplicity;
    return n;
}

namespace {

int intern(std::vector<std::string>& names, std::unordered_map<std::string, int>& index,
           const std::string& name) {
    auto [it, fresh] = index.try_emplace(name, static_cast<int>(names.size()));
    if (fresh) names.push_back(name);
    return it->second;
}

}  // namespace

NftUserGraph build_nft_user_graph(const std::vector<OwnershipEpisode>& episodes,
                                  const std::vector<TransactionRecord>& records) {
    NftUserGraph g;
    auto stats = features::nft_stats(episodes, records);
    g.edges.reserve(episodes.size());
    for (const auto& ep : episodes) {
        int u = intern(g.users, g.user_index, ep.owner);
        int n = intern(g.nfts, g.nft_index, ep.token);
        g.edges.push_back({u, n, features::ownership_edge_features(ep, stats.at(ep.token))});
    }
    g.user_edges.resize(g.users.size());
    g.nft_edges.resize(g.nfts.size());
    for (int i = 0; i < static_cast<int>(g.edges.size()); ++i) {
        g.user_edges[g.edges[i].user].push_back(i);
        g.nft_edges[g.edges[i].nft].push_back(i);
    }
    if (!g.is_bipartite_consistent()) throw DataError("NFT-User graph failed bipartite check");
    return g;
}

UserGraph build_user_graph(const std::vector<TransactionRecord>& records,
                           const std::unordered_map<std::string, UserVector>& user_attrs) {
    UserGraph g;
    // key: (min,max,rel) -> edge id
    std::unordered_map<std::string, int> edge_key;
    for (const auto& r : records) {
        Relation rel;
        if (r.kind == TxKind::SALE)
            rel = Relation::SALE;
        else if (r.kind == TxKind::GIFT)
            rel = Relation::GIFT;
        else
            continue;  // mint/burn create no user-user edge
        if (r.from == r.to) continue;  // self-loops dropped
        int a = intern(g.users, g.user_index, r.from);
        int b = intern(g.users, g.user_index, r.to);
        int lo = std::min(a, b), hi = std::max(a, b);
        std::string key = std::to_string(lo) + ":" + std::to_string(hi) + ":" +
                          (rel == Relation::SALE ? "s" : "g");
        auto [it, fresh] = edge_key.try_emplace(key, static_cast<int>(g.edges.size()));
        if (fresh)
            g.edges.push_back({lo, hi, rel, 1});
        else
            g.edges[it->second].multiplicity++;
    }
    // Users with records but no sale/gift counterpart still get nodes so their
    // attributes are usable downstream.
    for (const auto& [user, attrs] : user_attrs) intern(g.users, g.user_index, user);

    g.attrs.resize(g.users.size());
    for (size_t i = 0; i < g.users.size(); ++i) {
        auto it = user_attrs.find(g.users[i]);
        if (it != user_attrs.end()) g.attrs[i] = it->second;
    }
    g.adj_sale.resize(g.users.size());
    g.adj_gift.resize(g.users.size());
    for (int i = 0; i < static_cast<int>(g.edges.size()); ++i) {
        const auto& e = g.edges[i];
        auto& adj = e.rel == Relation::SALE ? g.adj_sale : g.adj_gift;
        adj[e.a].emplace_back(e.b, i);
        adj[e.b].emplace_back(e.a, i);
    }
    return g;
}

SubgraphSelection select_evaluation_subgraph(const UserGraph& graph,
                                             const std::vector<std::string>& central_accounts,
                                             int hops) {
    SubgraphSelection sel;
    std::vector<int> dist(graph.users.size(), -1);
    std::queue<int> q;
    for (const auto& acc : central_accounts) {
        auto it = graph.user_index.find(acc);
        if (it == graph.user_index.end()) throw DataError("unknown account in subgraph: " + acc);
        sel.central_users.insert(acc);
        if (dist[it->second] != 0) {
            dist[it->second] = 0;
            q.push(it->second);
        }
    }
    while (!q.empty()) {
        int u = q.front();
        q.pop();
        if (dist[u] >= hops) continue;
        for (const auto* adj : {&graph.adj_sale[u], &graph.adj_gift[u]}) {
            for (const auto& [v, eid] : *adj) {
                if (dist[v] < 0) {
                    dist[v] = dist[u] + 1;
                    q.push(v);
                }
            }
        }
    }
    for (size_t i = 0; i < graph.users.size(); ++i)
        if (dist[i] >= 0) sel.included_users.insert(graph.users[i]);
    return sel;
}

NftUserGraph cap_neighbors(const NftUserGraph& graph, int max_degree, uint64_t seed) {
    if (max_degree < 1) throw DataError("cap_neighbors: max_degree must be >= 1");
    std::vector<bool> keep(graph.edges.size(), true);
    Rng rng(seed);
    for (size_t n = 0; n < graph.nft_edges.size(); ++n) {
        const auto& eids = graph.nft_edges[n];
        if (static_cast<int>(eids.size()) <= max_degree) continue;
        std::vector<int> shuffled(eids);
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        for (size_t k = max_degree; k < shuffled.size(); ++k) keep[shuffled[k]] = false;
    }
    NftUserGraph out;
    out.users = graph.users;
    out.nfts = graph.nfts;
    out.user_index = graph.user_index;
    out.nft_index = graph.nft_index;
    for (size_t i = 0; i < graph.edges.size(); ++i)
        if (keep[i]) out.edges.push_back(graph.edges[i]);
    out.user_edges.resize(out.users.size());
    out.nft_edges.resize(out.nfts.size());
    for (int i = 0; i < static_cast<int>(out.edges.size()); ++i) {
        out.user_edges[out.edges[i].user].push_back(i);
        out.nft_edges[out.edges[i].nft].push_back(i);
    }
    return out;
}

void write_nft_user_graph_csv(const NftUserGraph& g, const std::string& dir) {
    {
        std::ofstream out(dir + "/nft_user_nodes.csv");
        out << "node_id,kind,name\n";
        for (size_t i = 0; i < g.users.size(); ++i) out << i << ",user," << g.users[i] << "\n";
        for (size_t i = 0; i < g.nfts.size(); ++i) out << i << ",nft," << g.nfts[i] << "\n";
    }
    std::ofstream out(dir + "/nft_user_edges.csv");
    out << "user_id,nft_id";
    for (const char* name : features::kEdgeDimNames) out << "," << name;
    out << "\n";
    for (const auto& e : g.edges) {
        out << e.user << "," << e.nft;
        for (double x : e.features) out << "," << x;
        out << "\n";
    }
}

void write_user_graph_csv(const UserGraph& g, const std::string& dir) {
    {
        std::ofstream out(dir + "/user_nodes.csv");
        out << "node_id,name";
        for (const char* name : features::kUserDimNames) out << "," << name;
        out << "\n";
        for (size_t i = 0; i < g.users.size(); ++i) {
            out << i << "," << g.users[i];
            for (double x : g.attrs[i]) out << "," << x;
            out << "\n";
        }
    }
    std::ofstream out(dir + "/user_edges.csv");
    out << "a,b,relation,multiplicity\n";
    for (const auto& e : g.edges)
        out << e.a << "," << e.b << "," << (e.rel == Relation::SALE ? "sale" : "gift") << ","
            << e.multiplicity << "\n";
}

}  // namespace drainwatch::graphs
