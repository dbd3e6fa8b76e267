#include "sdi/vine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

namespace sdi {

namespace {

// Union-find over 0-based ids.
struct DisjointSet {
    std::vector<int> parent;
    explicit DisjointSet(int n) : parent(static_cast<std::size_t>(n)) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    int find(int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    }
    /// Returns false when both ends were already connected.
    bool unite(int a, int b) {
        int ra = find(a), rb = find(b);
        if (ra == rb) return false;
        parent[static_cast<std::size_t>(ra)] = rb;
        return true;
    }
};

std::string edge_label(const VineEdge& e) {
    std::string s = "(" + std::to_string(e.a) + "," + std::to_string(e.b);
    if (!e.conditioning.empty()) {
        s += "|";
        for (std::size_t i = 0; i < e.conditioning.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(e.conditioning[i]);
        }
    }
    return s + ")";
}

using MarginKey = std::pair<int, std::vector<int>>;

std::vector<int> with_element(const std::vector<int>& set, int extra) {
    std::vector<int> out = set;
    out.insert(std::lower_bound(out.begin(), out.end(), extra), extra);
    return out;
}

void check_unit_matrix(const ColumnMatrix& m, const char* op) {
    for (const auto& col : m.columns())
        for (double x : col)
            if (!(x > 0.0 && x < 1.0))
                throw DomainError(std::string(op) + ": values must lie strictly inside (0,1)");
}

}  // namespace

RVineMatrix::RVineMatrix(std::vector<std::vector<int>> rows) : m_(std::move(rows)) {
    d_ = static_cast<int>(m_.size());
    if (d_ == 0) throw BadLabels("structure matrix is empty");
    for (const auto& row : m_)
        if (static_cast<int>(row.size()) != d_) throw BadLabels("structure matrix is not square");

    for (int i = 1; i <= d_; ++i)
        for (int j = 1; j <= d_; ++j) {
            int v = m_[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)];
            if (j > i) {
                if (v != 0) throw BadLabels("above-diagonal entries must be zero");
            } else if (v < 1 || v > d_) {
                throw BadLabels("entry at (" + std::to_string(i) + "," + std::to_string(j) +
                                ") outside 1.." + std::to_string(d_));
            }
        }

    std::vector<bool> seen(static_cast<std::size_t>(d_) + 1, false);
    for (int j = 1; j <= d_; ++j) {
        int v = at(j, j);
        if (seen[static_cast<std::size_t>(v)])
            throw InvalidDiagonal("diagonal is not a permutation of 1.." + std::to_string(d_));
        seen[static_cast<std::size_t>(v)] = true;
    }

    // Below the diagonal, column j must contain exactly the diagonal labels
    // of the later columns.
    for (int j = 1; j < d_; ++j) {
        std::multiset<int> below, expected;
        for (int i = j + 1; i <= d_; ++i) {
            below.insert(at(i, j));
            expected.insert(at(i, i));
        }
        if (below != expected)
            throw BadLabels("column " + std::to_string(j) +
                            " does not contain the later diagonal labels");
    }

    // Reconstruct the trees bottom-up and check the proximity condition.
    std::map<std::vector<int>, int> prev_sets;  // full label set -> edge id in tree t-1
    for (int t = 1; t <= d_ - 1; ++t) {
        std::vector<VineEdge> tree_edges;
        for (int j = 1; j <= d_ - t; ++j) {
            VineEdge e;
            e.tree = t;
            e.column = j;
            e.a = at(j, j);
            e.b = at(d_ - t + 1, j);
            for (int i = d_ - t + 2; i <= d_; ++i) e.conditioning.push_back(at(i, j));
            std::sort(e.conditioning.begin(), e.conditioning.end());
            tree_edges.push_back(std::move(e));
        }

        DisjointSet dsu(t == 1 ? d_ : d_ - t + 1);
        std::map<std::vector<int>, int> cur_sets;
        for (const VineEdge& e : tree_edges) {
            int na, nb;
            if (t == 1) {
                na = e.a - 1;
                nb = e.b - 1;
            } else {
                auto ia = prev_sets.find(with_element(e.conditioning, e.a));
                auto ib = prev_sets.find(with_element(e.conditioning, e.b));
                if (ia == prev_sets.end() || ib == prev_sets.end())
                    throw ProximityViolation("edge " + edge_label(e) +
                                             " has no matching pair of edges in tree " +
                                             std::to_string(t - 1));
                na = ia->second;
                nb = ib->second;
            }
            if (!dsu.unite(na, nb))
                throw ProximityViolation("tree " + std::to_string(t) + " contains a cycle at edge " +
                                         edge_label(e));
            std::vector<int> full = with_element(with_element(e.conditioning, e.a), e.b);
            cur_sets.emplace(std::move(full), static_cast<int>(cur_sets.size()));
        }
        prev_sets = std::move(cur_sets);
        for (const VineEdge& e : tree_edges) edges_.push_back(e);
    }
}

int RVineMatrix::at(int i, int j) const {
    if (i < 1 || i > d_ || j < 1 || j > d_) throw OutOfRange("RVineMatrix::at: index outside matrix");
    return m_[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)];
}

RVineMatrix default_structure(int d) {
    if (d < 1) throw DomainError("default_structure: dimension must be positive");
    std::vector<std::vector<int>> rows(static_cast<std::size_t>(d),
                                       std::vector<int>(static_cast<std::size_t>(d), 0));
    for (int i = 1; i <= d; ++i)
        for (int j = 1; j <= i; ++j)
            rows[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)] = d + 1 - i;
    return RVineMatrix(std::move(rows));
}

VineFit fit_vine(const CopulaData& data, const RVineMatrix& structure,
                 std::span<const FamilyTag> candidates, double alpha,
                 std::vector<std::string>* warnings) {
    const int d = structure.dim();
    if (static_cast<int>(data.values.cols()) != d)
        throw LengthMismatch("fit_vine: data has " + std::to_string(data.values.cols()) +
                             " columns, structure wants " + std::to_string(d));
    const std::size_t t_len = data.values.rows();
    if (t_len < static_cast<std::size_t>(20 * d))
        throw TooFewPoints("fit_vine: need at least 20*d observations");
    if (candidates.empty()) throw DomainError("fit_vine: empty candidate list");
    check_unit_matrix(data.values, "fit_vine");

    std::map<MarginKey, std::vector<double>> margins;
    for (int v = 1; v <= d; ++v)
        margins[{v, {}}] = data.values.column(static_cast<std::size_t>(v - 1));

    VineFit fit{VineModel{structure, {}, {}}, {}, 0.0};
    for (const VineEdge& e : structure.edges()) {
        const auto& za = margins.at({e.a, e.conditioning});
        const auto& zb = margins.at({e.b, e.conditioning});
        PairCopula pc;
        double ll = 0.0;
        try {
            pc = select_family(za, zb, candidates, alpha, warnings);
            ll = pair_loglik(pc, za, zb);
        } catch (const Error& err) {
            throw Error("fit_vine edge " + edge_label(e) + ": " + err.what());
        }

        std::vector<double> ha(t_len), hb(t_len);
        for (std::size_t k = 0; k < t_len; ++k) {
            ha[k] = h_function(pc, za[k], zb[k]);
            hb[k] = h_function2(pc, zb[k], za[k]);
        }
        margins[{e.a, with_element(e.conditioning, e.b)}] = std::move(ha);
        margins[{e.b, with_element(e.conditioning, e.a)}] = std::move(hb);

        fit.model.copulas.push_back(std::move(pc));
        fit.edge_loglik.push_back(ll);
        fit.total_loglik += ll;
    }
    return fit;
}

double vine_log_density(const VineModel& model, std::span<const double> point) {
    const int d = model.structure.dim();
    if (static_cast<int>(point.size()) != d)
        throw LengthMismatch("vine_density: point dimension mismatch");
    if (model.copulas.size() != model.structure.edges().size())
        throw LengthMismatch("vine_density: model has wrong number of pair copulas");
    for (double x : point)
        if (!(x > 0.0 && x < 1.0)) throw DomainError("vine_density: point outside (0,1)^d");

    std::map<MarginKey, double> margins;
    for (int v = 1; v <= d; ++v) margins[{v, {}}] = point[static_cast<std::size_t>(v - 1)];

    double logd = 0.0;
    const auto& edges = model.structure.edges();
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const VineEdge& e = edges[i];
        const PairCopula& pc = model.copulas[i];
        double za = margins.at({e.a, e.conditioning});
        double zb = margins.at({e.b, e.conditioning});
        logd += pair_log_density(pc, za, zb);
        margins[{e.a, with_element(e.conditioning, e.b)}] = h_function(pc, za, zb);
        margins[{e.b, with_element(e.conditioning, e.a)}] = h_function2(pc, zb, za);
    }
    return logd;
}

double vine_density(const VineModel& model, std::span<const double> point) {
    return std::exp(vine_log_density(model, point));
}

RosenblattData rosenblatt(const VineModel& model, const CopulaData& data) {
    const int d = model.structure.dim();
    if (static_cast<int>(data.values.cols()) != d)
        throw LengthMismatch("rosenblatt: data dimension mismatch");
    if (model.copulas.size() != model.structure.edges().size())
        throw LengthMismatch("rosenblatt: model has wrong number of pair copulas");
    check_unit_matrix(data.values, "rosenblatt");
    const std::size_t t_len = data.values.rows();

    std::map<MarginKey, std::vector<double>> margins;
    for (int v = 1; v <= d; ++v)
        margins[{v, {}}] = data.values.column(static_cast<std::size_t>(v - 1));

    const auto& edges = model.structure.edges();
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const VineEdge& e = edges[i];
        const PairCopula& pc = model.copulas[i];
        const auto& za = margins.at({e.a, e.conditioning});
        const auto& zb = margins.at({e.b, e.conditioning});
        std::vector<double> ha(t_len), hb(t_len);
        for (std::size_t k = 0; k < t_len; ++k) {
            ha[k] = h_function(pc, za[k], zb[k]);
            hb[k] = h_function2(pc, zb[k], za[k]);
        }
        margins[{e.a, with_element(e.conditioning, e.b)}] = std::move(ha);
        margins[{e.b, with_element(e.conditioning, e.a)}] = std::move(hb);
    }

    std::vector<std::vector<double>> out(static_cast<std::size_t>(d));
    for (int j = 1; j <= d; ++j) {
        int var = model.structure.diagonal(j);
        if (j == d) {
            out[static_cast<std::size_t>(var - 1)] = data.values.column(static_cast<std::size_t>(var - 1));
        } else {
            std::vector<int> below;
            for (int i = j + 1; i <= d; ++i) below.push_back(model.structure.at(i, j));
            std::sort(below.begin(), below.end());
            out[static_cast<std::size_t>(var - 1)] = margins.at({var, below});
        }
    }
    return RosenblattData{ColumnMatrix(std::move(out))};
}

CopulaData inverse_rosenblatt(const VineModel& model, const RosenblattData& data) {
    const int d = model.structure.dim();
    if (static_cast<int>(data.values.cols()) != d)
        throw LengthMismatch("inverse_rosenblatt: data dimension mismatch");
    if (model.copulas.size() != model.structure.edges().size())
        throw LengthMismatch("inverse_rosenblatt: model has wrong number of pair copulas");
    check_unit_matrix(data.values, "inverse_rosenblatt");
    const std::size_t t_len = data.values.rows();

    // Edge lookup by (tree, column).
    std::map<std::pair<int, int>, std::size_t> by_pos;
    const auto& edges = model.structure.edges();
    for (std::size_t i = 0; i < edges.size(); ++i) by_pos[{edges[i].tree, edges[i].column}] = i;

    std::vector<std::vector<double>> out(static_cast<std::size_t>(d),
                                         std::vector<double>(t_len, 0.0));
    for (std::size_t r = 0; r < t_len; ++r) {
        std::map<MarginKey, double> margins;
        for (int j = d; j >= 1; --j) {
            int var = model.structure.diagonal(j);
            double z = data.values.column(static_cast<std::size_t>(var - 1))[r];
            for (int t = d - j; t >= 1; --t) {
                const VineEdge& e = edges[by_pos.at({t, j})];
                const PairCopula& pc = model.copulas[by_pos.at({t, j})];
                double zb = margins.at({e.b, e.conditioning});
                z = h_inverse(pc, z, zb);
            }
            margins[{var, {}}] = z;
            out[static_cast<std::size_t>(var - 1)][r] = z;
            for (int t = 1; t <= d - j; ++t) {
                std::size_t i = by_pos.at({t, j});
                const VineEdge& e = edges[i];
                const PairCopula& pc = model.copulas[i];
                double za = margins.at({e.a, e.conditioning});
                double zb = margins.at({e.b, e.conditioning});
                margins[{e.a, with_element(e.conditioning, e.b)}] = h_function(pc, za, zb);
                margins[{e.b, with_element(e.conditioning, e.a)}] = h_function2(pc, zb, za);
            }
        }
    }
    return CopulaData{ColumnMatrix(std::move(out))};
}

CopulaData simulate_vine(const VineModel& model, std::size_t n, std::uint64_t seed) {
    const int d = model.structure.dim();
    std::mt19937_64 gen(seed);
    auto unif = [&gen]() { return (static_cast<double>(gen() >> 11) + 0.5) * 0x1.0p-53; };
    std::vector<std::vector<double>> w(static_cast<std::size_t>(d), std::vector<double>(n, 0.0));
    for (std::size_t r = 0; r < n; ++r)
        for (int v = 0; v < d; ++v) w[static_cast<std::size_t>(v)][r] = unif();
    return inverse_rosenblatt(model, RosenblattData{ColumnMatrix(std::move(w))});
}

}  // namespace sdi
