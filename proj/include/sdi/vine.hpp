#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "sdi/copula.hpp"
#include "sdi/core.hpp"

namespace sdi {

/// One pair-copula edge of a regular vine: variables (a, b) conditioned on
/// the set D. `tree` is 1-based, `column` is the 1-based structure-matrix
/// column the edge belongs to.
struct VineEdge {
    int tree = 0;
    int column = 0;
    int a = 0;                    // diagonal (conditioned) variable
    int b = 0;                    // partner (conditioned) variable
    std::vector<int> conditioning;  // sorted
};

/// Lower-triangular regular-vine structure matrix over variables 1..d.
/// Column j (1-based) encodes the edges (m_jj, m_{d-t+1,j} | m_{d-t+2..d,j})
/// for trees t = 1..d-j. Construction validates the diagonal, the label
/// placement and the proximity condition by reconstructing every tree.
class RVineMatrix {
public:
    /// `rows` is a d x d matrix, row-major; entries above the diagonal must
    /// be zero.
    explicit RVineMatrix(std::vector<std::vector<int>> rows);

    [[nodiscard]] int dim() const { return d_; }
    [[nodiscard]] int at(int i, int j) const;  // 1-based
    [[nodiscard]] const std::vector<std::vector<int>>& rows() const { return m_; }
    /// All edges, trees ascending then columns ascending.
    [[nodiscard]] const std::vector<VineEdge>& edges() const { return edges_; }
    [[nodiscard]] int diagonal(int j) const { return at(j, j); }

    friend bool operator==(const RVineMatrix& a, const RVineMatrix& b) { return a.m_ == b.m_; }

private:
    int d_ = 0;
    std::vector<std::vector<int>> m_;
    std::vector<VineEdge> edges_;
};

/// Canonical C-vine structure rooted at variable 1: m_ij = d+1-i.
RVineMatrix default_structure(int d);

/// A fitted (or constructed) regular-vine copula model.
struct VineModel {
    RVineMatrix structure;
    /// One copula per edge, aligned with structure.edges().
    std::vector<PairCopula> copulas;
    std::vector<std::string> variable_names;  // optional, size d or empty
};

struct VineFit {
    VineModel model;
    std::vector<double> edge_loglik;  // aligned with structure.edges()
    double total_loglik = 0.0;
};

/// Sequential tree-by-tree fit: every edge family is chosen by select_family
/// on the conditional margins implied by the lower trees.
VineFit fit_vine(const CopulaData& data, const RVineMatrix& structure,
                 std::span<const FamilyTag> candidates, double alpha = 0.05,
                 std::vector<std::string>* warnings = nullptr);

/// Vine copula density at one point of (0,1)^d.
double vine_density(const VineModel& model, std::span<const double> point);
double vine_log_density(const VineModel& model, std::span<const double> point);

/// Rosenblatt transform of copula-scale data through the vine: output column
/// for variable m_jj is the conditional margin of m_jj given the variables
/// below it in column j. Under the fitted model the result is iid uniform
/// with independent columns.
RosenblattData rosenblatt(const VineModel& model, const CopulaData& data);

/// Inverse of `rosenblatt`; maps independent uniforms to copula-scale data
/// distributed according to the model.
CopulaData inverse_rosenblatt(const VineModel& model, const RosenblattData& data);

/// Samples n points from the vine by inverse Rosenblatt of pseudo-random
/// uniforms. Deterministic for a fixed seed.
CopulaData simulate_vine(const VineModel& model, std::size_t n, std::uint64_t seed);

}  // namespace sdi
