#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sdi/errors.hpp"

namespace sdi {

enum class Family { Independence, Gaussian, StudentT, Clayton, Gumbel, Frank, Joe };

/// A copula family together with a counter-clockwise rotation in degrees.
/// Rotations are only meaningful (and only allowed) for the asymmetric
/// Archimedean families Clayton, Gumbel and Joe.
struct FamilyTag {
    Family family = Family::Independence;
    int rotation = 0;

    friend bool operator==(const FamilyTag&, const FamilyTag&) = default;
};

std::string to_string(Family f);
std::string to_string(const FamilyTag& tag);
FamilyTag parse_family_tag(const std::string& text);

/// Throws DomainError unless the rotation is one of 0/90/180/270 and only
/// nonzero for Clayton, Gumbel or Joe.
void validate_tag(const FamilyTag& tag);

/// Number of free parameters of the family.
int parameter_count(Family f);

/// A parametric bivariate copula. Parameter layout: Gaussian {rho},
/// StudentT {rho, nu}, Clayton/Gumbel/Frank/Joe {theta}, Independence {}.
struct PairCopula {
    FamilyTag tag;
    std::vector<double> parameters;
};

/// Validates the tag and the parameter domain, then returns the copula.
PairCopula make_pair_copula(FamilyTag tag, std::vector<double> parameters);

/// Copula density c(u, v). Inputs must lie in (0,1); values are clamped to
/// [1e-10, 1-1e-10] before evaluation.
double pair_density(const PairCopula& c, double u, double v);
double pair_log_density(const PairCopula& c, double u, double v);

/// h-function h1(u|v) = dC(u,v)/dv: conditional distribution of the first
/// argument given the second.
double h_function(const PairCopula& c, double u, double v);

/// h2(v|u) = dC(u,v)/du: conditional distribution of the second argument
/// given the first.
double h_function2(const PairCopula& c, double v, double u);

/// Inverse of h_function in its first argument: u with h1(u|v) = w.
double h_inverse(const PairCopula& c, double w, double v);

/// Inverse of h_function2 in its first argument: v with h2(v|u) = w.
double h_inverse2(const PairCopula& c, double w, double u);

/// Log-likelihood of the sample under the copula.
double pair_loglik(const PairCopula& c, std::span<const double> u, std::span<const double> v);

/// Model Kendall tau of the copula (closed form where available, numeric
/// quadrature for Frank and Joe).
double kendall_tau(const PairCopula& c);

/// Sample Kendall tau-b with tie correction, O(n log n).
double empirical_kendall_tau(std::span<const double> x, std::span<const double> y);

struct IndependenceTest {
    double statistic = 0.0;
    double p_value = 1.0;
    bool independent = true;
};

/// Asymptotic Kendall-tau test of pairwise independence.
IndependenceTest independence_test(std::span<const double> u, std::span<const double> v,
                                   double alpha = 0.05);

struct FitResult {
    PairCopula copula;
    double loglik = 0.0;
    std::size_t n = 0;
    /// True when the estimate was clipped at the numerical parameter domain
    /// boundary; diagnostic, not an error.
    bool at_boundary = false;
};

/// Maximum likelihood fit of the given family/rotation to a copula-scale
/// sample. Requires n >= 20. A Frank fit with |theta| < 1e-4 collapses to
/// the Independence copula.
FitResult fit_mle(FamilyTag tag, std::span<const double> u, std::span<const double> v);

/// Default candidate set: all seven families with Clayton/Gumbel/Joe in all
/// four rotations (16 tags).
std::vector<FamilyTag> default_candidates();

/// Fits every candidate and returns the BIC-minimizing copula. When
/// alpha > 0 an independence pre-test short-circuits to the Independence
/// copula. Ties prefer fewer parameters, then candidate order. Candidates
/// whose fit fails are skipped (recorded in `warnings` when given).
PairCopula select_family(std::span<const double> u, std::span<const double> v,
                         std::span<const FamilyTag> candidates, double alpha = 0.05,
                         std::vector<std::string>* warnings = nullptr);

/// Draws n (u,v) pairs by conditional inversion. Deterministic across
/// platforms for a fixed seed.
std::pair<std::vector<double>, std::vector<double>> simulate_pair(const PairCopula& c,
                                                                  std::size_t n,
                                                                  std::uint64_t seed);

}  // namespace sdi
