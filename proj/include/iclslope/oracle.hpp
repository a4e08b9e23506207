#pragma once

// Exact finite-distribution laboratory. A DiscreteWorld is a joint table over
// (question, output, demonstration) symbols; every conditional is computed by
// summation, so the identities relating learning gain and contextual
// relevance can be checked to machine precision.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "iclslope/core.hpp"

namespace iclslope::oracle {

class DiscreteWorld {
public:
    /// `joint` is laid out row-major as [q][x][d]. Throws InvalidInput when the
    /// table is the wrong size, has a negative entry, or does not sum to 1.
    DiscreteWorld(std::vector<std::string> q_symbols, std::vector<std::string> x_symbols,
                  std::vector<std::string> d_symbols, std::vector<double> joint);

    std::size_t q_count() const noexcept { return q_symbols_.size(); }
    std::size_t x_count() const noexcept { return x_symbols_.size(); }
    std::size_t d_count() const noexcept { return d_symbols_.size(); }

    const std::vector<std::string>& q_symbols() const noexcept { return q_symbols_; }
    const std::vector<std::string>& x_symbols() const noexcept { return x_symbols_; }
    const std::vector<std::string>& d_symbols() const noexcept { return d_symbols_; }
    const std::vector<double>& joint() const noexcept { return joint_; }

    double at(std::size_t q, std::size_t x, std::size_t d) const {
        return joint_[(q * x_count() + x) * d_count() + d];
    }

    std::size_t d_index(const std::string& label) const;

private:
    std::vector<std::string> q_symbols_;
    std::vector<std::string> x_symbols_;
    std::vector<std::string> d_symbols_;
    std::vector<double> joint_;
};

/// A partial assignment of the three variables; unset coordinates are summed out.
struct Event {
    std::optional<std::size_t> q = std::nullopt;
    std::optional<std::size_t> x = std::nullopt;
    std::optional<std::size_t> d = std::nullopt;
};

double probability(const DiscreteWorld& world, const Event& event);

/// p(target | given). Throws DegenerateConditioning when p(given) = 0.
double conditional(const DiscreteWorld& world, const Event& target, const Event& given);

/// The four conditionals that enter s and t for a single (q, x, d) triple.
struct TripleConditionals {
    double p_x_q;
    double p_x_qd;
    double p_d_q;
    double p_d_qx;

    double relevance() const { return p_x_qd - p_x_q; }
    double gain() const { return p_d_qx - p_d_q; }
    double ratio() const { return p_d_q / p_x_q; }
};

/// Throws DegenerateConditioning when p(q,x) or p(q,d) is zero.
TripleConditionals triple_conditionals(const DiscreteWorld& world, std::size_t q, std::size_t x,
                                       std::size_t d);

// ---------------------------------------------------------------------------
// Verifiers
// ---------------------------------------------------------------------------

struct IdentityReport {
    double max_residual = 0.0;
    /// Largest |ln p(d|q,x) - ln p(d|q)| seen (zero for independent worlds).
    double max_abs_gain_term = 0.0;
    std::size_t checked = 0;
    std::size_t skipped = 0;
    double tolerance = 0.0;
    bool pass = true;
};

/// -ln p(x|q,d) = -ln p(x|q) - (ln p(d|q,x) - ln p(d|q)) for every triple with
/// positive mass; zero-mass triples are skipped.
IdentityReport verify_bayes_decomposition(const DiscreteWorld& world, double tolerance = 1e-10);

/// t = (p(d|q)/p(x|q)) * s for every triple with well-defined conditionals.
IdentityReport verify_theorem1(const DiscreteWorld& world, double tolerance = 1e-12);

enum class VerdictStatus { holds, violated, premise_failed };

std::string_view to_string(VerdictStatus status);

struct SyntheticRatioCheck {
    std::string q;
    std::string x_hat;   // argmax of the empirical predictor
    std::string x_star;  // argmax of the oracle predictor
    double hat_ratio = 0.0;   // p̂(d_hat|q) / p̂(x_hat|q)
    double star_ratio = 0.0;  // p̂(d_star|q) / p̂(x_star|q)
    VerdictStatus status = VerdictStatus::holds;
    std::string failed_premise;
};

struct SyntheticRatioReport {
    VerdictStatus status = VerdictStatus::holds;
    std::string failed_premise;
    std::vector<SyntheticRatioCheck> per_question;
};

/// Compares the synthetic-demonstration ratio with the real-demonstration
/// ratio. `empirical` plays p̂ and `oracle` plays p; both must share symbols.
/// Premises are checked per question before the inequality is asserted:
///   conditional_dominance: p̂(x|q,d_hat) <= p̂(x|q,d_star) for all x
///   marginal_dominance:    p̂(d_hat|q) <= p̂(d_star|q)
/// The second premise is what the summation step needs; it does not follow
/// from the first for normalized conditionals, so it is checked explicitly.
SyntheticRatioReport verify_theorem2(const DiscreteWorld& oracle, const DiscreteWorld& empirical,
                                     const std::string& d_hat, const std::string& d_star,
                                     double tolerance = 1e-12);

/// Single-predictor form: p̂ = p.
SyntheticRatioReport verify_theorem2(const DiscreteWorld& world, const std::string& d_hat,
                                     const std::string& d_star, double tolerance = 1e-12);

/// Additive errors of the empirical predictor, p̂(A|B) = p(A|B) + eps(A|B).
struct ConditionalErrors {
    double d_q = 0.0;   // eps(D|Q)
    double x_q = 0.0;   // eps(X|Q)
    double d_qx = 0.0;  // eps(D|Q;X)
    double x_qd = 0.0;  // eps(X|Q;D)

    bool all_zero() const { return d_q == 0.0 && x_q == 0.0 && d_qx == 0.0 && x_qd == 0.0; }
};

struct Perturbation {
    std::size_t q = 0;
    std::size_t x = 0;
    std::size_t d = 0;
    ConditionalErrors epsilon;
};

struct PerturbedWorld {
    DiscreteWorld base;
    std::vector<Perturbation> perturbations;
};

struct ErrorBoundCheck {
    std::size_t q = 0, x = 0, d = 0;
    double true_ratio = 0.0;  // r_p = p(d|q)/p(x|q)
    double delta_slope = 0.0;  // closed-form error of the increment ratio
    double delta_ratio = 0.0;  // closed-form error of p̂(d|q)/p̂(x|q)
    /// Directly evaluated (definition-based) errors, reported for comparison.
    double direct_delta_slope = 0.0;
    double direct_delta_ratio = 0.0;
    VerdictStatus status = VerdictStatus::holds;
    std::string failed_premise;
};

struct ErrorBoundReport {
    VerdictStatus status = VerdictStatus::holds;
    std::size_t accepted = 0;
    std::size_t premise_failures = 0;
    std::vector<ErrorBoundCheck> checks;
};

/// Checks that the slope built from perturbed increments is no further from
/// the true ratio than the perturbed ratio itself. Premises, checked per
/// perturbation in this order:
///   valid_conditionals  perturbed values stay in (0, 1]
///   positive_relevance  0 < I_p(X|D;Q) <= p(X|D;Q) and I_p + eps(X|Q;D) > 0
///   positive_error_rate eps(X|Q) > 0 and eps(X|Q;D) > 0 (unless all eps are 0)
///   error_rate_chain    r_p >= eps(D|Q)/eps(X|Q) >= eps(D|Q;X)/eps(X|Q;D)
ErrorBoundReport verify_error_bound(const PerturbedWorld& pw, double tolerance = 1e-12);

/// The premises above, without evaluating the bound. Empty string = all hold.
std::string first_failed_error_premise(const DiscreteWorld& world, const Perturbation& p);

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

/// Portable 64-bit generator: mt19937_64 with a fixed uniform conversion, so
/// the same seed gives the same stream on every standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed);
    double uniform();  // [0, 1)
    std::size_t index(std::size_t n);
    std::size_t categorical(const std::vector<double>& weights);
    std::vector<double> dirichlet_ones(std::size_t n);

private:
    std::mt19937_64 engine_;
};

/// Dirichlet(1,...,1) joint of the given shape, symbols q0.., x0.., d0...
DiscreteWorld random_world(Rng& rng, std::size_t nq, std::size_t nx, std::size_t nd);

/// Random world with shape drawn uniformly from [1..max]x[2..max]x[2..max].
DiscreteWorld random_world(Rng& rng, std::size_t max_side = 4);

/// Draws n i.i.d. triples from the joint and scores each with exact conditionals.
/// Throws InvalidInput when n < 2.
std::vector<ScoredPoint> sample_points(const DiscreteWorld& world, std::size_t n, std::uint64_t seed);

/// A world where p(x|q) = 1/nx and p(d|q) = 1/nd for every q, so the ratio
/// p(d|q)/p(x|q) is the constant nx/nd, while the joint within each q is uneven.
DiscreteWorld constant_ratio_world(std::size_t nq, std::size_t nx, std::size_t nd, Rng& rng);

/// Builds a (oracle, empirical) pair that satisfies both premises of
/// verify_theorem2 for d_hat = "d0", d_star = "d1".
struct Theorem2Case {
    DiscreteWorld oracle;
    DiscreteWorld empirical;
    std::string d_hat;
    std::string d_star;
};
Theorem2Case premise_satisfying_case(Rng& rng, std::size_t max_side = 4);

/// Draws perturbations until one satisfies every premise, up to `max_attempts`.
std::optional<PerturbedWorld> sample_premise_satisfying_perturbation(Rng& rng,
                                                                     std::size_t max_attempts = 100000);

}  // namespace iclslope::oracle
