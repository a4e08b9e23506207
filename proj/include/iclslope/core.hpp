#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace iclslope {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller passed a value outside an operation's domain.
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// A conditional probability was requested on a zero-mass event.
class DegenerateConditioning : public Error {
public:
    using Error::Error;
};

/// Least-squares fit is undefined (too few points or no spread on the x axis).
class DegenerateFit : public Error {
public:
    using Error::Error;
};

/// An analysis needed a correctness flag that the data does not carry.
class MissingCorrectness : public Error {
public:
    using Error::Error;
};

/// The backend cannot perform the requested kind of call (e.g. generation).
class CapabilityError : public Error {
public:
    using Error::Error;
};

/// Scoring or generation failed inside a backend. `retryable()` distinguishes
/// transport-level failures (timeouts, 5xx) from rejected requests.
class BackendError : public Error {
public:
    BackendError(std::string message, bool retryable, std::string request_id = {})
        : Error(request_id.empty() ? message : message + " [request " + request_id + "]"),
          retryable_(retryable),
          request_id_(std::move(request_id)) {}

    bool retryable() const noexcept { return retryable_; }
    const std::string& request_id() const noexcept { return request_id_; }

private:
    bool retryable_;
    std::string request_id_;
};

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

enum class Origin { labeled, synthetic, paraphrased };

std::string_view to_string(Origin origin);
Origin origin_from_string(std::string_view name);

struct TaskInstance {
    std::string id;
    std::string question;
    std::string reference_output;
    std::optional<std::string> reasoning;
    /// Reasoning as it was before paraphrasing, kept for provenance.
    std::optional<std::string> original_reasoning;
    std::optional<bool> correctness_1shot;
    std::optional<bool> correctness_0shot;
    std::optional<std::vector<double>> embedding;
};

/// Throws InvalidInput when question or reference output is empty.
void validate(const TaskInstance& instance);

struct Demonstration {
    std::string id;
    std::string question;
    std::string output;
    Origin origin = Origin::labeled;
    std::optional<std::vector<double>> embedding;
};

void validate(const Demonstration& demo);

/// Length-normalized sequence likelihood: the geometric mean of the per-token
/// probabilities, exp(sum_logprob / token_count).
class NormalizedLikelihood {
public:
    static NormalizedLikelihood from_logprobs(std::span<const double> token_logprobs);
    static NormalizedLikelihood from_sum(double sum_logprob, std::size_t token_count);
    /// A single-symbol likelihood; used where a whole sequence is one atom.
    static NormalizedLikelihood from_value(double value);

    double value() const noexcept { return value_; }
    std::size_t token_count() const noexcept { return token_count_; }
    double sum_logprob() const noexcept { return sum_logprob_; }

    friend bool operator==(const NormalizedLikelihood&, const NormalizedLikelihood&) = default;

private:
    NormalizedLikelihood(double value, std::size_t count, double sum)
        : value_(value), token_count_(count), sum_logprob_(sum) {}

    double value_;
    std::size_t token_count_;
    double sum_logprob_;
};

/// The four conditional likelihoods measured for one (instance, demonstration) pair.
struct LikelihoodProfile {
    NormalizedLikelihood p_x_q;   // p̂(X|Q)
    NormalizedLikelihood p_x_qd;  // p̂(X|Q;D)
    NormalizedLikelihood p_d_q;   // p̂(D|Q)
    NormalizedLikelihood p_d_qx;  // p̂(D|Q;X)
};

struct ScoredPoint {
    std::string instance_id;
    std::string demo_id;
    double s = 0.0;  // contextual relevance
    double t = 0.0;  // learning gain
    LikelihoodProfile profile;
    std::optional<bool> correctness_1shot;
};

/// Builds a point whose s and t are the exact differences of the profile values.
ScoredPoint make_point(std::string instance_id, std::string demo_id,
                       const LikelihoodProfile& profile,
                       std::optional<bool> correctness_1shot = std::nullopt);

// ---------------------------------------------------------------------------
// Information measures
// ---------------------------------------------------------------------------

/// p(X|Q;D) - p(X|Q). Negative when the demonstration hurts.
double contextual_relevance(double p_x_qd, double p_x_q);

/// p(D|Q;X) - p(D|Q).
double learning_gain(double p_d_qx, double p_d_q);

/// Negative log-likelihood of the zero-shot output, -ln p(X|Q).
double zero_shot_loss(double p_x_q);

}  // namespace iclslope
