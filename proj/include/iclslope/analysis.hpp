#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "iclslope/backend.hpp"
#include "iclslope/core.hpp"

namespace iclslope::analysis {

inline constexpr double kDefaultThreshold = 0.2;

enum class Classification { effective, ineffective };

/// theorem_consistent regresses learning gain (y) on contextual relevance (x).
/// eq3_as_printed regresses relevance on gain, i.e. divides by the spread of t.
enum class Orientation { theorem_consistent, eq3_as_printed };

std::string_view to_string(Classification c);
std::string_view to_string(Orientation o);
Orientation orientation_from_string(std::string_view name);

struct FitResult {
    double slope = 0.0;  // the LCS
    double intercept = 0.0;
    double pearson = 0.0;
    std::size_t n_points = 0;
    Classification classification = Classification::ineffective;
    double threshold = kDefaultThreshold;
    Orientation orientation = Orientation::theorem_consistent;
};

struct Diagnostics {
    double mean_p_d_q = 0.0;  // contextual alignment
    double mean_p_x_q = 0.0;  // output calibration
    std::size_t n = 0;
};

/// Thrown when any of the four scoring calls for a pair fails.
class ScoringFailure : public Error {
public:
    ScoringFailure(std::string instance_id, std::string demo_id, const std::string& what, bool retryable);

    const std::string& instance_id() const noexcept { return instance_id_; }
    const std::string& demo_id() const noexcept { return demo_id_; }
    bool retryable() const noexcept { return retryable_; }

private:
    std::string instance_id_;
    std::string demo_id_;
    bool retryable_;
};

// ---------------------------------------------------------------------------
// Prompt layout
// ---------------------------------------------------------------------------

/// Scored output text: the reasoning (when present) then the answer.
std::string output_text(const TaskInstance& instance, const TemplateSpec& spec);

/// A demonstration as it appears in context: its question then its output.
std::string demo_text(const Demonstration& demo, const TemplateSpec& spec);

/// p̂(X|Q): condition Q, target X.
ScoringRequest output_given_question(std::string_view question, std::string_view output,
                                     const TemplateSpec& spec);
/// p̂(X|Q;D): condition Q then D, target X.
ScoringRequest output_given_question_demo(std::string_view question, std::string_view output,
                                          const Demonstration& demo, const TemplateSpec& spec);
/// p̂(D|Q): condition Q, target D.
ScoringRequest demo_given_question(std::string_view question, const Demonstration& demo,
                                   const TemplateSpec& spec);
/// p̂(D|Q;X): condition Q then X, target D.
ScoringRequest demo_given_question_output(std::string_view question, std::string_view output,
                                          const Demonstration& demo, const TemplateSpec& spec);

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// One point per demonstration. p̂(X|Q) is scored once and shared.
std::vector<ScoredPoint> score_instance(const TaskInstance& instance, const std::vector<Demonstration>& demos,
                                        const Backend& backend, const TemplateSpec& spec);

struct InstanceWithDemos {
    TaskInstance instance;
    std::vector<Demonstration> demos;
};

/// score_instance over many instances, fanned out over `jobs` threads. A k-shot
/// instance contributes k points. Any failure aborts the whole batch.
std::vector<ScoredPoint> score_all(const std::vector<InstanceWithDemos>& batch, const Backend& backend,
                                   const TemplateSpec& spec, std::size_t jobs = 1);

/// Canonical (instance_id, demo_id, s, t) order used for every aggregate.
void sort_points(std::vector<ScoredPoint>& points);

Classification classify(double slope, double threshold = kDefaultThreshold);

/// Least-squares line through the points. Throws DegenerateFit when there are
/// fewer than two points or the regressor has zero variance. Pearson is 0
/// when the response has zero variance.
FitResult fit_lcs(std::vector<ScoredPoint> points, double threshold = kDefaultThreshold,
                  Orientation orientation = Orientation::theorem_consistent);

/// Points whose model answer was wrong under ICL. Throws MissingCorrectness
/// if any point lacks the flag.
std::vector<ScoredPoint> filter_bad_cases(const std::vector<ScoredPoint>& points);

/// Means of p̂(D|Q) and p̂(X|Q) over the points. Throws InvalidInput when empty.
Diagnostics diagnostics(std::vector<ScoredPoint> points);

/// Equality after trimming, case folding, whitespace collapsing and, when both
/// sides parse as numbers, numeric comparison.
bool exact_match(std::string_view prediction, std::string_view reference);

}  // namespace iclslope::analysis
