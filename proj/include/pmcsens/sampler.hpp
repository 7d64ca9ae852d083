#ifndef PMCSENS_SAMPLER_HPP
#define PMCSENS_SAMPLER_HPP

#include "pmcsens/core.hpp"
#include "pmcsens/model.hpp"
#include "pmcsens/perturbation.hpp"
#include "pmcsens/reachability.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace pmcsens {

using Rng = std::mt19937_64;

/// Generator for one sample, derived from (seed, index) only.
Rng sample_rng(std::uint64_t seed, std::uint64_t index);

/// Uniform double in [0, 1) built from the top 53 bits of one draw.
double uniform01(Rng& rng);

/// r + delta * e_{up,down}: +delta/2 at `up`, -delta/2 at `down`.
Eigen::VectorXd extremal_perturbation(const Eigen::VectorXd& r, double delta, Index up, Index down);

/// Random point of the simplex at total variation distance `delta` from r.
///
/// The support is split into a raising and a lowering side at random, delta/2
/// is spread over each side with random weights, and the lowering side is
/// water-filled so no entry drops below zero. The distance equals delta unless
/// the lowering side holds less than delta/2 mass, in which case it is smaller.
Eigen::VectorXd sample_on_simplex(const Eigen::VectorXd& r, double delta, Rng& rng);

struct PerturbationSample {
    Assignment assignment;
    std::map<std::string, double> distances;
    double distance = 0.0;
    double exact = 0.0;
    double linear = 0.0;
    /// sum_i kappa_i * distance_i; the predicted range is [-bound, bound].
    double bound = 0.0;
    bool violation = false;
    bool beyond_slack = false;
};

struct ValidationOptions {
    /// Relative excess over the bound that is reported but tolerated.
    double slack = 0.05;
    unsigned threads = 1;
    SolveMethod method = DirectSolve{};
};

struct ValidationReport {
    std::vector<PerturbationSample> samples;
    std::size_t violations = 0;
    std::size_t beyond_slack = 0;
    /// Largest |exact| - bound over violating samples.
    double max_violation = 0.0;
    /// Largest |exact| / distance over all samples.
    double empirical_kappa = 0.0;
    double kappa_sum = 0.0;
    /// Directional condition number for w(i) = delta_i / sum of deltas.
    double kappa_w = 0.0;
    std::uint64_t seed = 0;
    double slack = 0.05;
};

PerturbationSample evaluate_assignment(const Pmc& pmc, const CanonicalProblem& cp, const GradientSet& g,
                                       const Assignment& a, const ValidationOptions& options = {});

/// Samples every parameter at its own distance and compares exact deltas with
/// the bound. Violations are counted, never thrown.
ValidationReport validate_bounds(const Pmc& pmc, const CanonicalProblem& cp,
                                 const std::map<std::string, double>& deltas, std::size_t samples,
                                 std::uint64_t seed, const ValidationOptions& options = {});

/// Same report for a fixed list of assignments.
ValidationReport validate_assignments(const Pmc& pmc, const CanonicalProblem& cp,
                                      const std::vector<Assignment>& assignments,
                                      const ValidationOptions& options = {});

/// Largest |rho| / distance over random perturbations of total size delta split
/// along `direction` (uniform by default), plus the two extremal perturbations.
double empirical_kappa(const Pmc& pmc, const CanonicalProblem& cp, double delta, std::size_t samples,
                       std::uint64_t seed, const std::optional<Direction>& direction = std::nullopt,
                       unsigned threads = 1);

} // namespace pmcsens

#endif // PMCSENS_SAMPLER_HPP
