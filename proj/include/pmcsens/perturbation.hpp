#ifndef PMCSENS_PERTURBATION_HPP
#define PMCSENS_PERTURBATION_HPP

#include "pmcsens/core.hpp"
#include "pmcsens/model.hpp"
#include "pmcsens/reachability.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pmcsens {

struct ParameterGradient {
    std::string id;
    Eigen::VectorXd reference;
    /// Coefficients of the linear approximation, one per support column.
    Eigen::VectorXd h;
};

/// Linear approximation of the perturbation function at the references.
struct GradientSet {
    std::vector<ParameterGradient> parameters;
    /// Initial mass restricted to the constraint block times the fundamental matrix.
    Eigen::VectorXd s;
    /// Fundamental matrix times b: the reachability solution at the references.
    Eigen::VectorXd t;

    const ParameterGradient& at(std::string_view id) const;
    std::vector<std::string> ids() const;
};

/// Weights splitting a perturbation budget across parameters; they sum to 1.
struct Direction {
    std::map<std::string, double> weights;

    static Direction uniform(const std::vector<std::string>& ids);
    static Direction concentrated(const std::vector<std::string>& ids, const std::string& id);
    /// Weights proportional to the given per-parameter distances.
    static Direction proportional(const std::map<std::string, double>& deltas);
};

/// Throws DirectionMismatch unless `w` covers exactly `ids`, WeightsNotNormalized
/// unless the weights lie in [0,1] and sum to 1.
void validate_direction(const Direction& w, const std::vector<std::string>& ids);

/// h for every parameter. A variable landing on constraint column c gets
/// s[row] * t[c], one summed into b gets s[row], dropped ones get 0.
GradientSet gradient_coefficients(const Pmc& pmc, const CanonicalProblem& cp);

/// Half the spread of h.
template <typename Derived>
typename Derived::Scalar condition_number_basic(const Eigen::MatrixBase<Derived>& h)
{
    if (h.size() == 0)
        throw Error(ErrorCode::EmptyVector, "condition number of an empty coefficient vector");
    using Scalar = typename Derived::Scalar;
    return Scalar(0.5) * (h.maxCoeff() - h.minCoeff());
}

double condition_number_directional(const GradientSet& g, const Direction& w);
double condition_number_parameterwise(const GradientSet& g, std::string_view id);

struct LinkIdentity {
    double lhs = 0.0;
    double rhs = 0.0;
    double discrepancy = 0.0;
};

/// Compares sum_i kappa_i * delta_i against kappa_w * sum_i delta_i with w(i) = delta_i / sum.
LinkIdentity link_identity_check(const GradientSet& g, const std::map<std::string, double>& deltas);

/// Change of the constraint-weighted reachability between the assignment and the
/// references, from two independent solves.
double perturbation_function_exact(const Pmc& pmc, const CanonicalProblem& cp, const Assignment& a,
                                   const SolveMethod& method = DirectSolve{});

/// sum_i h_i . (v_i - r_i). Parameters missing from `a` contribute 0.
double linear_estimate(const GradientSet& g, const Assignment& a);

/// Positions of the largest and smallest entries of h, lowest index on ties.
struct ExtremalPair {
    Index up = 0;
    Index down = 0;
};

ExtremalPair extremal_indices(const Eigen::VectorXd& h);

struct SensitivityReport {
    double probability = 0.0;
    GradientSet gradients;
    /// Parameter-wise condition numbers, in parameter order.
    std::vector<double> kappa;
    Direction direction;
    double kappa_w = 0.0;
    double kappa_sum = 0.0;
    ReachabilityProblem problem;
    std::string model_hash;
};

/// Referential probability with all condition numbers. Uses the uniform
/// direction when none is given.
SensitivityReport analyze_sensitivity(const Pmc& pmc, const ReachabilityProblem& problem,
                                      const std::optional<Direction>& direction = std::nullopt,
                                      const SolveMethod& method = DirectSolve{});

} // namespace pmcsens

#endif // PMCSENS_PERTURBATION_HPP
