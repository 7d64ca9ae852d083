#ifndef PMCSENS_MODEL_HPP
#define PMCSENS_MODEL_HPP

#include "pmcsens/core.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace pmcsens {

// State indices are 0-based throughout the C++ API. File formats, the CLI and
// diagnostic messages use 1-based indices.

/// A vector variable occupying the non-zero positions of one transition row.
struct DistributionParameter {
    std::string id;
    Index row = 0;
    /// Strictly increasing columns holding the variables.
    std::vector<Index> support;
    /// Idealized distribution, one entry per support column.
    Eigen::VectorXd reference;

    Index arity() const noexcept { return static_cast<Index>(support.size()); }
};

/// Initial distribution, concrete rows and distribution parameters.
/// At most one parameter per row; every row is either concrete or parameterized.
struct Pmc {
    Index n = 0;
    Eigen::VectorXd initial;
    std::map<Index, Eigen::VectorXd> concrete_rows;
    std::vector<DistributionParameter> parameters;

    const DistributionParameter* find_parameter(std::string_view id) const;
    std::vector<std::string> parameter_ids() const;
};

/// Concrete distributions for the parameters of a Pmc, keyed by parameter id.
struct Assignment {
    std::map<std::string, Eigen::VectorXd> values;

    /// Copy with the vector for `id` replaced.
    Assignment with(const std::string& id, Eigen::VectorXd value) const;
};

struct ConcreteChain {
    Eigen::VectorXd initial;
    Eigen::MatrixXd transition;
};

struct Violation {
    ErrorCode code;
    /// 0-based row of the offending transition row, if applicable.
    std::optional<Index> row;
    /// 0-based entry within that row or vector, if applicable.
    std::optional<Index> entry;
    std::string message;
};

struct ValidationResult {
    std::vector<Violation> violations;

    bool ok() const noexcept { return violations.empty(); }
    std::string summary() const;
};

ValidationResult validate_pmc(const Pmc& pmc);

/// Throws Error(ValidationError) carrying the violation summary if the model is invalid.
void require_valid(const Pmc& pmc);

/// Assignment mapping every parameter to its reference.
Assignment references(const Pmc& pmc);

/// Checks coverage, arity and simplex membership; throws on the first failure.
void validate_assignment(const Pmc& pmc, const Assignment& a);

ConcreteChain instantiate(const Pmc& pmc, const Assignment& a);

/// Total variation distance: sum of absolute entry-wise differences.
template <typename DerivedU, typename DerivedV>
typename DerivedU::Scalar absolute_distance(const Eigen::MatrixBase<DerivedU>& u,
                                            const Eigen::MatrixBase<DerivedV>& v)
{
    if (u.size() != v.size())
        throw Error(ErrorCode::ArityMismatch,
                    "vectors of length " + std::to_string(u.size()) + " and " +
                        std::to_string(v.size()));
    return (u - v).cwiseAbs().sum();
}

/// True when entries are >= 0 and sum to 1 within kStochasticTolerance.
bool is_probability_vector(const Eigen::Ref<const Eigen::VectorXd>& v);

struct ReachabilityProblem {
    std::vector<Index> constraint;
    std::vector<Index> destination;
};

/// Hopping frog: four rocks, row 1 parameterized, problem {1,2} U {4}.
std::pair<Pmc, ReachabilityProblem> build_frog();

/// Noisy Zeroconf with four probes. Parameter x_i sits on row i+1 with support
/// (1, i+2); its reference is (1 - loss_ref, loss_ref). Problem {1..5} U {7}.
std::pair<Pmc, ReachabilityProblem> build_zeroconf(double collision = 0.2, double loss_ref = 0.25);

} // namespace pmcsens

#endif // PMCSENS_MODEL_HPP
