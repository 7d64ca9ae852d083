#ifndef PMCSENS_CORE_HPP
#define PMCSENS_CORE_HPP

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <string_view>

namespace pmcsens {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Index = Eigen::Index;

/// Absolute tolerance on the sum of a probability vector.
inline constexpr double kStochasticTolerance = 1e-12;

/// Hard bound on the fixed-point residual of a reachability solution.
inline constexpr double kResidualTolerance = 1e-10;

enum class ErrorCode {
    // model validation
    RowNotStochastic,
    NegativeEntry,
    ArityMismatch,
    DuplicateParameterId,
    RowMissing,
    RowConflict,
    InvalidSupport,
    // model use
    MissingParameter,
    UnknownParameter,
    DomainError,
    // reachability
    EmptyDestination,
    IndexOutOfRange,
    SingularSystem,
    NonConvergence,
    // perturbation
    EmptyVector,
    DirectionMismatch,
    WeightsNotNormalized,
    NonpositiveDelta,
    // sampler
    SimplexViolation,
    BadIndices,
    InfeasibleDistance,
    // io
    SyntaxError,
    SchemaError,
    ValidationError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// True for failures of the numerical machinery rather than of the input.
constexpr bool is_numerical_failure(ErrorCode code) noexcept
{
    return code == ErrorCode::SingularSystem || code == ErrorCode::NonConvergence;
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace pmcsens

#endif // PMCSENS_CORE_HPP
