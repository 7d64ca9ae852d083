#ifndef PMCSENS_REACHABILITY_HPP
#define PMCSENS_REACHABILITY_HPP

#include "pmcsens/core.hpp"
#include "pmcsens/model.hpp"

#include <cmath>
#include <deque>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace pmcsens {

/// A state ordering with constraint states first and destination states last.
/// Within each block states keep ascending original order; states in neither
/// set sit between the two blocks.
struct CanonicalProblem {
    Index n = 0;
    /// order[k] is the original state at canonical position k.
    std::vector<Index> order;
    /// position[s] is the canonical position of original state s.
    std::vector<Index> position;
    Index n_constraint = 0;
    Index first_destination = 0;

    std::vector<Index> constraint_states() const;
    std::vector<Index> destination_states() const;
    bool is_constraint(Index state) const { return position[state] < n_constraint; }
    bool is_destination(Index state) const { return position[state] >= first_destination; }
};

CanonicalProblem canonicalize(const Pmc& pmc, const ReachabilityProblem& problem);
CanonicalProblem canonicalize(Index n, const ReachabilityProblem& problem);

enum class Role { ConstraintColumn, DestinationSum, Dropped };

struct VariablePlacement {
    Role role = Role::Dropped;
    /// Canonical constraint column; meaningful for Role::ConstraintColumn only.
    Index column = 0;

    friend bool operator==(const VariablePlacement&, const VariablePlacement&) = default;
};

/// Where the variables of one parameter land in (A, b). `row` is empty and
/// `variables` is empty when the parameter's row is not a constraint state.
struct ParameterPlacement {
    std::string id;
    std::optional<Index> row;
    std::vector<VariablePlacement> variables;
};

/// p = A p + b restricted to the constraint block, in canonical order.
template <typename Scalar>
struct BasicLinearSystem {
    Matrix<Scalar> A;
    Vector<Scalar> b;
    /// Probability of leaving the constraint block in one step (b plus dropped mass).
    Vector<Scalar> escape;
    std::vector<ParameterPlacement> placement;

    Index size() const { return b.size(); }

    template <typename Other>
    BasicLinearSystem<Other> cast() const
    {
        return {A.template cast<Other>(), b.template cast<Other>(), escape.template cast<Other>(),
                placement};
    }
};

using LinearSystem = BasicLinearSystem<double>;

/// System at the references, with parametric placements.
LinearSystem extract_system(const Pmc& pmc, const CanonicalProblem& cp);

/// System of a concrete chain; placements are empty.
LinearSystem concrete_system(const ConcreteChain& chain, const CanonicalProblem& cp);

struct DirectSolve {};

struct SeriesSolve {
    long truncation = 100;
    double tolerance = kResidualTolerance;
};

using SolveMethod = std::variant<DirectSolve, SeriesSolve>;

template <typename Scalar>
struct SeriesResult {
    Vector<Scalar> p;
    /// Infinity norm of the first omitted term, which equals the fixed-point residual.
    Scalar residual;
};

// Builds the predecessor lists of the graph with an edge i -> j iff A(i,j) > 0.
template <typename Scalar>
std::vector<std::vector<Index>> predecessors(const Matrix<Scalar>& A)
{
    std::vector<std::vector<Index>> pred(static_cast<std::size_t>(A.rows()));
    for (Index i = 0; i < A.rows(); ++i)
        for (Index j = 0; j < A.cols(); ++j)
            if (A(i, j) > Scalar(0))
                pred[static_cast<std::size_t>(j)].push_back(i);
    return pred;
}

// Marks every state that reaches a seed state along positive entries of A.
template <typename Scalar>
std::vector<bool> backward_closure(const Matrix<Scalar>& A, const Vector<Scalar>& seeds)
{
    const auto pred = predecessors(A);
    std::vector<bool> mark(static_cast<std::size_t>(seeds.size()), false);
    std::deque<Index> queue;
    for (Index i = 0; i < seeds.size(); ++i)
        if (seeds[i] > Scalar(0)) {
            mark[static_cast<std::size_t>(i)] = true;
            queue.push_back(i);
        }
    while (!queue.empty()) {
        const Index j = queue.front();
        queue.pop_front();
        for (Index i : pred[static_cast<std::size_t>(j)])
            if (!mark[static_cast<std::size_t>(i)]) {
                mark[static_cast<std::size_t>(i)] = true;
                queue.push_back(i);
            }
    }
    return mark;
}

/// Constraint states with positive probability of reaching the destination.
template <typename Scalar>
std::vector<bool> reach_positive_states(const BasicLinearSystem<Scalar>& sys)
{
    return backward_closure(sys.A, sys.b);
}

/// Constraint states that leave the constraint block with positive probability.
/// On this set I - A is non-singular; the remaining states are trapped forever.
template <typename Scalar>
std::vector<bool> escaping_states(const BasicLinearSystem<Scalar>& sys)
{
    return backward_closure(sys.A, sys.escape);
}

inline std::vector<Index> indices_of(const std::vector<bool>& mask)
{
    std::vector<Index> out;
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i])
            out.push_back(static_cast<Index>(i));
    return out;
}

template <typename Scalar>
Scalar fixed_point_residual(const BasicLinearSystem<Scalar>& sys, const Vector<Scalar>& p)
{
    if (sys.size() == 0)
        return Scalar(0);
    return (p - (sys.A * p + sys.b)).cwiseAbs().maxCoeff();
}

/// Partial sums of sum_{i=0}^{truncation} A^i b; never throws.
template <typename Scalar>
SeriesResult<Scalar> truncated_series(const BasicLinearSystem<Scalar>& sys, long truncation)
{
    Vector<Scalar> term = sys.b;
    Vector<Scalar> sum = term;
    for (long i = 0; i < truncation; ++i) {
        term = sys.A * term;
        sum += term;
    }
    term = sys.A * term;
    const Scalar residual = term.size() ? term.cwiseAbs().maxCoeff() : Scalar(0);
    return {std::move(sum), residual};
}

/// Solves (I - A_RR) x = rhs_R on the index set R, leaving zeros elsewhere.
/// Uses one step of iterative refinement.
template <typename Scalar>
Vector<Scalar> solve_restricted(const Matrix<Scalar>& A, const Vector<Scalar>& rhs,
                                const std::vector<Index>& keep, bool transpose = false)
{
    const Index m = static_cast<Index>(keep.size());
    Vector<Scalar> out = Vector<Scalar>::Zero(rhs.size());
    if (m == 0)
        return out;
    Matrix<Scalar> M = Matrix<Scalar>::Identity(m, m) - A(keep, keep);
    if (transpose)
        M.transposeInPlace();
    const Vector<Scalar> r = rhs(keep);
    Eigen::PartialPivLU<Matrix<Scalar>> lu(M);
    Vector<Scalar> x = lu.solve(r);
    x += lu.solve(r - M * x);
    if (!x.allFinite())
        throw Error(ErrorCode::SingularSystem, "restricted system produced non-finite values");
    out(keep) = x;
    return out;
}

template <typename Scalar>
Vector<Scalar> solve_reachability(const BasicLinearSystem<Scalar>& sys,
                                  const SolveMethod& method = DirectSolve{})
{
    using std::abs;
    if (const auto* series = std::get_if<SeriesSolve>(&method)) {
        auto result = truncated_series(sys, series->truncation);
        if (!(result.residual <= Scalar(series->tolerance)))
            throw Error(ErrorCode::NonConvergence,
                        "series residual " + std::to_string(static_cast<double>(result.residual)) +
                            " after " + std::to_string(series->truncation) + " terms");
        return std::move(result.p);
    }

    const auto keep = indices_of(reach_positive_states(sys));
    Vector<Scalar> p = solve_restricted(sys.A, sys.b, keep);
    p = p.cwiseMax(Scalar(0)).cwiseMin(Scalar(1));
    const Scalar residual = fixed_point_residual(sys, p);
    if (!(residual <= Scalar(kResidualTolerance)))
        throw Error(ErrorCode::SingularSystem,
                    "fixed-point residual " + std::to_string(static_cast<double>(residual)));
    return p;
}

/// Probability of the problem from the initial distribution: constraint states
/// weigh in with p, destination states with 1, all others with 0.
template <typename Scalar>
Scalar total_probability(const Vector<Scalar>& initial, const Vector<Scalar>& p,
                         const CanonicalProblem& cp)
{
    if (p.size() != cp.n_constraint)
        throw Error(ErrorCode::ArityMismatch, "solution length does not match the constraint set");
    Scalar total(0);
    for (Index k = 0; k < cp.n_constraint; ++k)
        total += initial[cp.order[static_cast<std::size_t>(k)]] * p[k];
    for (Index k = cp.first_destination; k < cp.n; ++k)
        total += initial[cp.order[static_cast<std::size_t>(k)]];
    return total;
}

/// Initial distribution restricted to the constraint block, in canonical order.
Eigen::VectorXd constraint_initial(const Eigen::VectorXd& initial, const CanonicalProblem& cp);

/// Referential probability of the problem in the PMC.
double referential_probability(const Pmc& pmc, const CanonicalProblem& cp,
                               const SolveMethod& method = DirectSolve{});

} // namespace pmcsens

#endif // PMCSENS_REACHABILITY_HPP
