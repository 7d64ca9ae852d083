#include "pmcsens/reachability.hpp"

#include <algorithm>
#include <set>

namespace pmcsens {

std::vector<Index> CanonicalProblem::constraint_states() const
{
    return {order.begin(), order.begin() + n_constraint};
}

std::vector<Index> CanonicalProblem::destination_states() const
{
    return {order.begin() + first_destination, order.end()};
}

CanonicalProblem canonicalize(Index n, const ReachabilityProblem& problem)
{
    if (problem.destination.empty())
        throw Error(ErrorCode::EmptyDestination, "destination set is empty");
    auto check = [n](Index s) {
        if (s < 0 || s >= n)
            throw Error(ErrorCode::IndexOutOfRange,
                        "state " + std::to_string(s + 1) + " outside 1.." + std::to_string(n));
    };
    const std::set<Index> destination(problem.destination.begin(), problem.destination.end());
    std::set<Index> constraint;
    for (Index s : problem.destination)
        check(s);
    for (Index s : problem.constraint) {
        check(s);
        if (!destination.count(s))
            constraint.insert(s);
    }

    CanonicalProblem cp;
    cp.n = n;
    cp.order.reserve(static_cast<std::size_t>(n));
    cp.order.insert(cp.order.end(), constraint.begin(), constraint.end());
    for (Index s = 0; s < n; ++s)
        if (!constraint.count(s) && !destination.count(s))
            cp.order.push_back(s);
    cp.order.insert(cp.order.end(), destination.begin(), destination.end());
    cp.n_constraint = static_cast<Index>(constraint.size());
    cp.first_destination = n - static_cast<Index>(destination.size());
    cp.position.assign(static_cast<std::size_t>(n), 0);
    for (Index k = 0; k < n; ++k)
        cp.position[static_cast<std::size_t>(cp.order[static_cast<std::size_t>(k)])] = k;
    return cp;
}

CanonicalProblem canonicalize(const Pmc& pmc, const ReachabilityProblem& problem)
{
    return canonicalize(pmc.n, problem);
}

LinearSystem concrete_system(const ConcreteChain& chain, const CanonicalProblem& cp)
{
    const Index m = cp.n_constraint;
    LinearSystem sys;
    sys.A.resize(m, m);
    sys.b = Eigen::VectorXd::Zero(m);
    sys.escape = Eigen::VectorXd::Zero(m);
    for (Index i = 0; i < m; ++i) {
        const Index from = cp.order[static_cast<std::size_t>(i)];
        for (Index j = 0; j < m; ++j)
            sys.A(i, j) = chain.transition(from, cp.order[static_cast<std::size_t>(j)]);
        for (Index k = m; k < cp.n; ++k) {
            const double mass = chain.transition(from, cp.order[static_cast<std::size_t>(k)]);
            sys.escape[i] += mass;
            if (k >= cp.first_destination)
                sys.b[i] += mass;
        }
    }
    return sys;
}

LinearSystem extract_system(const Pmc& pmc, const CanonicalProblem& cp)
{
    require_valid(pmc);
    if (cp.n != pmc.n)
        throw Error(ErrorCode::IndexOutOfRange, "canonical problem built for a different state count");

    LinearSystem sys = concrete_system(instantiate(pmc, references(pmc)), cp);
    for (const auto& p : pmc.parameters) {
        ParameterPlacement placement;
        placement.id = p.id;
        if (cp.is_constraint(p.row)) {
            placement.row = cp.position[static_cast<std::size_t>(p.row)];
            for (Index col : p.support) {
                VariablePlacement v;
                if (cp.is_constraint(col)) {
                    v.role = Role::ConstraintColumn;
                    v.column = cp.position[static_cast<std::size_t>(col)];
                } else if (cp.is_destination(col)) {
                    v.role = Role::DestinationSum;
                }
                placement.variables.push_back(v);
            }
        }
        sys.placement.push_back(std::move(placement));
    }
    return sys;
}

Eigen::VectorXd constraint_initial(const Eigen::VectorXd& initial, const CanonicalProblem& cp)
{
    Eigen::VectorXd out(cp.n_constraint);
    for (Index k = 0; k < cp.n_constraint; ++k)
        out[k] = initial[cp.order[static_cast<std::size_t>(k)]];
    return out;
}

double referential_probability(const Pmc& pmc, const CanonicalProblem& cp, const SolveMethod& method)
{
    const LinearSystem sys = extract_system(pmc, cp);
    return total_probability<double>(pmc.initial, solve_reachability(sys, method), cp);
}

} // namespace pmcsens
