#ifndef PMCSENS_TESTS_ORACLES_HPP
#define PMCSENS_TESTS_ORACLES_HPP

// Reference computations kept apart from the library: no canonical ordering,
// no reach-positive restriction, a dense full-pivot solve of the whole
// constraint block, and finite differences for derivatives.

#include "pmcsens/model.hpp"

#include <map>
#include <set>
#include <string>

namespace pmcsens::oracle {

using Values = std::map<std::string, Eigen::VectorXd>;

/// Transition matrix with the parameters set to `values`; missing ids use references.
/// Entries need not form probability vectors.
inline Eigen::MatrixXd transition(const Pmc& pmc, const Values& values)
{
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(pmc.n, pmc.n);
    for (const auto& [row, v] : pmc.concrete_rows)
        for (Index j = 0; j < pmc.n; ++j)
            P(row, j) = v[j];
    for (const auto& p : pmc.parameters) {
        auto it = values.find(p.id);
        const Eigen::VectorXd& v = it == values.end() ? p.reference : it->second;
        for (std::size_t j = 0; j < p.support.size(); ++j)
            P(p.row, p.support[j]) = v[static_cast<Index>(j)];
    }
    return P;
}

/// sum over constraint states of iota[i] * Pr(constraint U destination from i).
/// Assumes I - A is non-singular on the constraint block.
inline double weighted_reachability(const Eigen::MatrixXd& P, const Eigen::VectorXd& iota,
                                    const std::vector<Index>& constraint_in, const std::vector<Index>& destination_in)
{
    const std::set<Index> destination(destination_in.begin(), destination_in.end());
    std::vector<Index> constraint;
    for (Index s : std::set<Index>(constraint_in.begin(), constraint_in.end()))
        if (!destination.count(s))
            constraint.push_back(s);
    const Index m = static_cast<Index>(constraint.size());
    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(m, m);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
    for (Index i = 0; i < m; ++i) {
        for (Index j = 0; j < m; ++j)
            M(i, j) -= P(constraint[i], constraint[j]);
        for (Index d : destination)
            b[i] += P(constraint[i], d);
    }
    const Eigen::VectorXd p = M.fullPivLu().solve(b);
    double total = 0.0;
    for (Index i = 0; i < m; ++i)
        total += iota[constraint[i]] * p[i];
    return total;
}

inline double rho(const Pmc& pmc, const ReachabilityProblem& problem, const Values& values)
{
    return weighted_reachability(transition(pmc, values), pmc.initial, problem.constraint, problem.destination) -
           weighted_reachability(transition(pmc, {}), pmc.initial, problem.constraint, problem.destination);
}

/// Central differences of rho along each coordinate of one parameter.
inline Eigen::VectorXd gradient(const Pmc& pmc, const ReachabilityProblem& problem, const std::string& id,
                                double step = 1e-6)
{
    const DistributionParameter* p = pmc.find_parameter(id);
    Eigen::VectorXd h(p->arity());
    for (Index j = 0; j < p->arity(); ++j) {
        Eigen::VectorXd up = p->reference, down = p->reference;
        up[j] += step;
        down[j] -= step;
        h[j] = (rho(pmc, problem, {{id, up}}) - rho(pmc, problem, {{id, down}})) / (2.0 * step);
    }
    return h;
}

/// Central difference of rho along the zero-sum direction e_{j,k} (+1/2 at j, -1/2 at k).
inline double pair_derivative(const Pmc& pmc, const ReachabilityProblem& problem, const std::string& id, Index j,
                              Index k, double step = 1e-6)
{
    const DistributionParameter* p = pmc.find_parameter(id);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(p->arity());
    e[j] = 0.5;
    e[k] = -0.5;
    const Eigen::VectorXd up = p->reference + step * e, down = p->reference - step * e;
    return (rho(pmc, problem, {{id, up}}) - rho(pmc, problem, {{id, down}})) / (2.0 * step);
}

} // namespace pmcsens::oracle

#endif // PMCSENS_TESTS_ORACLES_HPP
