#include "pmcsens/perturbation.hpp"

#include <cmath>

namespace pmcsens {

const ParameterGradient& GradientSet::at(std::string_view id) const
{
    for (const auto& p : parameters)
        if (p.id == id)
            return p;
    throw Error(ErrorCode::UnknownParameter, "no parameter '" + std::string(id) + "'");
}

std::vector<std::string> GradientSet::ids() const
{
    std::vector<std::string> out;
    for (const auto& p : parameters)
        out.push_back(p.id);
    return out;
}

Direction Direction::uniform(const std::vector<std::string>& ids)
{
    Direction w;
    for (const auto& id : ids)
        w.weights[id] = 1.0 / static_cast<double>(ids.size());
    return w;
}

Direction Direction::concentrated(const std::vector<std::string>& ids, const std::string& id)
{
    Direction w;
    for (const auto& other : ids)
        w.weights[other] = other == id ? 1.0 : 0.0;
    return w;
}

Direction Direction::proportional(const std::map<std::string, double>& deltas)
{
    double total = 0.0;
    for (const auto& [id, d] : deltas) {
        if (!(d > 0.0))
            throw Error(ErrorCode::NonpositiveDelta, "distance for '" + id + "' must be positive");
        total += d;
    }
    Direction w;
    for (const auto& [id, d] : deltas)
        w.weights[id] = d / total;
    return w;
}

void validate_direction(const Direction& w, const std::vector<std::string>& ids)
{
    if (w.weights.size() != ids.size())
        throw Error(ErrorCode::DirectionMismatch, "direction has " + std::to_string(w.weights.size()) +
                                                      " weights for " + std::to_string(ids.size()) +
                                                      " parameters");
    double sum = 0.0;
    for (const auto& id : ids) {
        auto it = w.weights.find(id);
        if (it == w.weights.end())
            throw Error(ErrorCode::DirectionMismatch, "direction has no weight for '" + id + "'");
        if (!(it->second >= 0.0 && it->second <= 1.0))
            throw Error(ErrorCode::WeightsNotNormalized, "weight for '" + id + "' outside [0,1]");
        sum += it->second;
    }
    if (std::abs(sum - 1.0) > kStochasticTolerance)
        throw Error(ErrorCode::WeightsNotNormalized, "direction weights sum to " + std::to_string(sum));
}

GradientSet gradient_coefficients(const Pmc& pmc, const CanonicalProblem& cp)
{
    const LinearSystem sys = extract_system(pmc, cp);

    GradientSet g;
    g.t = solve_reachability(sys);
    // Trapped states (never leaving the constraint block) have zero weight.
    const Eigen::VectorXd iota = constraint_initial(pmc.initial, cp);
    g.s = solve_restricted<double>(sys.A, iota, indices_of(escaping_states(sys)), true);

    for (std::size_t k = 0; k < pmc.parameters.size(); ++k) {
        const auto& param = pmc.parameters[k];
        const auto& placement = sys.placement[k];
        ParameterGradient grad{param.id, param.reference, Eigen::VectorXd::Zero(param.arity())};
        if (placement.row) {
            const double weight = g.s[*placement.row];
            for (Index j = 0; j < param.arity(); ++j) {
                const auto& v = placement.variables[static_cast<std::size_t>(j)];
                if (v.role == Role::ConstraintColumn)
                    grad.h[j] = weight * g.t[v.column];
                else if (v.role == Role::DestinationSum)
                    grad.h[j] = weight;
            }
        }
        g.parameters.push_back(std::move(grad));
    }
    return g;
}

double condition_number_directional(const GradientSet& g, const Direction& w)
{
    validate_direction(w, g.ids());
    double kappa = 0.0;
    for (const auto& p : g.parameters)
        kappa += w.weights.at(p.id) * condition_number_basic(p.h);
    return kappa;
}

double condition_number_parameterwise(const GradientSet& g, std::string_view id)
{
    return condition_number_basic(g.at(id).h);
}

LinkIdentity link_identity_check(const GradientSet& g, const std::map<std::string, double>& deltas)
{
    const Direction w = Direction::proportional(deltas);
    LinkIdentity out;
    double total = 0.0;
    for (const auto& [id, d] : deltas) {
        out.lhs += condition_number_parameterwise(g, id) * d;
        total += d;
    }
    out.rhs = condition_number_directional(g, w) * total;
    out.discrepancy = std::abs(out.lhs - out.rhs);
    return out;
}

double perturbation_function_exact(const Pmc& pmc, const CanonicalProblem& cp, const Assignment& a,
                                   const SolveMethod& method)
{
    const LinearSystem reference = extract_system(pmc, cp);
    const LinearSystem perturbed = concrete_system(instantiate(pmc, a), cp);
    const Eigen::VectorXd iota = constraint_initial(pmc.initial, cp);
    const Eigen::VectorXd diff = solve_reachability(perturbed, method) - solve_reachability(reference, method);
    return iota.dot(diff);
}

double linear_estimate(const GradientSet& g, const Assignment& a)
{
    double total = 0.0;
    for (const auto& p : g.parameters) {
        auto it = a.values.find(p.id);
        if (it == a.values.end())
            continue;
        if (it->second.size() != p.h.size())
            throw Error(ErrorCode::ArityMismatch, "value for '" + p.id + "' has the wrong length");
        total += p.h.dot(it->second - p.reference);
    }
    return total;
}

ExtremalPair extremal_indices(const Eigen::VectorXd& h)
{
    if (h.size() == 0)
        throw Error(ErrorCode::EmptyVector, "extremal indices of an empty vector");
    ExtremalPair out;
    for (Index j = 1; j < h.size(); ++j) {
        if (h[j] > h[out.up])
            out.up = j;
        if (h[j] < h[out.down])
            out.down = j;
    }
    return out;
}

SensitivityReport analyze_sensitivity(const Pmc& pmc, const ReachabilityProblem& problem,
                                      const std::optional<Direction>& direction,
                                      const SolveMethod& method)
{
    const CanonicalProblem cp = canonicalize(pmc, problem);
    SensitivityReport report;
    report.probability = referential_probability(pmc, cp, method);
    report.gradients = gradient_coefficients(pmc, cp);
    report.problem = {cp.constraint_states(), cp.destination_states()};
    for (const auto& p : report.gradients.parameters) {
        report.kappa.push_back(condition_number_basic(p.h));
        report.kappa_sum += report.kappa.back();
    }
    const auto ids = pmc.parameter_ids();
    report.direction = direction ? *direction : Direction::uniform(ids);
    report.kappa_w = ids.empty() ? 0.0 : condition_number_directional(report.gradients, report.direction);
    return report;
}

} // namespace pmcsens
